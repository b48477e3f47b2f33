use num_traits::{Signed, Zero};

use super::{
    conditions, local_error_series, ConcreteScheme, ConditionSystem, OrderError, Route,
    SymbolicScheme,
};
use crate::exact_arith::Rational;
use crate::lyndon::{lie_decompose, LieDecomposition, LyndonWord};

/// Value of `polynomial - rhs` for one condition at a concrete scheme.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Residual {
    pub degree: usize,
    pub lyndon: LyndonWord,
    pub value: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verification {
    pub satisfied: bool,
    pub residuals: Vec<Residual>,
}

impl Verification {
    /// Satisfied iff every residual is at most `tolerance` in magnitude.
    pub fn from_residuals(residuals: Vec<Residual>, tolerance: &Rational) -> Self {
        let satisfied = residuals.iter().all(|r| r.value.abs() <= *tolerance);
        Verification {
            satisfied,
            residuals,
        }
    }

    pub fn failing(&self) -> impl Iterator<Item = &Residual> {
        self.residuals.iter().filter(|r| !r.value.is_zero())
    }
}

/// Evaluates the route's condition system at `scheme`, exactly.
pub fn verify_scheme(
    scheme: &ConcreteScheme,
    p: usize,
    route: Route,
) -> Result<Verification, OrderError> {
    let system = conditions(scheme.shape(), p, route)?;
    Ok(Verification::from_residuals(
        system.evaluate(scheme)?,
        &Rational::zero(),
    ))
}

/// Direct check that the local error series vanishes in degrees `1..=p`.
pub fn local_error_vanishes_through(scheme: &ConcreteScheme, p: usize) -> bool {
    let err = local_error_series(&SymbolicScheme::from_concrete(scheme), p);
    err.is_zero()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WitnessVerdict {
    pub witness: String,
    pub first: Verification,
    pub second: Verification,
}

impl WitnessVerdict {
    pub fn agree(&self) -> bool {
        self.first.satisfied == self.second.satisfied
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquivalenceReport {
    pub verdicts: Vec<WitnessVerdict>,
}

impl EquivalenceReport {
    pub fn all_agree(&self) -> bool {
        self.verdicts.iter().all(WitnessVerdict::agree)
    }

    pub fn disagreements(&self) -> impl Iterator<Item = &WitnessVerdict> {
        self.verdicts.iter().filter(|v| !v.agree())
    }
}

/// Falsification harness: checks that every witness satisfies `first` iff it
/// satisfies `second`. A residual counts as zero when its magnitude is at
/// most `tolerance`; pass zero for exact witnesses.
pub fn systems_equivalent(
    first: &ConditionSystem,
    second: &ConditionSystem,
    witnesses: &[ConcreteScheme],
    tolerance: &Rational,
) -> Result<EquivalenceReport, OrderError> {
    if first.shape() != second.shape() {
        return Err(OrderError::StageMismatch {
            expected: first.shape().stages(),
            found: second.shape().stages(),
        });
    }
    if first.target_order() != second.target_order() {
        return Err(OrderError::OrderMismatch {
            left: first.target_order(),
            right: second.target_order(),
        });
    }
    let verdicts = witnesses
        .iter()
        .map(|w| {
            Ok(WitnessVerdict {
                witness: w.label().to_string(),
                first: Verification::from_residuals(first.evaluate(w)?, tolerance),
                second: Verification::from_residuals(second.evaluate(w)?, tolerance),
            })
        })
        .collect::<Result<Vec<_>, OrderError>>()?;
    Ok(EquivalenceReport { verdicts })
}

/// Lyndon-basis coordinates of the degree-`p+1` part of the local error of a
/// scheme of order `p`.
///
/// For such a scheme that part equals the degree-`p+1` part of
/// `log(product) - (A + B)`, with coefficient one.
pub fn leading_error_term(
    scheme: &ConcreteScheme,
    p: usize,
) -> Result<LieDecomposition, OrderError> {
    if p == 0 {
        return Err(OrderError::InvalidOrder);
    }
    let err = local_error_series(&SymbolicScheme::from_concrete(scheme), p + 1);
    let vanishes = (1..=p).all(|j| err.component(j).map(|c| c.is_empty()).unwrap_or(false));
    if !vanishes {
        return Err(OrderError::NotOrderP {
            scheme: scheme.label().to_string(),
            order: p,
        });
    }
    Ok(lie_decompose(&err.homogeneous_part(p + 1)?, p + 1)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_arith::{rational, rational_int};
    use crate::order_conditions::{conditions_bch, conditions_taylor, Condition, SchemeShape};

    fn lie_trotter() -> ConcreteScheme {
        ConcreteScheme::named("lie-trotter", vec![rational_int(1)], vec![rational_int(1)]).unwrap()
    }

    fn strang() -> ConcreteScheme {
        ConcreteScheme::named(
            "strang",
            vec![rational(1, 2), rational(1, 2)],
            vec![rational_int(1), rational_int(0)],
        )
        .unwrap()
    }

    fn order3_scheme() -> ConcreteScheme {
        ConcreteScheme::named(
            "order3",
            vec![rational(7, 24), rational(3, 4), rational(-1, 24)],
            vec![rational(2, 3), rational(-2, 3), rational_int(1)],
        )
        .unwrap()
    }

    fn residual(v: &Verification, word: &str) -> Rational {
        v.residuals
            .iter()
            .find(|r| r.lyndon.to_string() == word)
            .map(|r| r.value.clone())
            .unwrap()
    }

    #[test]
    fn order3_scheme_satisfies_both_routes() {
        for route in [Route::Taylor, Route::Bch] {
            let v = verify_scheme(&order3_scheme(), 3, route).unwrap();
            assert!(v.satisfied, "{route}");
            assert!(v.residuals.iter().all(|r| r.value.is_zero()));
        }
    }

    #[test]
    fn strang_is_exactly_second_order() {
        for route in [Route::Taylor, Route::Bch] {
            assert!(verify_scheme(&strang(), 2, route).unwrap().satisfied);
        }
        let bch = verify_scheme(&strang(), 3, Route::Bch).unwrap();
        assert!(!bch.satisfied);
        assert_eq!(residual(&bch, "AAB"), rational(-1, 24));
        assert_eq!(residual(&bch, "ABB"), rational(1, 12));
        let taylor = verify_scheme(&strang(), 3, Route::Taylor).unwrap();
        assert_eq!(residual(&taylor, "AAB"), rational(-1, 4));
        assert_eq!(residual(&taylor, "ABB"), rational(1, 2));
    }

    #[test]
    fn lie_trotter_is_exactly_first_order() {
        assert!(
            verify_scheme(&lie_trotter(), 1, Route::Bch)
                .unwrap()
                .satisfied
        );
        let v = verify_scheme(&lie_trotter(), 2, Route::Bch).unwrap();
        assert!(!v.satisfied);
        assert_eq!(residual(&v, "AB"), rational(1, 2));
        assert_eq!(v.failing().count(), 1);
    }

    #[test]
    fn leading_terms_of_registry_schemes() {
        let lt = leading_error_term(&lie_trotter(), 1).unwrap();
        let nonzero: Vec<String> = lt.nonzero().map(|(w, c)| format!("{w}:{c}")).collect();
        assert_eq!(nonzero, ["AB:1/2"]);

        let st = leading_error_term(&strang(), 2).unwrap();
        let nonzero: Vec<String> = st.nonzero().map(|(w, c)| format!("{w}:{c}")).collect();
        assert_eq!(nonzero, ["AAB:-1/24", "ABB:1/12"]);

        let o3 = leading_error_term(&order3_scheme(), 3).unwrap();
        assert_eq!(o3.degree(), 4);
        assert_eq!(o3.iter().count(), 3);
        assert!(!o3.is_zero());
    }

    #[test]
    fn leading_term_requires_order() {
        assert!(matches!(
            leading_error_term(&strang(), 3),
            Err(OrderError::NotOrderP { order: 3, .. })
        ));
    }

    #[test]
    fn identical_systems_agree_and_fault_is_flagged() {
        let shape = SchemeShape::new(3).unwrap();
        let taylor = conditions_taylor(shape, 3).unwrap();
        let bch = conditions_bch(shape, 3).unwrap();
        let witnesses = vec![
            order3_scheme(),
            strang().padded(3).unwrap(),
            lie_trotter().padded(3).unwrap(),
        ];
        let zero = Rational::zero();
        assert!(systems_equivalent(&taylor, &taylor, &witnesses, &zero)
            .unwrap()
            .all_agree());
        assert!(systems_equivalent(&taylor, &bch, &witnesses, &zero)
            .unwrap()
            .all_agree());

        let mut entries: Vec<Condition> = bch.entries().to_vec();
        entries[0].rhs = rational_int(1);
        let faulty = ConditionSystem::new(shape, 3, entries);
        let report = systems_equivalent(&taylor, &faulty, &witnesses, &zero).unwrap();
        assert!(!report.all_agree());
        let flagged: Vec<&str> = report.disagreements().map(|v| v.witness.as_str()).collect();
        assert_eq!(flagged, ["order3"]);
    }

    #[test]
    fn equivalence_rejects_mismatched_systems() {
        let s2 = SchemeShape::new(2).unwrap();
        let s3 = SchemeShape::new(3).unwrap();
        let zero = Rational::zero();
        assert!(systems_equivalent(
            &conditions_taylor(s2, 2).unwrap(),
            &conditions_taylor(s3, 2).unwrap(),
            &[],
            &zero
        )
        .is_err());
        assert!(systems_equivalent(
            &conditions_taylor(s2, 2).unwrap(),
            &conditions_taylor(s2, 3).unwrap(),
            &[],
            &zero
        )
        .is_err());
    }

    #[test]
    fn direct_check_matches_bch_on_registry() {
        for (scheme, max) in [(lie_trotter(), 1), (strang(), 2), (order3_scheme(), 3)] {
            for p in 1..=max + 1 {
                let direct = local_error_vanishes_through(&scheme, p);
                let bch = verify_scheme(&scheme, p, Route::Bch).unwrap().satisfied;
                assert_eq!(direct, bch, "{} p={p}", scheme.label());
                assert_eq!(direct, p <= max);
            }
        }
    }

    #[test]
    fn stage_mismatch_on_evaluate() {
        let sys = conditions_taylor(SchemeShape::new(3).unwrap(), 1).unwrap();
        assert!(matches!(
            sys.evaluate(&strang()),
            Err(OrderError::StageMismatch {
                expected: 3,
                found: 2
            })
        ));
    }
}
