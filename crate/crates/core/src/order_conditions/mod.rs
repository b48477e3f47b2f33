//! Order conditions for `e^{a1 A t} e^{b1 B t} ... e^{as A t} e^{bs B t}`.
//!
//! Two independent generators produce a [`ConditionSystem`]:
//!
//! * the Taylor route reads the coefficients of the Lyndon words off the
//!   multinomial expansion of the `q`-th derivative of the local error;
//! * the BCH route takes the logarithm of the splitting product and
//!   decomposes `log(...) - (A + B)` in the Lyndon basis degree by degree.
//!
//! Both emit one polynomial per Lyndon word of degree `1..=p`, with right-hand
//! side zero. The polynomials differ between the routes; their common zero
//! sets agree.

mod scheme;
mod verify;

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::binomial;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact_arith::{format_rational, ArithError, CoeffPoly, Rational};
use crate::lyndon::{lie_decompose, lyndon_words_of_degree, LyndonError, LyndonWord};
use crate::nc_series::{Component, Letter, NCSeries, SeriesError, Word};

pub use scheme::{ConcreteScheme, SchemeShape, SymbolicScheme};
pub use verify::{
    leading_error_term, local_error_vanishes_through, systems_equivalent, verify_scheme,
    EquivalenceReport, Residual, Verification, WitnessVerdict,
};

/// The two generators `A` and `B`.
pub const ALPHABET: usize = 2;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OrderError {
    #[error("invalid scheme: {0}")]
    InvalidScheme(String),
    #[error("target order must be at least 1")]
    InvalidOrder,
    #[error("stage mismatch: expected {expected} stages, found {found}")]
    StageMismatch { expected: usize, found: usize },
    #[error("systems target different orders ({left} vs {right})")]
    OrderMismatch { left: usize, right: usize },
    #[error("scheme {scheme} does not have order {order}")]
    NotOrderP { scheme: String, order: usize },
    #[error(transparent)]
    Lyndon(#[from] LyndonError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Arith(#[from] ArithError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    Taylor,
    Bch,
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Route::Taylor => "taylor",
            Route::Bch => "bch",
        })
    }
}

impl FromStr for Route {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "taylor" => Ok(Route::Taylor),
            "bch" => Ok(Route::Bch),
            other => Err(format!("unknown route {other:?} (expected taylor or bch)")),
        }
    }
}

/// One equation `polynomial = rhs`, attached to a Lyndon word of degree `degree`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Condition {
    pub degree: usize,
    pub lyndon: LyndonWord,
    pub polynomial: CoeffPoly,
    pub rhs: Rational,
}

/// Serialized form of a [`Condition`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionRecord {
    pub order: usize,
    pub lyndon: String,
    pub polynomial: String,
    pub rhs: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConditionSystem {
    shape: SchemeShape,
    target_order: usize,
    entries: Vec<Condition>,
}

impl ConditionSystem {
    /// Entries are sorted by `(degree, lyndon word)`.
    pub fn new(shape: SchemeShape, target_order: usize, mut entries: Vec<Condition>) -> Self {
        entries.sort_by(|x, y| (x.degree, &x.lyndon).cmp(&(y.degree, &y.lyndon)));
        ConditionSystem {
            shape,
            target_order,
            entries,
        }
    }

    pub fn shape(&self) -> SchemeShape {
        self.shape
    }

    pub fn target_order(&self) -> usize {
        self.target_order
    }

    pub fn entries(&self) -> &[Condition] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// The subsystem of entries with degree `<= order`.
    pub fn truncated(&self, order: usize) -> ConditionSystem {
        ConditionSystem {
            shape: self.shape,
            target_order: order.min(self.target_order),
            entries: self
                .entries
                .iter()
                .filter(|c| c.degree <= order)
                .cloned()
                .collect(),
        }
    }

    /// `polynomial(point) - rhs` for every entry.
    pub fn evaluate(&self, scheme: &ConcreteScheme) -> Result<Vec<Residual>, OrderError> {
        if scheme.stages() != self.shape.stages() {
            return Err(OrderError::StageMismatch {
                expected: self.shape.stages(),
                found: scheme.stages(),
            });
        }
        let point = scheme.point();
        self.entries
            .iter()
            .map(|c| {
                Ok(Residual {
                    degree: c.degree,
                    lyndon: c.lyndon.clone(),
                    value: c.polynomial.eval(&point)? - &c.rhs,
                })
            })
            .collect()
    }

    pub fn records(&self) -> Vec<ConditionRecord> {
        self.entries
            .iter()
            .map(|c| ConditionRecord {
                order: c.degree,
                lyndon: c.lyndon.to_string(),
                polynomial: c.polynomial.to_string(),
                rhs: format_rational(&c.rhs),
            })
            .collect()
    }
}

impl fmt::Display for ConditionSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.entries {
            writeln!(
                f,
                "q={} {}: {} = {}",
                c.degree, c.lyndon, c.polynomial, c.rhs
            )?;
        }
        Ok(())
    }
}

fn letter_series(truncation: usize, letter: Letter, coeff: &CoeffPoly) -> NCSeries {
    NCSeries::letter(ALPHABET, truncation, letter, coeff.clone()).expect("two-letter alphabet")
}

/// `exp(a1 A) exp(b1 B) ... exp(as A) exp(bs B)` truncated at `truncation`.
pub fn splitting_product(scheme: &SymbolicScheme, truncation: usize) -> NCSeries {
    let mut acc = NCSeries::one(ALPHABET, truncation);
    for (aj, bj) in scheme.a().iter().zip(scheme.b()) {
        for (letter, coeff) in [(Letter::A, aj), (Letter::B, bj)] {
            let factor = letter_series(truncation, letter, coeff)
                .exp()
                .expect("letter series has no constant term");
            acc = acc
                .try_mul(&factor)
                .expect("shared alphabet and truncation");
        }
    }
    acc
}

/// `A + B` at the given truncation.
pub fn letter_sum(truncation: usize) -> NCSeries {
    let one = CoeffPoly::one();
    letter_series(truncation, Letter::A, &one)
        .try_add(&letter_series(truncation, Letter::B, &one))
        .expect("shared alphabet and truncation")
}

/// Splitting product minus `exp(A + B)`; the constant term is zero.
pub fn local_error_series(scheme: &SymbolicScheme, truncation: usize) -> NCSeries {
    let exact = letter_sum(truncation).exp().expect("no constant term");
    splitting_product(scheme, truncation)
        .try_sub(&exact)
        .expect("shared alphabet and truncation")
}

/// All `k in N^parts` with `|k| = total`, in lexicographic order.
fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 0 {
        return if total == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in 0..=total {
        for mut rest in compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn component_product(left: &Component, right: &Component) -> Component {
    let mut out = Component::new();
    for (u, cu) in left {
        for (v, cv) in right {
            let w = u.concat(v);
            let c = cu * cv;
            let entry = out.entry(w.clone()).or_default();
            *entry = &*entry + &c;
            if entry.is_zero() {
                out.remove(&w);
            }
        }
    }
    out
}

/// The `q`-th derivative at `t = 0` of the local error, computed directly from
/// the multinomial expansion
///
/// ```text
/// sum_{|k|=q} (q; k) prod_j sum_l C(k_j, l) (a_j A)^l (b_j B)^{k_j-l}  -  (A+B)^q
/// ```
///
/// as a homogeneous series of degree `q` (truncation `q`).
pub fn taylor_derivative(scheme: &SymbolicScheme, q: usize) -> NCSeries {
    let s = scheme.shape().stages();
    let mut factorial = vec![BigInt::one()];
    for n in 1..=q {
        let next = &factorial[n - 1] * BigInt::from(n);
        factorial.push(next);
    }

    // stage_blocks[j][k] = sum_l C(k, l) (a_j A)^l (b_j B)^{k-l}
    let stage_blocks: Vec<Vec<Component>> = scheme
        .a()
        .iter()
        .zip(scheme.b())
        .map(|(aj, bj)| {
            (0..=q)
                .map(|k| {
                    let mut block = Component::new();
                    for l in 0..=k {
                        let mut letters = vec![Letter::A; l];
                        letters.extend(std::iter::repeat_n(Letter::B, k - l));
                        let weight =
                            Rational::from_integer(binomial(BigInt::from(k), BigInt::from(l)));
                        let c = (&aj.pow(l as u32) * &bj.pow((k - l) as u32)).scale(&weight);
                        if !c.is_zero() {
                            block.insert(Word::new(letters), c);
                        }
                    }
                    block
                })
                .collect()
        })
        .collect();

    let mut total = Component::new();
    for k in compositions(q, s) {
        let denom: BigInt = k.iter().map(|&kj| factorial[kj].clone()).product();
        let multinomial = Rational::new(factorial[q].clone(), denom);
        let mut prod = Component::from([(Word::empty(), CoeffPoly::one())]);
        for (j, &kj) in k.iter().enumerate() {
            prod = component_product(&prod, &stage_blocks[j][kj]);
            if prod.is_empty() {
                break;
            }
        }
        for (w, c) in prod {
            let entry = total.entry(w.clone()).or_default();
            *entry = &*entry + &c.scale(&multinomial);
            if entry.is_zero() {
                total.remove(&w);
            }
        }
    }

    // subtract (A+B)^q: every word of length q with coefficient 1
    let mut power = Component::from([(Word::empty(), CoeffPoly::one())]);
    let letters = Component::from([
        (Word::single(Letter::A), CoeffPoly::one()),
        (Word::single(Letter::B), CoeffPoly::one()),
    ]);
    for _ in 0..q {
        power = component_product(&power, &letters);
    }
    let mut out = NCSeries::zero(ALPHABET, q);
    for (w, c) in total {
        out.add_term(w, c).expect("word of length q");
    }
    for (w, c) in power {
        out.add_term(w, -c).expect("word of length q");
    }
    out
}

fn check_order(p: usize) -> Result<(), OrderError> {
    if p == 0 {
        Err(OrderError::InvalidOrder)
    } else {
        Ok(())
    }
}

/// Order conditions from the Taylor route: for each degree `q <= p` and each
/// Lyndon word `w` of degree `q`, the coefficient of the word `w` in
/// [`taylor_derivative`]. No lower-order conditions are substituted.
pub fn conditions_taylor(shape: SchemeShape, p: usize) -> Result<ConditionSystem, OrderError> {
    check_order(p)?;
    let scheme = SymbolicScheme::new(shape);
    let mut entries = Vec::new();
    for q in 1..=p {
        let derivative = taylor_derivative(&scheme, q);
        for w in lyndon_words_of_degree(ALPHABET, q) {
            entries.push(Condition {
                degree: q,
                polynomial: derivative.coeff(w.word()),
                lyndon: w,
                rhs: Rational::zero(),
            });
        }
    }
    Ok(ConditionSystem::new(shape, p, entries))
}

/// Symbolic logarithm of a splitting product, truncated at the target order.
#[derive(Debug, Clone)]
pub struct BchExpansion {
    target_order: usize,
    /// `log(product) - (A + B)`
    defect: NCSeries,
}

impl BchExpansion {
    pub fn new(scheme: &SymbolicScheme, p: usize) -> Result<Self, OrderError> {
        check_order(p)?;
        let z = splitting_product(scheme, p).log()?;
        let defect = z.try_sub(&letter_sum(p))?;
        Ok(BchExpansion {
            target_order: p,
            defect,
        })
    }

    /// `log(product) - (A + B)`, truncated at `p`.
    pub fn defect(&self) -> &NCSeries {
        &self.defect
    }

    pub fn decompose(&self, q: usize) -> Result<crate::lyndon::LieDecomposition, OrderError> {
        Ok(lie_decompose(&self.defect.homogeneous_part(q)?, q)?)
    }

    pub fn conditions(&self, shape: SchemeShape) -> Result<ConditionSystem, OrderError> {
        let mut entries = Vec::new();
        for q in 1..=self.target_order {
            for (w, c) in self.decompose(q)?.iter() {
                entries.push(Condition {
                    degree: q,
                    lyndon: w.clone(),
                    polynomial: c.clone(),
                    rhs: Rational::zero(),
                });
            }
        }
        Ok(ConditionSystem::new(shape, self.target_order, entries))
    }
}

/// Order conditions from the BCH route: the Lyndon-basis coordinates of
/// `log(product) - (A + B)` in degrees `1..=p`.
///
/// A [`LyndonError::NotALieElement`] here would mean the logarithm is broken.
pub fn conditions_bch(shape: SchemeShape, p: usize) -> Result<ConditionSystem, OrderError> {
    BchExpansion::new(&SymbolicScheme::new(shape), p)?.conditions(shape)
}

pub fn conditions(
    shape: SchemeShape,
    p: usize,
    route: Route,
) -> Result<ConditionSystem, OrderError> {
    match route {
        Route::Taylor => conditions_taylor(shape, p),
        Route::Bch => conditions_bch(shape, p),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_arith::{rational, rational_int, SymbolId};

    fn a(j: u32) -> CoeffPoly {
        CoeffPoly::symbol(SymbolId::a(j))
    }

    fn b(j: u32) -> CoeffPoly {
        CoeffPoly::symbol(SymbolId::b(j))
    }

    fn k(n: i64, d: i64) -> CoeffPoly {
        CoeffPoly::constant(rational(n, d))
    }

    fn word(s: &str) -> Word {
        s.parse().unwrap()
    }

    fn shape(s: usize) -> SchemeShape {
        SchemeShape::new(s).unwrap()
    }

    fn concrete(a: &[Rational], b: &[Rational]) -> ConcreteScheme {
        ConcreteScheme::new(None, a.to_vec(), b.to_vec()).unwrap()
    }

    #[test]
    fn product_of_two_unit_exponentials() {
        let s = SymbolicScheme::from_concrete(&concrete(&[rational_int(1)], &[rational_int(1)]));
        let got = splitting_product(&s, 2);
        let want = NCSeries::from_terms(
            2,
            2,
            [
                (word(""), k(1, 1)),
                (word("A"), k(1, 1)),
                (word("B"), k(1, 1)),
                (word("AA"), k(1, 2)),
                (word("AB"), k(1, 1)),
                (word("BB"), k(1, 2)),
            ],
        )
        .unwrap();
        assert_eq!(got, want);
    }

    #[test]
    fn first_order_product_terms() {
        let p1 = splitting_product(&SymbolicScheme::new(shape(1)), 1);
        assert_eq!(p1.to_string(), "1 + a1*A + b1*B");
        let p2 = splitting_product(&SymbolicScheme::new(shape(2)), 1);
        assert_eq!(p2.coeff(&word("A")), &a(1) + &a(2));
        assert_eq!(p2.coeff(&word("B")), &b(1) + &b(2));
    }

    #[test]
    fn local_error_lie_trotter_second_degree() {
        let s = SymbolicScheme::from_concrete(&concrete(&[rational_int(1)], &[rational_int(1)]));
        let err = local_error_series(&s, 2);
        assert!(err.constant_term().is_zero());
        assert!(err.component(1).unwrap().is_empty());
        assert_eq!(err.coeff(&word("AB")), k(1, 2));
        assert_eq!(err.coeff(&word("BA")), k(-1, 2));
        assert!(err.coeff(&word("AA")).is_zero());
    }

    #[test]
    fn taylor_first_and_second_derivative() {
        let s = SymbolicScheme::new(shape(3));
        let d1 = taylor_derivative(&s, 1);
        assert_eq!(d1.coeff(&word("A")), &(&(&a(1) + &a(2)) + &a(3)) - &k(1, 1));
        assert_eq!(d1.coeff(&word("B")), &(&(&b(1) + &b(2)) + &b(3)) - &k(1, 1));
        let d2 = taylor_derivative(&s, 2);
        let two = rational_int(2);
        let ba =
            &(&(&a(2) * &b(1)).scale(&two) + &(&a(3) * &(&b(1) + &b(2))).scale(&two)) - &k(1, 1);
        assert_eq!(d2.coeff(&word("BA")), ba);
        let asum = &(&a(1) + &a(2)) + &a(3);
        assert_eq!(d2.coeff(&word("AA")), &asum.pow(2) - &k(1, 1));
        let bsum = &(&b(1) + &b(2)) + &b(3);
        let ab = &(&(&(&a(1) * &bsum).scale(&two) + &(&a(2) * &(&b(2) + &b(3))).scale(&two))
            + &(&a(3) * &b(3)).scale(&two))
            - &k(1, 1);
        assert_eq!(d2.coeff(&word("AB")), ab);
        assert!(taylor_derivative(&s, 0).is_zero());
    }

    #[test]
    fn taylor_conditions_first_order() {
        let sys = conditions_taylor(shape(3), 1).unwrap();
        let polys: Vec<String> = sys
            .entries()
            .iter()
            .map(|c| c.polynomial.to_string())
            .collect();
        assert_eq!(polys, ["a1 + a2 + a3 - 1", "b1 + b2 + b3 - 1"]);
    }

    #[test]
    fn taylor_system_shape_two_three() {
        let sys = conditions_taylor(shape(2), 3).unwrap();
        let degrees: Vec<usize> = sys.entries().iter().map(|c| c.degree).collect();
        assert_eq!(degrees, [1, 1, 2, 3, 3]);
        let words: Vec<String> = sys.entries().iter().map(|c| c.lyndon.to_string()).collect();
        assert_eq!(words, ["A", "B", "AB", "AAB", "ABB"]);
    }

    #[test]
    fn bch_conditions_two_stage_second_order() {
        let sys = conditions_bch(shape(2), 2).unwrap();
        let ab = &sys.entries()[2];
        assert_eq!(ab.lyndon.to_string(), "AB");
        let want = (&(&(&(&a(1) * &b(1)) + &(&a(2) * &b(2))) + &(&a(1) * &b(2)))
            - &(&a(2) * &b(1)))
            .scale(&rational(1, 2));
        assert_eq!(ab.polynomial, want);
    }

    #[test]
    fn bch_conditions_single_stage() {
        let sys = conditions_bch(shape(1), 3).unwrap();
        let polys: Vec<CoeffPoly> = sys.entries().iter().map(|c| c.polynomial.clone()).collect();
        let a1 = a(1);
        let b1 = b(1);
        let want = vec![
            &a1 - &k(1, 1),
            &b1 - &k(1, 1),
            (&a1 * &b1).scale(&rational(1, 2)),
            (&(&a1 * &a1) * &b1).scale(&rational(1, 12)),
            (&(&a1 * &b1) * &b1).scale(&rational(1, 12)),
        ];
        assert_eq!(polys, want);
        assert!(sys.entries().iter().all(|c| c.rhs.is_zero()));
    }

    #[test]
    fn order_zero_rejected() {
        assert_eq!(
            conditions_taylor(shape(2), 0),
            Err(OrderError::InvalidOrder)
        );
        assert_eq!(conditions_bch(shape(2), 0), Err(OrderError::InvalidOrder));
    }

    #[test]
    fn compositions_enumerate_all() {
        assert_eq!(compositions(2, 2), vec![vec![0, 2], vec![1, 1], vec![2, 0]]);
        assert_eq!(compositions(3, 3).len(), 10);
        assert_eq!(compositions(0, 3), vec![vec![0, 0, 0]]);
    }

    #[test]
    fn records_render_strings() {
        let sys = conditions_bch(shape(1), 2).unwrap();
        let recs = sys.records();
        assert_eq!(recs[2].polynomial, "1/2*a1*b1");
        assert_eq!(recs[2].lyndon, "AB");
        assert_eq!(recs[2].rhs, "0");
        assert_eq!(recs[0].order, 1);
    }

    #[test]
    fn route_parse() {
        assert_eq!("bch".parse::<Route>().unwrap(), Route::Bch);
        assert_eq!(Route::Taylor.to_string(), "taylor");
        assert!("magnus".parse::<Route>().is_err());
    }
}
