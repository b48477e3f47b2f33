use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;

use super::OrderError;
use crate::exact_arith::{CoeffPoly, Rational, SymbolId};

/// Number of stages `s` of a product `e^{a1 A} e^{b1 B} ... e^{as A} e^{bs B}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SchemeShape {
    stages: usize,
}

impl SchemeShape {
    pub fn new(stages: usize) -> Result<Self, OrderError> {
        if stages == 0 {
            return Err(OrderError::InvalidScheme(
                "a scheme needs at least one stage".into(),
            ));
        }
        Ok(SchemeShape { stages })
    }

    pub fn stages(&self) -> usize {
        self.stages
    }
}

/// Stage coefficients as polynomials; `SymbolicScheme::new` uses the bare
/// symbols `a_j`, `b_j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolicScheme {
    shape: SchemeShape,
    a: Vec<CoeffPoly>,
    b: Vec<CoeffPoly>,
}

impl SymbolicScheme {
    pub fn new(shape: SchemeShape) -> Self {
        let stages = 1..=shape.stages() as u32;
        SymbolicScheme {
            shape,
            a: stages
                .clone()
                .map(|j| CoeffPoly::symbol(SymbolId::a(j)))
                .collect(),
            b: stages.map(|j| CoeffPoly::symbol(SymbolId::b(j))).collect(),
        }
    }

    /// Concrete coefficients lifted to constant polynomials.
    pub fn from_concrete(scheme: &ConcreteScheme) -> Self {
        SymbolicScheme {
            shape: scheme.shape(),
            a: scheme.a.iter().cloned().map(CoeffPoly::constant).collect(),
            b: scheme.b.iter().cloned().map(CoeffPoly::constant).collect(),
        }
    }

    pub fn shape(&self) -> SchemeShape {
        self.shape
    }

    pub fn a(&self) -> &[CoeffPoly] {
        &self.a
    }

    pub fn b(&self) -> &[CoeffPoly] {
        &self.b
    }
}

/// A scheme with rational stage coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConcreteScheme {
    name: Option<String>,
    a: Vec<Rational>,
    b: Vec<Rational>,
}

impl ConcreteScheme {
    pub fn new(
        name: Option<String>,
        a: Vec<Rational>,
        b: Vec<Rational>,
    ) -> Result<Self, OrderError> {
        if a.len() != b.len() {
            return Err(OrderError::InvalidScheme(format!(
                "{} a-coefficients but {} b-coefficients",
                a.len(),
                b.len()
            )));
        }
        if a.is_empty() {
            return Err(OrderError::InvalidScheme(
                "a scheme needs at least one stage".into(),
            ));
        }
        Ok(ConcreteScheme { name, a, b })
    }

    pub fn named(name: &str, a: Vec<Rational>, b: Vec<Rational>) -> Result<Self, OrderError> {
        Self::new(Some(name.to_string()), a, b)
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    /// The name, or `"unnamed"`.
    pub fn label(&self) -> &str {
        self.name.as_deref().unwrap_or("unnamed")
    }

    pub fn shape(&self) -> SchemeShape {
        SchemeShape {
            stages: self.a.len(),
        }
    }

    pub fn stages(&self) -> usize {
        self.a.len()
    }

    pub fn a(&self) -> &[Rational] {
        &self.a
    }

    pub fn b(&self) -> &[Rational] {
        &self.b
    }

    /// The same product with trailing zero stages, which contribute identity
    /// factors. Fails if `stages` is smaller than the current stage count.
    pub fn padded(&self, stages: usize) -> Result<Self, OrderError> {
        if stages < self.stages() {
            return Err(OrderError::StageMismatch {
                expected: stages,
                found: self.stages(),
            });
        }
        let mut a = self.a.clone();
        let mut b = self.b.clone();
        a.resize(stages, Rational::zero());
        b.resize(stages, Rational::zero());
        Ok(ConcreteScheme {
            name: self.name.clone(),
            a,
            b,
        })
    }

    /// Assignment `a_j -> a[j-1]`, `b_j -> b[j-1]` for polynomial evaluation.
    pub fn point(&self) -> BTreeMap<SymbolId, Rational> {
        let mut out = BTreeMap::new();
        for (j, (aj, bj)) in self.a.iter().zip(&self.b).enumerate() {
            out.insert(SymbolId::a(j as u32 + 1), aj.clone());
            out.insert(SymbolId::b(j as u32 + 1), bj.clone());
        }
        out
    }
}

impl fmt::Display for ConcreteScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[Rational]| {
            v.iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join(", ")
        };
        write!(
            f,
            "{} (a = [{}], b = [{}])",
            self.label(),
            join(&self.a),
            join(&self.b)
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_arith::{rational, rational_int};

    #[test]
    fn rejects_bad_shapes() {
        assert!(SchemeShape::new(0).is_err());
        assert!(ConcreteScheme::new(None, vec![rational_int(1)], vec![]).is_err());
        assert!(ConcreteScheme::new(None, vec![], vec![]).is_err());
    }

    #[test]
    fn padding_appends_zero_stages() {
        let lt = ConcreteScheme::named("lie-trotter", vec![rational_int(1)], vec![rational_int(1)])
            .unwrap();
        let padded = lt.padded(3).unwrap();
        assert_eq!(
            padded.a(),
            &[rational_int(1), rational_int(0), rational_int(0)]
        );
        assert_eq!(padded.point().len(), 6);
        assert!(padded.padded(2).is_err());
    }

    #[test]
    fn symbolic_uses_stage_symbols() {
        let s = SymbolicScheme::new(SchemeShape::new(2).unwrap());
        assert_eq!(s.a()[1].to_string(), "a2");
        assert_eq!(s.b()[0].to_string(), "b1");
        let c = ConcreteScheme::new(None, vec![rational(1, 2)], vec![rational_int(1)]).unwrap();
        assert_eq!(SymbolicScheme::from_concrete(&c).a()[0].to_string(), "1/2");
    }
}
