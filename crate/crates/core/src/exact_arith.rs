//! Exact rational scalars and the commutative polynomial ring in the stage
//! symbols `a1, b1, a2, b2, ...`.
//!
//! Everything symbolic in this crate is computed over [`Rational`]; there is
//! no floating point anywhere in this module.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

/// Arbitrary-precision rational, always kept in lowest terms with a positive
/// denominator.
pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArithError {
    #[error("no value assigned to symbol {0}")]
    MissingAssignment(SymbolId),
    #[error("cannot parse rational {0:?}")]
    BadRational(String),
    #[error("cannot parse symbol {0:?}")]
    BadSymbol(String),
}

/// Builds `numer/denom` in canonical form. Panics on a zero denominator.
pub fn rational(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn rational_int(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

/// Parses `"p/q"` or an integer literal. Surrounding whitespace is ignored.
pub fn parse_rational(text: &str) -> Result<Rational, ArithError> {
    let trimmed = text.trim();
    if trimmed.is_empty() {
        return Err(ArithError::BadRational(text.to_string()));
    }
    Rational::from_str(trimmed).map_err(|_| ArithError::BadRational(text.to_string()))
}

/// Renders `p/q`, omitting `/1`.
pub fn format_rational(value: &Rational) -> String {
    value.to_string()
}

/// Which coefficient family a symbol belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SymbolKind {
    A,
    B,
}

/// One stage coefficient, `a_j` or `b_j` with `j >= 1`.
///
/// The derived order is `a1 < b1 < a2 < b2 < ...` (stage first, then kind).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SymbolId {
    pub stage: u32,
    pub kind: SymbolKind,
}

impl SymbolId {
    pub fn a(stage: u32) -> Self {
        assert!(stage >= 1, "stages are numbered from 1");
        SymbolId {
            stage,
            kind: SymbolKind::A,
        }
    }

    pub fn b(stage: u32) -> Self {
        assert!(stage >= 1, "stages are numbered from 1");
        SymbolId {
            stage,
            kind: SymbolKind::B,
        }
    }
}

impl fmt::Display for SymbolId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self.kind {
            SymbolKind::A => 'a',
            SymbolKind::B => 'b',
        };
        write!(f, "{c}{}", self.stage)
    }
}

impl FromStr for SymbolId {
    type Err = ArithError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ArithError::BadSymbol(s.to_string());
        let mut chars = s.chars();
        let kind = match chars.next() {
            Some('a') => SymbolKind::A,
            Some('b') => SymbolKind::B,
            _ => return Err(bad()),
        };
        let stage: u32 = chars.as_str().parse().map_err(|_| bad())?;
        if stage == 0 {
            return Err(bad());
        }
        Ok(SymbolId { stage, kind })
    }
}

/// A power product of stage symbols. Zero exponents are never stored.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Monomial {
    exponents: BTreeMap<SymbolId, u32>,
}

impl Monomial {
    pub fn one() -> Self {
        Monomial::default()
    }

    pub fn symbol(sym: SymbolId) -> Self {
        Self::power(sym, 1)
    }

    pub fn power(sym: SymbolId, exponent: u32) -> Self {
        let mut exponents = BTreeMap::new();
        if exponent > 0 {
            exponents.insert(sym, exponent);
        }
        Monomial { exponents }
    }

    pub fn from_exponents<I: IntoIterator<Item = (SymbolId, u32)>>(items: I) -> Self {
        let mut m = Monomial::one();
        for (sym, e) in items {
            if e > 0 {
                *m.exponents.entry(sym).or_insert(0) += e;
            }
        }
        m
    }

    pub fn degree(&self) -> u32 {
        self.exponents.values().sum()
    }

    pub fn is_one(&self) -> bool {
        self.exponents.is_empty()
    }

    pub fn exponent(&self, sym: SymbolId) -> u32 {
        self.exponents.get(&sym).copied().unwrap_or(0)
    }

    /// `(symbol, exponent)` pairs in symbol order; every exponent is positive.
    pub fn exponents(&self) -> impl Iterator<Item = (SymbolId, u32)> + '_ {
        self.exponents.iter().map(|(s, e)| (*s, *e))
    }

    fn times(&self, other: &Monomial) -> Monomial {
        let mut exponents = self.exponents.clone();
        for (sym, e) in &other.exponents {
            *exponents.entry(*sym).or_insert(0) += e;
        }
        Monomial { exponents }
    }

    fn eval(&self, point: &BTreeMap<SymbolId, Rational>) -> Result<Rational, ArithError> {
        let mut acc = Rational::one();
        for (sym, e) in &self.exponents {
            let v = point.get(sym).ok_or(ArithError::MissingAssignment(*sym))?;
            acc *= num_traits::pow(v.clone(), *e as usize);
        }
        Ok(acc)
    }
}

/// Graded order: higher total degree first, then the larger exponent of the
/// earliest symbol (`a1, b1, a2, ...`) first. `Less` means "printed first".
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        match other.degree().cmp(&self.degree()) {
            Ordering::Equal => {}
            ord => return ord,
        }
        let mut lhs = self.exponents.iter().peekable();
        let mut rhs = other.exponents.iter().peekable();
        loop {
            match (lhs.peek(), rhs.peek()) {
                (None, None) => return Ordering::Equal,
                (Some(_), None) => return Ordering::Less,
                (None, Some(_)) => return Ordering::Greater,
                (Some((ls, le)), Some((rs, re))) => match ls.cmp(rs) {
                    Ordering::Less => return Ordering::Less,
                    Ordering::Greater => return Ordering::Greater,
                    Ordering::Equal => {
                        if le != re {
                            return re.cmp(le);
                        }
                        lhs.next();
                        rhs.next();
                    }
                },
            }
        }
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_one() {
            return write!(f, "1");
        }
        // a-factors before b-factors, as in a2*b1
        let mut factors: Vec<_> = self.exponents.iter().collect();
        factors.sort_by_key(|(sym, _)| (sym.kind, sym.stage));
        let mut first = true;
        for (sym, e) in factors {
            if !first {
                write!(f, "*")?;
            }
            first = false;
            if *e == 1 {
                write!(f, "{sym}")?;
            } else {
                write!(f, "{sym}^{e}")?;
            }
        }
        Ok(())
    }
}

/// Multivariate polynomial over [`Rational`] in the stage symbols.
///
/// Terms are kept in the canonical monomial order and zero coefficients are
/// never stored, so structural equality is polynomial equality.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct CoeffPoly {
    terms: BTreeMap<Monomial, Rational>,
}

impl CoeffPoly {
    pub fn zero() -> Self {
        CoeffPoly::default()
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn constant(value: Rational) -> Self {
        Self::term(Monomial::one(), value)
    }

    pub fn symbol(sym: SymbolId) -> Self {
        Self::term(Monomial::symbol(sym), Rational::one())
    }

    pub fn term(monomial: Monomial, coeff: Rational) -> Self {
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            terms.insert(monomial, coeff);
        }
        CoeffPoly { terms }
    }

    pub fn from_terms<I: IntoIterator<Item = (Monomial, Rational)>>(items: I) -> Self {
        let mut p = CoeffPoly::zero();
        for (m, c) in items {
            p.add_term(m, c);
        }
        p
    }

    /// True iff every coefficient vanishes. Zero coefficients are never
    /// stored, so this is just an emptiness test.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(Monomial::is_one)
    }

    /// The constant coefficient (coefficient of the empty monomial).
    pub fn constant_term(&self) -> Rational {
        self.terms
            .get(&Monomial::one())
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn coefficient(&self, monomial: &Monomial) -> Rational {
        self.terms
            .get(monomial)
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    /// Terms in canonical order.
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    /// Every symbol occurring with a positive exponent.
    pub fn symbols(&self) -> Vec<SymbolId> {
        let mut out: Vec<SymbolId> = self
            .terms
            .keys()
            .flat_map(|m| m.exponents().map(|(s, _)| s))
            .collect();
        out.sort();
        out.dedup();
        out
    }

    pub fn add_term(&mut self, monomial: Monomial, coeff: Rational) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.get_mut(&monomial) {
            Some(c) => {
                *c += coeff;
                if c.is_zero() {
                    self.terms.remove(&monomial);
                }
            }
            None => {
                self.terms.insert(monomial, coeff);
            }
        }
    }

    pub fn scale(&self, factor: &Rational) -> CoeffPoly {
        if factor.is_zero() {
            return CoeffPoly::zero();
        }
        CoeffPoly {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), c * factor))
                .collect(),
        }
    }

    pub fn pow(&self, exponent: u32) -> CoeffPoly {
        let mut acc = CoeffPoly::one();
        for _ in 0..exponent {
            acc = &acc * self;
        }
        acc
    }

    /// Exact value at `point`; every symbol of `self` must be assigned.
    pub fn eval(&self, point: &BTreeMap<SymbolId, Rational>) -> Result<Rational, ArithError> {
        let mut acc = Rational::zero();
        for (m, c) in &self.terms {
            acc += c * m.eval(point)?;
        }
        Ok(acc)
    }

    /// Replaces the assigned symbols by their values and keeps the rest.
    pub fn substitute(&self, point: &BTreeMap<SymbolId, Rational>) -> CoeffPoly {
        let mut out = CoeffPoly::zero();
        for (m, c) in &self.terms {
            let mut coeff = c.clone();
            let mut rest = Monomial::one();
            for (sym, e) in m.exponents() {
                match point.get(&sym) {
                    Some(v) => coeff *= num_traits::pow(v.clone(), e as usize),
                    None => {
                        rest.exponents.insert(sym, e);
                    }
                }
            }
            out.add_term(rest, coeff);
        }
        out
    }
}

impl From<Rational> for CoeffPoly {
    fn from(value: Rational) -> Self {
        CoeffPoly::constant(value)
    }
}

impl From<SymbolId> for CoeffPoly {
    fn from(sym: SymbolId) -> Self {
        CoeffPoly::symbol(sym)
    }
}

impl<'a> Add<&'a CoeffPoly> for &'a CoeffPoly {
    type Output = CoeffPoly;

    fn add(self, rhs: &'a CoeffPoly) -> CoeffPoly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl<'a> Sub<&'a CoeffPoly> for &'a CoeffPoly {
    type Output = CoeffPoly;

    fn sub(self, rhs: &'a CoeffPoly) -> CoeffPoly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c);
        }
        out
    }
}

impl<'a> Mul<&'a CoeffPoly> for &'a CoeffPoly {
    type Output = CoeffPoly;

    fn mul(self, rhs: &'a CoeffPoly) -> CoeffPoly {
        let mut out = CoeffPoly::zero();
        for (lm, lc) in &self.terms {
            for (rm, rc) in &rhs.terms {
                out.add_term(lm.times(rm), lc * rc);
            }
        }
        out
    }
}

impl Neg for &CoeffPoly {
    type Output = CoeffPoly;

    fn neg(self) -> CoeffPoly {
        CoeffPoly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

macro_rules! forward_owned_binop {
    ($trait:ident, $method:ident) => {
        impl $trait<CoeffPoly> for CoeffPoly {
            type Output = CoeffPoly;
            fn $method(self, rhs: CoeffPoly) -> CoeffPoly {
                (&self).$method(&rhs)
            }
        }
        impl<'a> $trait<&'a CoeffPoly> for CoeffPoly {
            type Output = CoeffPoly;
            fn $method(self, rhs: &'a CoeffPoly) -> CoeffPoly {
                (&self).$method(rhs)
            }
        }
    };
}

forward_owned_binop!(Add, add);
forward_owned_binop!(Sub, sub);
forward_owned_binop!(Mul, mul);

impl Neg for CoeffPoly {
    type Output = CoeffPoly;

    fn neg(self) -> CoeffPoly {
        -&self
    }
}

/// `1/2*a1*b2 - a2*b1`: canonical term order, unit coefficients omitted.
impl fmt::Display for CoeffPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            let magnitude = c.abs();
            if i == 0 {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            if m.is_one() {
                write!(f, "{magnitude}")?;
            } else if magnitude.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{magnitude}*{m}")?;
            }
        }
        Ok(())
    }
}
