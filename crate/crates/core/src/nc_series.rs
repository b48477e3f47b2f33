//! Truncated formal power series in non-commuting letters.
//!
//! A series is stored by homogeneous component: `parts[j]` holds the words of
//! length `j`. In a splitting product every letter carries exactly one factor
//! of the step size, so word length doubles as the power of `t` and
//! "vanishes through degree p" is the same statement as `O(t^{p+1})`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_traits::One;
use thiserror::Error;

use crate::exact_arith::{ArithError, CoeffPoly, Rational, SymbolId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SeriesError {
    #[error("truncation mismatch: {left} vs {right}")]
    TruncationMismatch { left: usize, right: usize },
    #[error("alphabet mismatch: {left} vs {right} letters")]
    AlphabetMismatch { left: usize, right: usize },
    #[error("exponential needs a series without constant term")]
    NonzeroConstantTerm,
    #[error("logarithm needs a series with constant term 1")]
    ConstantTermNotOne,
    #[error("degree {degree} exceeds truncation degree {truncation}")]
    DegreeBeyondTruncation { degree: usize, truncation: usize },
    #[error("letter {letter} outside an alphabet of {alphabet} letters")]
    LetterOutOfRange { letter: u8, alphabet: usize },
    #[error("cannot parse word {0:?}")]
    BadWord(String),
    #[error(transparent)]
    Arith(#[from] ArithError),
}

/// A generator of the free algebra. Index 0 renders as `A`, 1 as `B`, ...
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter(pub u8);

impl Letter {
    pub const A: Letter = Letter(0);
    pub const B: Letter = Letter(1);

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", (b'A' + self.0) as char)
    }
}

/// A finite sequence of letters. The derived order is plain lexicographic
/// order, in which a proper prefix sorts first.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn new(letters: Vec<Letter>) -> Self {
        Word(letters)
    }

    pub fn single(letter: Letter) -> Self {
        Word(vec![letter])
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut letters = Vec::with_capacity(self.0.len() + other.0.len());
        letters.extend_from_slice(&self.0);
        letters.extend_from_slice(&other.0);
        Word(letters)
    }

    fn max_letter(&self) -> Option<Letter> {
        self.0.iter().copied().max()
    }
}

impl From<Vec<Letter>> for Word {
    fn from(letters: Vec<Letter>) -> Self {
        Word(letters)
    }
}

impl FromStr for Word {
    type Err = SeriesError;

    /// Parses upper-case letter strings such as `"AAB"`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.bytes()
            .map(|c| {
                if c.is_ascii_uppercase() {
                    Ok(Letter(c - b'A'))
                } else {
                    Err(SeriesError::BadWord(s.to_string()))
                }
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Word)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.0 {
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

/// Homogeneous block of a series: word -> nonzero coefficient.
pub type Component = BTreeMap<Word, CoeffPoly>;

fn accumulate(target: &mut Component, word: Word, coeff: CoeffPoly) {
    if coeff.is_zero() {
        return;
    }
    match target.get_mut(&word) {
        Some(c) => {
            *c = &*c + &coeff;
            if c.is_zero() {
                target.remove(&word);
            }
        }
        None => {
            target.insert(word, coeff);
        }
    }
}

/// Truncated series in `alphabet` non-commuting letters with [`CoeffPoly`]
/// coefficients, holding every word of length `<= truncation`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NCSeries {
    alphabet: usize,
    truncation: usize,
    parts: Vec<Component>,
}

impl NCSeries {
    pub fn zero(alphabet: usize, truncation: usize) -> Self {
        NCSeries {
            alphabet,
            truncation,
            parts: vec![Component::new(); truncation + 1],
        }
    }

    pub fn one(alphabet: usize, truncation: usize) -> Self {
        Self::constant(alphabet, truncation, CoeffPoly::one())
    }

    pub fn constant(alphabet: usize, truncation: usize, value: CoeffPoly) -> Self {
        let mut s = Self::zero(alphabet, truncation);
        accumulate(&mut s.parts[0], Word::empty(), value);
        s
    }

    /// `coeff * letter`. A truncation of 0 yields the zero series.
    pub fn letter(
        alphabet: usize,
        truncation: usize,
        letter: Letter,
        coeff: CoeffPoly,
    ) -> Result<Self, SeriesError> {
        let mut s = Self::zero(alphabet, truncation);
        if truncation >= 1 {
            s.add_term(Word::single(letter), coeff)?;
        } else {
            s.check_letters(&Word::single(letter))?;
        }
        Ok(s)
    }

    pub fn monomial(
        alphabet: usize,
        truncation: usize,
        word: Word,
        coeff: CoeffPoly,
    ) -> Result<Self, SeriesError> {
        let mut s = Self::zero(alphabet, truncation);
        s.add_term(word, coeff)?;
        Ok(s)
    }

    pub fn from_terms<I>(alphabet: usize, truncation: usize, terms: I) -> Result<Self, SeriesError>
    where
        I: IntoIterator<Item = (Word, CoeffPoly)>,
    {
        let mut s = Self::zero(alphabet, truncation);
        for (w, c) in terms {
            s.add_term(w, c)?;
        }
        Ok(s)
    }

    /// Adds `coeff * word` in place. Words longer than the truncation degree
    /// are rejected rather than dropped.
    pub fn add_term(&mut self, word: Word, coeff: CoeffPoly) -> Result<(), SeriesError> {
        self.check_letters(&word)?;
        let degree = word.degree();
        if degree > self.truncation {
            return Err(SeriesError::DegreeBeyondTruncation {
                degree,
                truncation: self.truncation,
            });
        }
        accumulate(&mut self.parts[degree], word, coeff);
        Ok(())
    }

    fn check_letters(&self, word: &Word) -> Result<(), SeriesError> {
        match word.max_letter() {
            Some(l) if l.index() >= self.alphabet => Err(SeriesError::LetterOutOfRange {
                letter: l.0,
                alphabet: self.alphabet,
            }),
            _ => Ok(()),
        }
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn coeff(&self, word: &Word) -> CoeffPoly {
        self.parts
            .get(word.degree())
            .and_then(|p| p.get(word))
            .cloned()
            .unwrap_or_default()
    }

    pub fn constant_term(&self) -> CoeffPoly {
        self.coeff(&Word::empty())
    }

    /// Degree-`j` block of the series.
    pub fn component(&self, j: usize) -> Result<&Component, SeriesError> {
        self.parts
            .get(j)
            .ok_or(SeriesError::DegreeBeyondTruncation {
                degree: j,
                truncation: self.truncation,
            })
    }

    /// The series restricted to words of length exactly `j`.
    pub fn homogeneous_part(&self, j: usize) -> Result<NCSeries, SeriesError> {
        let block = self.component(j)?.clone();
        let mut out = Self::zero(self.alphabet, self.truncation);
        out.parts[j] = block;
        Ok(out)
    }

    /// All nonzero terms, by degree and then lexicographically.
    pub fn terms(&self) -> impl Iterator<Item = (&Word, &CoeffPoly)> {
        self.parts.iter().flat_map(|p| p.iter())
    }

    pub fn is_zero(&self) -> bool {
        self.parts.iter().all(BTreeMap::is_empty)
    }

    /// Smallest degree carrying a nonzero coefficient.
    pub fn lowest_degree(&self) -> Option<usize> {
        self.parts.iter().position(|p| !p.is_empty())
    }

    /// Re-truncates explicitly: drops words above `truncation`, or widens the
    /// working degree with empty components.
    pub fn with_truncation(&self, truncation: usize) -> NCSeries {
        let mut parts = self.parts.clone();
        parts.resize(truncation + 1, Component::new());
        NCSeries {
            alphabet: self.alphabet,
            truncation,
            parts,
        }
    }

    fn check_compatible(&self, other: &NCSeries) -> Result<(), SeriesError> {
        if self.truncation != other.truncation {
            return Err(SeriesError::TruncationMismatch {
                left: self.truncation,
                right: other.truncation,
            });
        }
        if self.alphabet != other.alphabet {
            return Err(SeriesError::AlphabetMismatch {
                left: self.alphabet,
                right: other.alphabet,
            });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &NCSeries) -> Result<NCSeries, SeriesError> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (j, block) in other.parts.iter().enumerate() {
            for (w, c) in block {
                accumulate(&mut out.parts[j], w.clone(), c.clone());
            }
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &NCSeries) -> Result<NCSeries, SeriesError> {
        self.try_add(&other.neg())
    }

    pub fn neg(&self) -> NCSeries {
        self.map_coefficients(|c| -c)
    }

    pub fn scale(&self, factor: &CoeffPoly) -> NCSeries {
        self.map_coefficients(|c| c * factor)
    }

    pub fn scale_rational(&self, factor: &Rational) -> NCSeries {
        self.map_coefficients(|c| c.scale(factor))
    }

    /// Applies `f` to every coefficient, dropping results that vanish.
    pub fn map_coefficients<F: Fn(&CoeffPoly) -> CoeffPoly>(&self, f: F) -> NCSeries {
        let parts = self
            .parts
            .iter()
            .map(|block| {
                block
                    .iter()
                    .filter_map(|(w, c)| {
                        let v = f(c);
                        (!v.is_zero()).then(|| (w.clone(), v))
                    })
                    .collect()
            })
            .collect();
        NCSeries {
            alphabet: self.alphabet,
            truncation: self.truncation,
            parts,
        }
    }

    /// Substitutes values for (some of) the stage symbols in every coefficient.
    pub fn substitute(&self, point: &BTreeMap<SymbolId, Rational>) -> NCSeries {
        self.map_coefficients(|c| c.substitute(point))
    }

    /// Truncated product: the coefficient of `w` is the sum of
    /// `self[u] * other[v]` over all splittings `w = uv`.
    pub fn try_mul(&self, other: &NCSeries) -> Result<NCSeries, SeriesError> {
        self.check_compatible(other)?;
        let mut out = Self::zero(self.alphabet, self.truncation);
        for (i, left) in self.parts.iter().enumerate() {
            if left.is_empty() {
                continue;
            }
            for (j, right) in other.parts.iter().enumerate().take(self.truncation + 1 - i) {
                for (u, cu) in left {
                    for (v, cv) in right {
                        accumulate(&mut out.parts[i + j], u.concat(v), cu * cv);
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn pow(&self, exponent: u32) -> Result<NCSeries, SeriesError> {
        let mut acc = Self::one(self.alphabet, self.truncation);
        for _ in 0..exponent {
            acc = acc.try_mul(self)?;
        }
        Ok(acc)
    }

    /// `sum_{j<=N} self^j / j!`, evaluated Horner style as
    /// `1 + g(1 + g/2(1 + g/3(...)))`.
    pub fn exp(&self) -> Result<NCSeries, SeriesError> {
        if !self.constant_term().is_zero() {
            return Err(SeriesError::NonzeroConstantTerm);
        }
        let one = Self::one(self.alphabet, self.truncation);
        let mut acc = one.clone();
        for k in (1..=self.truncation).rev() {
            let step = self
                .try_mul(&acc)?
                .scale_rational(&Rational::new(1.into(), k.into()));
            acc = one.try_add(&step)?;
        }
        Ok(acc)
    }

    /// `sum_{j<=N} (-1)^{j+1} (f-1)^j / j`, evaluated Horner style.
    pub fn log(&self) -> Result<NCSeries, SeriesError> {
        let c0 = self.constant_term();
        if !c0.is_constant() || !c0.constant_term().is_one() {
            return Err(SeriesError::ConstantTermNotOne);
        }
        let h = self.try_sub(&Self::one(self.alphabet, self.truncation))?;
        if self.truncation == 0 {
            return Ok(h);
        }
        let coeff = |j: usize| {
            let sign = if j % 2 == 1 { 1 } else { -1 };
            Rational::new(sign.into(), j.into())
        };
        let unit =
            |r: Rational| Self::constant(self.alphabet, self.truncation, CoeffPoly::constant(r));
        let mut acc = unit(coeff(self.truncation));
        for j in (1..self.truncation).rev() {
            acc = unit(coeff(j)).try_add(&h.try_mul(&acc)?)?;
        }
        h.try_mul(&acc)
    }
}

fn needs_parens(c: &CoeffPoly) -> bool {
    c.len() > 1
}

/// `1 + a1*A + 1/2*a1^2*AA`: terms by degree then lexicographically.
impl fmt::Display for NCSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (w, c) in self.terms() {
            let text = c.to_string();
            let (negative, body) = match text.strip_prefix('-') {
                Some(rest) if !needs_parens(c) => (true, rest.to_string()),
                _ => (false, text),
            };
            if first {
                if negative {
                    write!(f, "-")?;
                }
            } else if negative {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            first = false;
            if w.is_empty() {
                if needs_parens(c) {
                    write!(f, "({body})")?;
                } else {
                    write!(f, "{body}")?;
                }
            } else if body == "1" {
                write!(f, "{w}")?;
            } else if needs_parens(c) {
                write!(f, "({body})*{w}")?;
            } else {
                write!(f, "{body}*{w}")?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}
