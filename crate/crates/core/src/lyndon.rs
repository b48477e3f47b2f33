//! Lyndon words, their standard bracketing, and decomposition of homogeneous
//! Lie elements in the Lyndon basis.
//!
//! The bracketing of a Lyndon word `w` expands to `w + (lexicographically
//! larger words)`. Processing the Lyndon words of a degree in increasing order
//! therefore turns coefficient extraction into back-substitution through a
//! unit triangular system.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::exact_arith::{CoeffPoly, Rational};
use crate::nc_series::{Component, Letter, NCSeries, SeriesError, Word};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LyndonError {
    #[error("{0} is not a Lyndon word")]
    NotLyndon(Word),
    #[error("single-letter Lyndon word {0} has no standard factorization")]
    SingleLetter(Word),
    #[error("series is not homogeneous of degree {degree}")]
    NotHomogeneous { degree: usize },
    #[error("degree-{degree} element is not a Lie element; residual {residual}")]
    NotALieElement {
        degree: usize,
        residual: Box<NCSeries>,
    },
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// True iff `word` is nonempty and strictly smaller than each of its proper
/// cyclic rotations.
pub fn is_lyndon(word: &[Letter]) -> bool {
    let n = word.len();
    if n == 0 {
        return false;
    }
    (1..n).all(|k| {
        let rotated = word[k..].iter().chain(word[..k].iter());
        word.iter().lt(rotated)
    })
}

/// A word that has passed the Lyndon check.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LyndonWord(Word);

impl LyndonWord {
    pub fn new(word: Word) -> Result<Self, LyndonError> {
        if is_lyndon(word.letters()) {
            Ok(LyndonWord(word))
        } else {
            Err(LyndonError::NotLyndon(word))
        }
    }

    pub fn parse(text: &str) -> Result<Self, LyndonError> {
        Self::new(text.parse()?)
    }

    pub fn word(&self) -> &Word {
        &self.0
    }

    pub fn degree(&self) -> usize {
        self.0.degree()
    }
}

impl fmt::Display for LyndonWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// All Lyndon words of length `1..=max_degree` over `alphabet_size` letters,
/// in lexicographic order (Duval's generation algorithm).
pub fn generate_lyndon(alphabet_size: usize, max_degree: usize) -> Vec<LyndonWord> {
    let mut out = Vec::new();
    if alphabet_size == 0 || max_degree == 0 {
        return out;
    }
    let top = (alphabet_size - 1) as u8;
    let mut w: Vec<u8> = vec![0];
    loop {
        out.push(LyndonWord(Word::new(
            w.iter().copied().map(Letter).collect(),
        )));
        let period = w.len();
        while w.len() < max_degree {
            w.push(w[w.len() - period]);
        }
        while w.last() == Some(&top) {
            w.pop();
        }
        match w.last_mut() {
            Some(last) => *last += 1,
            None => break,
        }
    }
    out
}

/// Lyndon words of length exactly `degree`, in lexicographic order.
pub fn lyndon_words_of_degree(alphabet_size: usize, degree: usize) -> Vec<LyndonWord> {
    generate_lyndon(alphabet_size, degree)
        .into_iter()
        .filter(|w| w.degree() == degree)
        .collect()
}

/// `w = u v` with `v` the longest proper suffix of `w` that is Lyndon.
pub fn standard_factorization(w: &LyndonWord) -> Result<(LyndonWord, LyndonWord), LyndonError> {
    let letters = w.word().letters();
    if letters.len() < 2 {
        return Err(LyndonError::SingleLetter(w.word().clone()));
    }
    let split = (1..letters.len())
        .find(|&k| is_lyndon(&letters[k..]))
        .expect("the last letter is always a Lyndon suffix");
    let left = Word::new(letters[..split].to_vec());
    let right = Word::new(letters[split..].to_vec());
    debug_assert!(is_lyndon(left.letters()));
    Ok((LyndonWord(left), LyndonWord(right)))
}

/// A bracketed (non-associative) word: a letter or a commutator of two trees.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum BracketTree {
    Leaf(Letter),
    Bracket(Box<BracketTree>, Box<BracketTree>),
}

impl BracketTree {
    pub fn bracket(left: BracketTree, right: BracketTree) -> Self {
        BracketTree::Bracket(Box::new(left), Box::new(right))
    }

    pub fn degree(&self) -> usize {
        match self {
            BracketTree::Leaf(_) => 1,
            BracketTree::Bracket(l, r) => l.degree() + r.degree(),
        }
    }

    /// Left-to-right leaf sequence.
    pub fn foliage(&self) -> Word {
        let mut letters = Vec::with_capacity(self.degree());
        self.collect_leaves(&mut letters);
        Word::new(letters)
    }

    fn collect_leaves(&self, out: &mut Vec<Letter>) {
        match self {
            BracketTree::Leaf(l) => out.push(*l),
            BracketTree::Bracket(l, r) => {
                l.collect_leaves(out);
                r.collect_leaves(out);
            }
        }
    }

    /// Expansion with integer (rational) coefficients, `[x,y] = xy - yx`.
    pub fn expand_terms(&self) -> BTreeMap<Word, Rational> {
        match self {
            BracketTree::Leaf(l) => BTreeMap::from([(Word::single(*l), Rational::one())]),
            BracketTree::Bracket(l, r) => {
                let left = l.expand_terms();
                let right = r.expand_terms();
                let mut out: BTreeMap<Word, Rational> = BTreeMap::new();
                for (u, cu) in &left {
                    for (v, cv) in &right {
                        let c = cu * cv;
                        *out.entry(u.concat(v)).or_insert_with(Rational::zero) += &c;
                        *out.entry(v.concat(u)).or_insert_with(Rational::zero) -= &c;
                    }
                }
                out.retain(|_, c| !c.is_zero());
                out
            }
        }
    }

    /// The bracket expanded in the associative algebra, as a homogeneous
    /// series of degree `self.degree()`.
    pub fn expand(&self, alphabet: usize, truncation: usize) -> Result<NCSeries, LyndonError> {
        let degree = self.degree();
        if degree > truncation {
            return Err(SeriesError::DegreeBeyondTruncation { degree, truncation }.into());
        }
        let terms = self
            .expand_terms()
            .into_iter()
            .map(|(w, c)| (w, CoeffPoly::constant(c)));
        Ok(NCSeries::from_terms(alphabet, truncation, terms)?)
    }
}

/// `[A,[A,B]]`
impl fmt::Display for BracketTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BracketTree::Leaf(l) => write!(f, "{l}"),
            BracketTree::Bracket(l, r) => write!(f, "[{l},{r}]"),
        }
    }
}

/// Standard bracketing: a leaf for a letter, otherwise the commutator of the
/// bracketings of the standard factors.
pub fn bracketing(w: &LyndonWord) -> BracketTree {
    match standard_factorization(w) {
        Ok((u, v)) => BracketTree::bracket(bracketing(&u), bracketing(&v)),
        Err(_) => BracketTree::Leaf(w.word().letters()[0]),
    }
}

/// Coordinates of a homogeneous Lie element in the Lyndon basis. Every Lyndon
/// word of the degree is present, with a possibly zero coefficient.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LieDecomposition {
    degree: usize,
    alphabet: usize,
    coefficients: BTreeMap<LyndonWord, CoeffPoly>,
}

impl LieDecomposition {
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn coefficient(&self, w: &LyndonWord) -> CoeffPoly {
        self.coefficients.get(w).cloned().unwrap_or_default()
    }

    /// All `(word, coefficient)` pairs in lexicographic word order.
    pub fn iter(&self) -> impl Iterator<Item = (&LyndonWord, &CoeffPoly)> {
        self.coefficients.iter()
    }

    pub fn nonzero(&self) -> impl Iterator<Item = (&LyndonWord, &CoeffPoly)> {
        self.coefficients.iter().filter(|(_, c)| !c.is_zero())
    }

    pub fn is_zero(&self) -> bool {
        self.nonzero().next().is_none()
    }

    /// `sum_w coefficient(w) * expand(bracketing(w))`.
    pub fn reconstruct(&self, truncation: usize) -> Result<NCSeries, LyndonError> {
        let mut acc = NCSeries::zero(self.alphabet, truncation);
        for (w, c) in self.nonzero() {
            let term = bracketing(w).expand(self.alphabet, truncation)?.scale(c);
            acc = acc.try_add(&term)?;
        }
        Ok(acc)
    }
}

impl fmt::Display for LieDecomposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (w, c) in self.nonzero() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if c.len() > 1 {
                write!(f, "({c})*{}", bracketing(w))?;
            } else {
                write!(f, "{c}*{}", bracketing(w))?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// Expansion of `[[..[w1, w2], ..], wq]`.
fn left_normed_expansion(word: &Word) -> BTreeMap<Word, Rational> {
    let letters = word.letters();
    let mut acc: BTreeMap<Word, Rational> = BTreeMap::new();
    acc.insert(Word::new(letters[..1].to_vec()), Rational::one());
    for &x in &letters[1..] {
        let x = Word::single(x);
        let mut next: BTreeMap<Word, Rational> = BTreeMap::new();
        for (w, c) in &acc {
            *next.entry(w.concat(&x)).or_insert_with(Rational::zero) += c;
            *next.entry(x.concat(w)).or_insert_with(Rational::zero) -= c;
        }
        next.retain(|_, c| !c.is_zero());
        acc = next;
    }
    acc
}

/// `f - r(f)/q` for a homogeneous component of degree `q >= 1`.
fn non_lie_part(f: &Component, q: usize) -> Component {
    let mut out = f.clone();
    let inv_q = Rational::from_integer((q as i64).into()).recip();
    for (w, c) in f {
        for (v, e) in left_normed_expansion(w) {
            let delta = c.scale(&(e * &inv_q));
            let entry = out.entry(v.clone()).or_default();
            *entry = &*entry - &delta;
            if entry.is_zero() {
                out.remove(&v);
            }
        }
    }
    out
}

/// Writes a homogeneous degree-`q` element of the free associative algebra in
/// the Lyndon basis.
///
/// Fails with [`LyndonError::NotALieElement`] if the element is not a Lie
/// element. The residual is the non-Lie part `f - r(f)/q`, where `r` is the
/// left-normed bracketing map; `r(f) = q f` holds exactly for Lie elements.
pub fn lie_decompose(f: &NCSeries, q: usize) -> Result<LieDecomposition, LyndonError> {
    let mut residual: Component = f.component(q)?.clone();
    for j in 0..=f.truncation() {
        if j != q && !f.component(j)?.is_empty() {
            return Err(LyndonError::NotHomogeneous { degree: q });
        }
    }
    let mut coefficients = BTreeMap::new();
    for w in lyndon_words_of_degree(f.alphabet(), q) {
        let lambda = residual.get(w.word()).cloned().unwrap_or_default();
        if !lambda.is_zero() {
            for (word, c) in bracketing(&w).expand_terms() {
                let delta = lambda.scale(&c);
                let entry = residual.entry(word.clone()).or_default();
                *entry = &*entry - &delta;
                if entry.is_zero() {
                    residual.remove(&word);
                }
            }
        }
        coefficients.insert(w, lambda);
    }
    if !residual.is_empty() {
        let residual = non_lie_part(f.component(q)?, q);
        let residual = NCSeries::from_terms(f.alphabet(), f.truncation(), residual)?;
        return Err(LyndonError::NotALieElement {
            degree: q,
            residual: Box::new(residual),
        });
    }
    Ok(LieDecomposition {
        degree: q,
        alphabet: f.alphabet(),
        coefficients,
    })
}
