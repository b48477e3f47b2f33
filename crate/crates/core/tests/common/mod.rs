//! Oracles and generators shared by the integration tests.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_traits::{ToPrimitive, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use splitorder::exact_arith::{rational, CoeffPoly, Rational, SymbolId, SymbolKind};
use splitorder::nc_series::{NCSeries, Word};
use splitorder::order_conditions::{ConcreteScheme, ConditionSystem};

pub fn rng(seed: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(seed)
}

/// Small random rational, numerator in -9..=9 and denominator in 1..=7.
pub fn small_rational(rng: &mut ChaCha8Rng) -> Rational {
    rational(rng.random_range(-9..=9), rng.random_range(1..=7))
}

/// A random polynomial: a constant, optionally plus a multiple of `a1` or `b1`.
pub fn small_poly(rng: &mut ChaCha8Rng) -> CoeffPoly {
    let mut p = CoeffPoly::constant(small_rational(rng));
    if rng.random_bool(0.25) {
        let sym = if rng.random_bool(0.5) {
            SymbolId::a(1)
        } else {
            SymbolId::b(1)
        };
        p = &p + &CoeffPoly::symbol(sym).scale(&small_rational(rng));
    }
    p
}

fn all_words(min_len: usize, max_len: usize) -> Vec<Word> {
    let mut out = Vec::new();
    for len in min_len..=max_len {
        for bits in 0..(1u32 << len) {
            let s: String = (0..len)
                .map(|i| {
                    if bits >> (len - 1 - i) & 1 == 0 {
                        'A'
                    } else {
                        'B'
                    }
                })
                .collect();
            out.push(s.parse().unwrap());
        }
    }
    out
}

/// Sparse random series over {A, B} supported in degrees `min..=max`.
pub fn random_series(rng: &mut ChaCha8Rng, truncation: usize, min: usize, max: usize) -> NCSeries {
    let mut s = NCSeries::zero(2, truncation);
    if min > max {
        return s;
    }
    for w in all_words(min, max) {
        if rng.random_bool(0.2) {
            s.add_term(w, small_poly(rng)).unwrap();
        }
    }
    s
}

/// The degree-`j` parts of `s` for `j` in `range`, as a series.
pub fn parts(s: &NCSeries, range: std::ops::RangeInclusive<usize>) -> NCSeries {
    let mut out = NCSeries::zero(s.alphabet(), s.truncation());
    for j in range {
        out = out.try_add(&s.homogeneous_part(j).unwrap()).unwrap();
    }
    out
}

fn var_index(sym: SymbolId) -> usize {
    let base = 2 * (sym.stage as usize - 1);
    match sym.kind {
        SymbolKind::A => base,
        SymbolKind::B => base + 1,
    }
}

/// Value and gradient of a polynomial at `x = (a1, b1, a2, b2, ...)`.
pub fn eval_with_gradient(p: &CoeffPoly, x: &[f64]) -> (f64, Vec<f64>) {
    let mut value = 0.0;
    let mut grad = vec![0.0; x.len()];
    for (m, c) in p.terms() {
        let c = c.to_f64().unwrap();
        let factors: Vec<(usize, u32)> = m.exponents().map(|(s, e)| (var_index(s), e)).collect();
        value += c * factors
            .iter()
            .map(|&(i, e)| x[i].powi(e as i32))
            .product::<f64>();
        for (k, &(i, e)) in factors.iter().enumerate() {
            let mut d = c * e as f64 * x[i].powi(e as i32 - 1);
            for (l, &(j, f)) in factors.iter().enumerate() {
                if l != k {
                    d *= x[j].powi(f as i32);
                }
            }
            grad[i] += d;
        }
    }
    (value, grad)
}

/// Minimum-norm Gauss-Newton refinement of `x` onto the zero set of `system`.
/// Returns the refined point if the residual drops below `1e-13`.
pub fn refine_root(system: &ConditionSystem, mut x: Vec<f64>) -> Option<Vec<f64>> {
    let n = x.len();
    let m = system.len();
    for _ in 0..60 {
        let mut f = DVector::zeros(m);
        let mut jac = DMatrix::zeros(m, n);
        for (i, c) in system.entries().iter().enumerate() {
            let (v, g) = eval_with_gradient(&c.polynomial, &x);
            f[i] = v - c.rhs.to_f64().unwrap();
            for (k, gk) in g.into_iter().enumerate() {
                jac[(i, k)] = gk;
            }
        }
        if f.amax() < 1e-13 {
            return x.iter().all(|v| v.abs() < 1e3).then_some(x);
        }
        let step = jac.svd(true, true).solve(&(-f), 1e-12).ok()?;
        for (xi, di) in x.iter_mut().zip(step.iter()) {
            *xi += di;
        }
        if x.iter().any(|v| !v.is_finite()) {
            return None;
        }
    }
    None
}

/// Exact rational image of a float point as a scheme.
pub fn scheme_from_point(name: &str, x: &[f64]) -> ConcreteScheme {
    let q = |v: f64| Rational::from_float(v).unwrap_or_else(Rational::zero);
    let a = x.iter().step_by(2).map(|&v| q(v)).collect();
    let b = x.iter().skip(1).step_by(2).map(|&v| q(v)).collect();
    ConcreteScheme::named(name, a, b).unwrap()
}

/// `count` refined roots of `system`, from uniform starts in `[-1, 1]^{2s}`.
pub fn refined_witnesses(
    system: &ConditionSystem,
    count: usize,
    seed: u64,
    tag: &str,
) -> Vec<ConcreteScheme> {
    let n = 2 * system.shape().stages();
    let mut rng = rng(seed);
    let mut out = Vec::new();
    let mut attempts = 0;
    while out.len() < count {
        attempts += 1;
        assert!(attempts < 50 * count, "root refinement keeps failing");
        let start: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect();
        if let Some(x) = refine_root(system, start) {
            out.push(scheme_from_point(&format!("{tag}-{}", out.len()), &x));
        }
    }
    out
}
