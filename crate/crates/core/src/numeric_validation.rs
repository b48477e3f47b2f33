//! Floating-point check that a scheme's one-step error on random linear
//! matrix problems decays like `t^{p+1}`.

use nalgebra::DMatrix;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::exact_arith::Rational;
use crate::order_conditions::ConcreteScheme;

/// Largest supported dimension.
pub const MAX_DIMENSION: usize = 64;

/// Errors below this are roundoff and are left out of the slope fit.
pub const ERROR_FLOOR: f64 = 100.0 * f64::EPSILON;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("dimension {0} outside 1..={MAX_DIMENSION}")]
    BadDimension(usize),
    #[error("matrix must be square, got {0}x{1}")]
    NotSquare(usize, usize),
    #[error("non-finite entries in matrix exponential")]
    NonFinite,
    #[error("invalid step-size grid: {0}")]
    InvalidGrid(String),
    #[error("only {usable} points above the roundoff floor; need at least 3")]
    DegenerateFit { usable: usize },
}

/// Square real matrix with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix(DMatrix<f64>);

impl DenseMatrix {
    pub fn new(inner: DMatrix<f64>) -> Result<Self, NumericError> {
        if inner.nrows() != inner.ncols() {
            return Err(NumericError::NotSquare(inner.nrows(), inner.ncols()));
        }
        if inner.iter().any(|x| !x.is_finite()) {
            return Err(NumericError::NonFinite);
        }
        Ok(DenseMatrix(inner))
    }

    pub fn from_row_slice(n: usize, entries: &[f64]) -> Result<Self, NumericError> {
        if entries.len() != n * n {
            return Err(NumericError::DimensionMismatch(n * n, entries.len()));
        }
        Self::new(DMatrix::from_row_slice(n, n, entries))
    }

    pub fn identity(n: usize) -> Self {
        DenseMatrix(DMatrix::identity(n, n))
    }

    pub fn zeros(n: usize) -> Self {
        DenseMatrix(DMatrix::zeros(n, n))
    }

    pub fn diagonal(values: &[f64]) -> Self {
        DenseMatrix(DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(
            values,
        )))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn inner(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.0[(row, col)]
    }

    pub fn scaled(&self, factor: f64) -> DenseMatrix {
        DenseMatrix(&self.0 * factor)
    }

    pub fn add(&self, other: &DenseMatrix) -> Result<DenseMatrix, NumericError> {
        self.check_dim(other)?;
        Ok(DenseMatrix(&self.0 + &other.0))
    }

    pub fn sub(&self, other: &DenseMatrix) -> Result<DenseMatrix, NumericError> {
        self.check_dim(other)?;
        Ok(DenseMatrix(&self.0 - &other.0))
    }

    pub fn matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix, NumericError> {
        self.check_dim(other)?;
        Ok(DenseMatrix(&self.0 * &other.0))
    }

    /// `[self, other] = self*other - other*self`
    pub fn commutator(&self, other: &DenseMatrix) -> Result<DenseMatrix, NumericError> {
        self.matmul(other)?.sub(&other.matmul(self)?)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.norm()
    }

    fn one_norm(&self) -> f64 {
        self.0
            .column_iter()
            .map(|c| c.iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Power-iteration estimate of the largest singular value.
    pub fn spectral_norm_estimate(&self) -> f64 {
        let n = self.dim();
        if n == 0 {
            return 0.0;
        }
        let gram = self.0.transpose() * &self.0;
        let mut v = nalgebra::DVector::from_element(n, 1.0 / (n as f64).sqrt());
        let mut lambda = 0.0;
        for _ in 0..200 {
            let w = &gram * &v;
            let norm = w.norm();
            if norm == 0.0 {
                return 0.0;
            }
            lambda = v.dot(&w);
            v = w / norm;
        }
        lambda.max(0.0).sqrt()
    }

    fn check_dim(&self, other: &DenseMatrix) -> Result<(), NumericError> {
        if self.dim() != other.dim() {
            return Err(NumericError::DimensionMismatch(self.dim(), other.dim()));
        }
        Ok(())
    }
}

// Padé(13,13) numerator coefficients; the denominator uses alternating signs.
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

// Largest 1-norm for which Padé(13,13) meets double precision without scaling.
const THETA13: f64 = 5.371920351148152;

/// Matrix exponential by scaling and squaring with the degree-13 diagonal
/// Padé approximant.
pub fn matrix_exp(m: &DenseMatrix) -> Result<DenseMatrix, NumericError> {
    let n = m.dim();
    if n > MAX_DIMENSION {
        return Err(NumericError::BadDimension(n));
    }
    if n == 0 {
        return Ok(DenseMatrix::zeros(0));
    }
    let norm = m.one_norm();
    let squarings = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as i32
    } else {
        0
    };
    let a = &m.0 * 2f64.powi(-squarings);
    let id = DMatrix::<f64>::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let b = &PADE13;
    let u_inner = &a6 * (&a6 * b[13] + &a4 * b[11] + &a2 * b[9])
        + &a6 * b[7]
        + &a4 * b[5]
        + &a2 * b[3]
        + &id * b[1];
    let u = &a * u_inner;
    let v = &a6 * (&a6 * b[12] + &a4 * b[10] + &a2 * b[8])
        + &a6 * b[6]
        + &a4 * b[4]
        + &a2 * b[2]
        + &id * b[0];
    let p = &v + &u;
    let q = &v - &u;
    let mut r = q.lu().solve(&p).ok_or(NumericError::NonFinite)?;
    for _ in 0..squarings {
        r = &r * &r;
    }
    DenseMatrix::new(r)
}

fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// `prod_j exp(a_j t A) exp(b_j t B)`, with the `j = 1` factors leftmost.
pub fn scheme_step(
    scheme: &ConcreteScheme,
    a: &DenseMatrix,
    b: &DenseMatrix,
    t: f64,
) -> Result<DenseMatrix, NumericError> {
    a.check_dim(b)?;
    let mut acc = DenseMatrix::identity(a.dim());
    for (aj, bj) in scheme.a().iter().zip(scheme.b()) {
        acc = acc.matmul(&matrix_exp(&a.scaled(to_f64(aj) * t))?)?;
        acc = acc.matmul(&matrix_exp(&b.scaled(to_f64(bj) * t))?)?;
    }
    Ok(acc)
}

/// Frobenius norm of `scheme_step - exp((A + B) t)`.
pub fn local_error(
    scheme: &ConcreteScheme,
    a: &DenseMatrix,
    b: &DenseMatrix,
    t: f64,
) -> Result<f64, NumericError> {
    let step = scheme_step(scheme, a, b, t)?;
    let exact = matrix_exp(&a.add(b)?.scaled(t))?;
    Ok(step.sub(&exact)?.frobenius_norm())
}

/// Random `n x n` matrix with entries uniform in `[-1, 1]`, scaled to unit
/// spectral-norm estimate. Returns the matrix and the applied factor.
pub fn random_unit_matrix<R: Rng>(n: usize, rng: &mut R) -> (DenseMatrix, f64) {
    let entries: Vec<f64> = (0..n * n).map(|_| rng.random_range(-1.0..=1.0)).collect();
    let raw = DenseMatrix(DMatrix::from_row_slice(n, n, &entries));
    let norm = raw.spectral_norm_estimate();
    let factor = if norm > 0.0 { 1.0 / norm } else { 1.0 };
    (raw.scaled(factor), factor)
}

/// `t = 2^-4, 2^-5, ..., 2^-10`.
pub fn default_grid() -> Vec<f64> {
    (4..=10).map(|k| 2f64.powi(-k)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Scaling {
    pub a: f64,
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub scheme: String,
    pub n: usize,
    pub seed: u64,
    /// Factors applied to the raw random matrices.
    pub scaling: Scaling,
    /// `[t, local error]` for every grid point.
    pub pairs: Vec<[f64; 2]>,
    /// Least-squares slope of `log(error)` against `log(t)`.
    pub slope: f64,
    /// Root-mean-square deviation of the fitted points from the line.
    pub residual: f64,
    pub points_used: usize,
}

fn check_grid(grid: &[f64]) -> Result<(), NumericError> {
    let (lo, hi) = (2f64.powi(-14), 2f64.powi(-3));
    if grid.is_empty() {
        return Err(NumericError::InvalidGrid("empty".into()));
    }
    if let Some(t) = grid.iter().find(|t| !(lo..=hi).contains(*t)) {
        return Err(NumericError::InvalidGrid(format!(
            "{t} outside [2^-14, 2^-3]"
        )));
    }
    if grid.windows(2).any(|w| w[1] >= w[0]) {
        return Err(NumericError::InvalidGrid("not strictly decreasing".into()));
    }
    Ok(())
}

/// Least-squares line through `(x, y)`; returns `(slope, rms residual)`.
fn fit_line(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = points
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    (slope, (ss / n).sqrt())
}

/// Measures the local error of `scheme` on a seeded random pair of unit-norm
/// `n x n` matrices over `grid`, and fits the decay rate.
pub fn empirical_order(
    scheme: &ConcreteScheme,
    n: usize,
    seed: u64,
    grid: &[f64],
) -> Result<ConvergenceReport, NumericError> {
    if n == 0 || n > MAX_DIMENSION {
        return Err(NumericError::BadDimension(n));
    }
    check_grid(grid)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (a, scale_a) = random_unit_matrix(n, &mut rng);
    let (b, scale_b) = random_unit_matrix(n, &mut rng);

    let pairs = grid
        .iter()
        .map(|&t| local_error(scheme, &a, &b, t).map(|e| [t, e]))
        .collect::<Result<Vec<_>, _>>()?;
    let usable: Vec<(f64, f64)> = pairs
        .iter()
        .filter(|p| p[1] >= ERROR_FLOOR)
        .map(|p| (p[0].ln(), p[1].ln()))
        .collect();
    if usable.len() < 3 {
        return Err(NumericError::DegenerateFit {
            usable: usable.len(),
        });
    }
    let (slope, residual) = fit_line(&usable);
    Ok(ConvergenceReport {
        scheme: scheme.label().to_string(),
        n,
        seed,
        scaling: Scaling {
            a: scale_a,
            b: scale_b,
        },
        pairs,
        slope,
        residual,
        points_used: usable.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_arith::{rational, rational_int};

    fn max_abs_diff(x: &DenseMatrix, y: &DenseMatrix) -> f64 {
        (&x.0 - &y.0).amax()
    }

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

    #[test]
    fn exp_of_zero_is_identity() {
        assert_eq!(
            matrix_exp(&DenseMatrix::zeros(3)).unwrap(),
            DenseMatrix::identity(3)
        );
    }

    #[test]
    fn exp_of_diagonal() {
        let e = matrix_exp(&DenseMatrix::diagonal(&[1.0, 2.0])).unwrap();
        let e1 = 1f64.exp();
        let e2 = 2f64.exp();
        assert!(((e.get(0, 0) - e1) / e1).abs() < 1e-13);
        assert!(((e.get(1, 1) - e2) / e2).abs() < 1e-13);
        assert_eq!(e.get(0, 1), 0.0);
    }

    #[test]
    fn exp_of_large_diagonal_uses_squaring() {
        let e = matrix_exp(&DenseMatrix::diagonal(&[-10.0, 10.0])).unwrap();
        assert!(((e.get(1, 1) - 10f64.exp()) / 10f64.exp()).abs() < 1e-13);
        assert!(((e.get(0, 0) - (-10f64).exp()) / (-10f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn exp_rotation_generator() {
        // exp([[0, -x], [x, 0]]) is a rotation by x
        let x = 0.7;
        let m = DenseMatrix::from_row_slice(2, &[0.0, -x, x, 0.0]).unwrap();
        let want = DenseMatrix::from_row_slice(2, &[x.cos(), -x.sin(), x.sin(), x.cos()]).unwrap();
        assert!(max_abs_diff(&matrix_exp(&m).unwrap(), &want) < 1e-15);
    }

    #[test]
    fn exp_inverse_property() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [2, 4, 7] {
            let (m, _) = random_unit_matrix(n, &mut rng);
            let m = m.scaled(2.0);
            let prod = matrix_exp(&m)
                .unwrap()
                .matmul(&matrix_exp(&m.scaled(-1.0)).unwrap())
                .unwrap();
            assert!(max_abs_diff(&prod, &DenseMatrix::identity(n)) < 1e-12);
        }
    }

    #[test]
    fn exp_rejects_oversized_and_non_finite() {
        assert_eq!(
            matrix_exp(&DenseMatrix::zeros(65)),
            Err(NumericError::BadDimension(65))
        );
        let big = DenseMatrix::diagonal(&[1000.0]);
        assert_eq!(matrix_exp(&big), Err(NumericError::NonFinite));
    }

    #[test]
    fn step_at_zero_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (a, _) = random_unit_matrix(3, &mut rng);
        let (b, _) = random_unit_matrix(3, &mut rng);
        let s = scheme_step(&strang(), &a, &b, 0.0).unwrap();
        assert_eq!(s, DenseMatrix::identity(3));
    }

    #[test]
    fn commuting_operators_have_no_splitting_error() {
        let a = DenseMatrix::diagonal(&[0.3, -0.2, 0.5]);
        let b = DenseMatrix::diagonal(&[0.1, 0.4, -0.6]);
        let err = local_error(&lie_trotter(), &a, &b, 0.1).unwrap();
        assert!(err < 1e-15);
    }

    #[test]
    fn lie_trotter_leading_error_is_half_commutator() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let (a, _) = random_unit_matrix(4, &mut rng);
        let (b, _) = random_unit_matrix(4, &mut rng);
        let t = 1e-3;
        let err = local_error(&lie_trotter(), &a, &b, t).unwrap();
        let predicted = 0.5 * t * t * a.commutator(&b).unwrap().frobenius_norm();
        assert!((err / predicted - 1.0).abs() < 0.01, "{err} vs {predicted}");
    }

    #[test]
    fn step_rejects_mismatched_dimensions() {
        let r = scheme_step(
            &lie_trotter(),
            &DenseMatrix::identity(2),
            &DenseMatrix::identity(3),
            0.1,
        );
        assert_eq!(r, Err(NumericError::DimensionMismatch(2, 3)));
    }

    #[test]
    fn random_matrix_has_unit_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (m, factor) = random_unit_matrix(5, &mut rng);
        assert!((m.spectral_norm_estimate() - 1.0).abs() < 1e-10);
        assert!(factor > 0.0);
    }

    #[test]
    fn grid_validation() {
        let s = lie_trotter();
        assert!(matches!(
            empirical_order(&s, 4, 1, &[]),
            Err(NumericError::InvalidGrid(_))
        ));
        assert!(matches!(
            empirical_order(&s, 4, 1, &[0.5, 0.1]),
            Err(NumericError::InvalidGrid(_))
        ));
        assert!(matches!(
            empirical_order(&s, 4, 1, &[0.01, 0.02]),
            Err(NumericError::InvalidGrid(_))
        ));
        assert_eq!(
            empirical_order(&s, 0, 1, &default_grid()),
            Err(NumericError::BadDimension(0))
        );
    }

    #[test]
    fn too_few_points_is_degenerate() {
        let grid = [2f64.powi(-4), 2f64.powi(-5)];
        assert_eq!(
            empirical_order(&lie_trotter(), 4, 1, &grid),
            Err(NumericError::DegenerateFit { usable: 2 })
        );
    }

    #[test]
    fn exact_scheme_has_only_roundoff() {
        // commuting diagonal case is covered above; here an order-infinity
        // "scheme" would need A and B to commute, so use n = 1
        let r = empirical_order(&lie_trotter(), 1, 5, &default_grid());
        assert!(matches!(r, Err(NumericError::DegenerateFit { .. })));
    }

    #[test]
    fn report_is_reproducible() {
        let r1 = empirical_order(&strang(), 4, 9, &default_grid()).unwrap();
        let r2 = empirical_order(&strang(), 4, 9, &default_grid()).unwrap();
        assert_eq!(
            serde_json::to_string(&r1).unwrap(),
            serde_json::to_string(&r2).unwrap()
        );
    }

    #[test]
    fn fit_recovers_exact_line() {
        let pts: Vec<(f64, f64)> = (0..5).map(|i| (i as f64, 3.0 * i as f64 - 1.0)).collect();
        let (slope, res) = fit_line(&pts);
        assert!((slope - 3.0).abs() < 1e-12);
        assert!(res < 1e-12);
    }
}
