//! Small dense linear-algebra and log-domain helpers shared by every module.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

/// Relative eigenvalue floor below which a covariance is rejected.
pub const PD_RELATIVE_TOLERANCE: f64 = 1e-12;

const LN_2PI: f64 = 1.837_877_066_409_345_3;

/// Returns `(A + Aᵀ) / 2`.
pub fn symmetrize(a: &DMatrix<f64>) -> DMatrix<f64> {
    (a + a.transpose()) * 0.5
}

/// Extreme eigenvalues `(min, max)` of a symmetric matrix.
pub fn eigen_range(a: &DMatrix<f64>) -> (f64, f64) {
    let eig = a.clone().symmetric_eigen();
    let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = eig.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (min, max)
}

/// Positive-definiteness test used at every public construction boundary:
/// the smallest eigenvalue must exceed `1e-12` times the largest.
pub fn is_positive_definite(a: &DMatrix<f64>) -> bool {
    if a.nrows() != a.ncols() || a.iter().any(|v| !v.is_finite()) {
        return false;
    }
    if a.nrows() == 0 {
        return false;
    }
    let (min, max) = eigen_range(a);
    max > 0.0 && min > PD_RELATIVE_TOLERANCE * max
}

pub fn cholesky(a: &DMatrix<f64>) -> Option<Cholesky<f64, Dyn>> {
    Cholesky::new(a.clone())
}

/// `log det(A)` from a Cholesky factor.
pub fn log_det_chol(chol: &Cholesky<f64, Dyn>) -> f64 {
    2.0 * chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>()
}

/// Log density of `N(residual; 0, S)`, or `None` when `S` is not PD.
pub fn log_normal_zero_mean(residual: &DVector<f64>, cov: &DMatrix<f64>) -> Option<f64> {
    let chol = cholesky(cov)?;
    Some(log_normal_with_chol(residual, &chol))
}

pub fn log_normal_with_chol(residual: &DVector<f64>, chol: &Cholesky<f64, Dyn>) -> f64 {
    let d = residual.len() as f64;
    let solved = chol.solve(residual);
    let maha = residual.dot(&solved);
    -0.5 * (d * LN_2PI + log_det_chol(chol) + maha)
}

/// Numerically stable `log Σ exp(xᵢ)`; `-∞` for an empty input.
pub fn log_sum_exp<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let values: Vec<f64> = values.into_iter().collect();
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// `ln(x)` that maps `0` to `-∞` without a NaN for tiny negatives from rounding.
pub fn ln_clamped(x: f64) -> f64 {
    if x <= 0.0 {
        f64::NEG_INFINITY
    } else {
        x.ln()
    }
}

/// Wraps an angle into `(-π, π]`.
pub fn wrap_angle(a: f64) -> f64 {
    use std::f64::consts::PI;
    let two_pi = 2.0 * PI;
    let mut r = a.rem_euclid(two_pi);
    if r > PI {
        r -= two_pi;
    }
    // rem_euclid maps -π to π already; the only other boundary case.
    if r <= -PI {
        r += two_pi;
    }
    r
}
