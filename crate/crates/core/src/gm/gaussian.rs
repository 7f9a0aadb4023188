use nalgebra::{DMatrix, DVector};

use super::GmError;
use crate::linalg;

/// Multivariate normal `N(·; mean, covariance)`.
///
/// The covariance is always stored symmetrized. Construction through
/// [`Gaussian::new`] rejects covariances whose smallest eigenvalue is below
/// `1e-12` times the largest.
#[derive(Debug, Clone, PartialEq)]
pub struct Gaussian {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
}

impl Gaussian {
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self, GmError> {
        if cov.nrows() != mean.len() || cov.ncols() != mean.len() {
            return Err(GmError::DimensionMismatch {
                expected: mean.len(),
                found: cov.nrows(),
            });
        }
        if mean.iter().any(|v| !v.is_finite()) {
            return Err(GmError::NonFinite);
        }
        let cov = linalg::symmetrize(&cov);
        if !linalg::is_positive_definite(&cov) {
            let (min_eig, max_eig) = if cov.iter().all(|v| v.is_finite()) {
                linalg::eigen_range(&cov)
            } else {
                (f64::NAN, f64::NAN)
            };
            return Err(GmError::NotPositiveDefinite { min_eig, max_eig });
        }
        Ok(Self { mean, cov })
    }

    /// Cheaper constructor for internal results that are PD by construction;
    /// only checks that a Cholesky factor exists.
    pub(crate) fn from_parts(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self, GmError> {
        let cov = linalg::symmetrize(&cov);
        if mean.iter().any(|v| !v.is_finite()) {
            return Err(GmError::NonFinite);
        }
        if linalg::cholesky(&cov).is_none() {
            return Err(GmError::NotPositiveDefinite {
                min_eig: f64::NAN,
                max_eig: f64::NAN,
            });
        }
        Ok(Self { mean, cov })
    }

    pub fn scalar(mean: f64, variance: f64) -> Result<Self, GmError> {
        Self::new(
            DVector::from_element(1, mean),
            DMatrix::from_element(1, 1, variance),
        )
    }

    pub fn from_diagonal(mean: &[f64], variances: &[f64]) -> Result<Self, GmError> {
        Self::new(
            DVector::from_column_slice(mean),
            DMatrix::from_diagonal(&DVector::from_column_slice(variances)),
        )
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.cov
    }

    pub fn log_pdf(&self, x: &DVector<f64>) -> f64 {
        let r = x - &self.mean;
        linalg::log_normal_zero_mean(&r, &self.cov).unwrap_or(f64::NEG_INFINITY)
    }

    pub fn pdf(&self, x: &DVector<f64>) -> f64 {
        self.log_pdf(x).exp()
    }

    /// Squared Mahalanobis distance of `x` in this Gaussian's metric.
    pub fn mahalanobis_sq(&self, x: &DVector<f64>) -> f64 {
        let r = x - &self.mean;
        match linalg::cholesky(&self.cov) {
            Some(chol) => r.dot(&chol.solve(&r)),
            None => f64::INFINITY,
        }
    }

    pub fn information_pair(&self) -> Result<InformationPair, GmError> {
        InformationPair::from_gaussian(self)
    }
}

/// Information (canonical) form `(Σ⁻¹, Σ⁻¹μ)` of a Gaussian.
#[derive(Debug, Clone, PartialEq)]
pub struct InformationPair {
    pub info_matrix: DMatrix<f64>,
    pub info_vector: DVector<f64>,
}

impl InformationPair {
    pub fn from_gaussian(g: &Gaussian) -> Result<Self, GmError> {
        let chol = linalg::cholesky(g.covariance()).ok_or(GmError::NotPositiveDefinite {
            min_eig: f64::NAN,
            max_eig: f64::NAN,
        })?;
        let info_matrix = linalg::symmetrize(&chol.inverse());
        let info_vector = &info_matrix * g.mean();
        Ok(Self {
            info_matrix,
            info_vector,
        })
    }

    pub fn to_gaussian(&self) -> Result<Gaussian, GmError> {
        let chol = linalg::cholesky(&self.info_matrix).ok_or(GmError::NotPositiveDefinite {
            min_eig: f64::NAN,
            max_eig: f64::NAN,
        })?;
        let mean = chol.solve(&self.info_vector);
        Gaussian::new(mean, chol.inverse())
    }

    /// Weighted arithmetic mean `Σ ωᵢ (Φᵢ, qᵢ)`; weights are used as given.
    pub fn weighted_mean(pairs: &[(&InformationPair, f64)]) -> Option<Self> {
        let (first, _) = pairs.first()?;
        let d = first.info_vector.len();
        let mut m = DMatrix::zeros(d, d);
        let mut v = DVector::zeros(d);
        for (p, w) in pairs {
            m += &p.info_matrix * *w;
            v += &p.info_vector * *w;
        }
        Some(Self {
            info_matrix: linalg::symmetrize(&m),
            info_vector: v,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_singular_covariance() {
        let err = Gaussian::new(
            DVector::zeros(2),
            DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]),
        )
        .unwrap_err();
        assert!(matches!(err, GmError::NotPositiveDefinite { .. }));
    }

    #[test]
    fn symmetrizes_input() {
        let g = Gaussian::new(
            DVector::zeros(2),
            DMatrix::from_row_slice(2, 2, &[2.0, 0.4, 0.2, 1.0]),
        )
        .unwrap();
        assert_eq!(g.covariance()[(0, 1)], g.covariance()[(1, 0)]);
        assert!((g.covariance()[(0, 1)] - 0.3).abs() < 1e-15);
    }

    #[test]
    fn information_round_trip() {
        let g = Gaussian::new(
            DVector::from_column_slice(&[1.0, -2.0, 300.0, 4.0]),
            DMatrix::from_row_slice(
                4,
                4,
                &[
                    1e6, 1e3, 0.0, 0.0, 1e3, 1e4, 0.0, 0.0, 0.0, 0.0, 1e6, -5e2, 0.0, 0.0, -5e2,
                    1e4,
                ],
            ),
        )
        .unwrap();
        let back = g.information_pair().unwrap().to_gaussian().unwrap();
        for i in 0..4 {
            let rel = (back.mean()[i] - g.mean()[i]).abs() / g.mean()[i].abs().max(1.0);
            assert!(rel < 1e-8);
            for j in 0..4 {
                let scale = g.covariance()[(i, i)].max(g.covariance()[(j, j)]);
                assert!((back.covariance()[(i, j)] - g.covariance()[(i, j)]).abs() / scale < 1e-8);
            }
        }
    }

    #[test]
    fn scalar_pdf_at_mean() {
        let g = Gaussian::scalar(0.0, 1.0).unwrap();
        let expected = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
        assert!((g.pdf(&DVector::from_element(1, 0.0)) - expected).abs() < 1e-15);
    }
}
