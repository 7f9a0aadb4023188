//! Motion, birth, and probability models shared by the filters and sensors.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::gm::{Gaussian, GaussianMixture, GmError};
use crate::labeled::{Label, LmbDensity};
use crate::sensors::{sigma_points, UtParams};

type LabelFn = dyn Fn(Label, u32) -> f64 + Send + Sync;
type StateFn = dyn Fn(&DVector<f64>, Label, u32) -> f64 + Send + Sync;

/// A probability as a function of state, label and time step.
#[derive(Clone)]
pub enum ProbabilityModel {
    Constant(f64),
    PerLabel(Arc<LabelFn>),
    PerState(Arc<StateFn>),
}

impl fmt::Debug for ProbabilityModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Constant(p) => write!(f, "Constant({p})"),
            Self::PerLabel(_) => f.write_str("PerLabel(..)"),
            Self::PerState(_) => f.write_str("PerState(..)"),
        }
    }
}

impl ProbabilityModel {
    pub fn per_label<F>(f: F) -> Self
    where
        F: Fn(Label, u32) -> f64 + Send + Sync + 'static,
    {
        Self::PerLabel(Arc::new(f))
    }

    pub fn per_state<F>(f: F) -> Self
    where
        F: Fn(&DVector<f64>, Label, u32) -> f64 + Send + Sync + 'static,
    {
        Self::PerState(Arc::new(f))
    }

    pub fn eval(&self, x: &DVector<f64>, label: Label, k: u32) -> f64 {
        let p = match self {
            Self::Constant(p) => *p,
            Self::PerLabel(f) => f(label, k),
            Self::PerState(f) => f(x, label, k),
        };
        p.clamp(0.0, 1.0)
    }

    pub fn as_constant(&self) -> Option<f64> {
        match self {
            Self::Constant(p) => Some(*p),
            _ => None,
        }
    }

    /// `∫ P(x) N(x; m, P) dx`, exact unless the model depends on the state, in
    /// which case it is the unscented approximation.
    pub fn expect_gaussian(&self, g: &Gaussian, label: Label, k: u32) -> f64 {
        match self {
            Self::Constant(p) => p.clamp(0.0, 1.0),
            Self::PerLabel(f) => f(label, k).clamp(0.0, 1.0),
            Self::PerState(f) => match sigma_points(g, &UtParams::default()) {
                Some(sp) => sp
                    .points
                    .iter()
                    .zip(&sp.mean_weights)
                    .map(|(x, w)| w * f(x, label, k).clamp(0.0, 1.0))
                    .sum::<f64>()
                    .clamp(0.0, 1.0),
                None => f(g.mean(), label, k).clamp(0.0, 1.0),
            },
        }
    }

    /// Per-component expectations `⟨P, N_j⟩` for a mixture.
    pub fn expect_components(&self, p: &GaussianMixture, label: Label, k: u32) -> Vec<f64> {
        p.iter().map(|c| self.expect_gaussian(&c.gaussian, label, k)).collect()
    }
}

/// Linear-Gaussian transition `x' = F x + w`, `w ~ N(0, Q)`, with survival probability.
#[derive(Debug, Clone)]
pub struct MotionModel {
    pub transition: DMatrix<f64>,
    pub process_noise: DMatrix<f64>,
    pub survival: ProbabilityModel,
}

impl MotionModel {
    /// Nearly-constant-velocity model on `[px, vx, py, vy]`.
    pub fn ncv(ts: f64, sigma_w: f64, survival: ProbabilityModel) -> Self {
        let mut f = DMatrix::identity(4, 4);
        f[(0, 1)] = ts;
        f[(2, 3)] = ts;
        let (t2, t3, t4) = (ts * ts, ts.powi(3), ts.powi(4));
        let block = [[t4 / 4.0, t3 / 2.0], [t3 / 2.0, t2]];
        let mut q = DMatrix::zeros(4, 4);
        for b in [0, 2] {
            for i in 0..2 {
                for j in 0..2 {
                    q[(b + i, b + j)] = sigma_w * sigma_w * block[i][j];
                }
            }
        }
        Self {
            transition: f,
            process_noise: q,
            survival,
        }
    }

    pub fn dim(&self) -> usize {
        self.transition.nrows()
    }

    pub fn predict_gaussian(&self, g: &Gaussian) -> Result<Gaussian, GmError> {
        let f = &self.transition;
        let mean = f * g.mean();
        let cov = f * g.covariance() * f.transpose() + &self.process_noise;
        Gaussian::from_parts(mean, cov)
    }

    /// Predicts every component; weights untouched.
    pub fn predict_mixture(&self, p: &GaussianMixture) -> Result<GaussianMixture, GmError> {
        let mut out = Vec::with_capacity(p.len());
        for c in p.iter() {
            out.push((c.log_weight, self.predict_gaussian(&c.gaussian)?));
        }
        Ok(GaussianMixture::from_log_weights(out))
    }
}

#[derive(Debug, Clone)]
pub struct BirthEntry {
    pub index: u32,
    pub existence: f64,
    pub pdf: GaussianMixture,
}

/// LMB birth process instantiated with labels `(k, index)` at each step.
#[derive(Debug, Clone, Default)]
pub struct BirthModel {
    pub entries: Vec<BirthEntry>,
}

impl BirthModel {
    pub fn at(&self, k: u32) -> LmbDensity {
        LmbDensity::from_entries(
            self.entries
                .iter()
                .map(|e| (Label::new(k, e.index), e.existence, e.pdf.clone())),
        )
        .expect("birth entries validated at construction")
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ncv_matrices() {
        let m = MotionModel::ncv(5.0, 5.0, ProbabilityModel::Constant(0.99));
        assert_eq!(m.transition[(0, 1)], 5.0);
        assert_eq!(m.process_noise[(0, 0)], 25.0 * 625.0 / 4.0);
        assert_eq!(m.process_noise[(1, 1)], 25.0 * 25.0);
        assert_eq!(m.process_noise[(2, 3)], 25.0 * 125.0 / 2.0);
        assert_eq!(m.process_noise[(0, 2)], 0.0);
    }

    #[test]
    fn state_dependent_expectation_of_linear_function_is_exact() {
        let g = Gaussian::from_diagonal(&[0.3, 0.0], &[0.01, 1.0]).unwrap();
        let p = ProbabilityModel::per_state(|x, _, _| x[0]);
        let e = p.expect_gaussian(&g, Label::new(0, 1), 0);
        assert!((e - 0.3).abs() < 1e-12);
    }
}
