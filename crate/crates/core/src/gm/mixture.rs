use nalgebra::{DMatrix, DVector};

use super::{Gaussian, GmError};
use crate::linalg::log_sum_exp;

/// One weighted term of a [`GaussianMixture`].
#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub log_weight: f64,
    pub gaussian: Gaussian,
}

/// Weighted sum of Gaussians with weights kept in the log domain.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GaussianMixture {
    components: Vec<Component>,
}

impl GaussianMixture {
    pub fn new(components: Vec<Component>) -> Result<Self, GmError> {
        if let Some(first) = components.first() {
            let d = first.gaussian.dim();
            for c in &components {
                if c.gaussian.dim() != d {
                    return Err(GmError::DimensionMismatch {
                        expected: d,
                        found: c.gaussian.dim(),
                    });
                }
                if c.log_weight.is_nan() || c.log_weight == f64::INFINITY {
                    return Err(GmError::InvalidWeight(c.log_weight));
                }
            }
        }
        Ok(Self { components })
    }

    pub(crate) fn from_components_unchecked(components: Vec<Component>) -> Self {
        Self { components }
    }

    pub fn single(gaussian: Gaussian) -> Self {
        Self {
            components: vec![Component {
                log_weight: 0.0,
                gaussian,
            }],
        }
    }

    /// Builds a mixture from linear weights, dropping zero weights.
    pub fn from_weights(terms: Vec<(f64, Gaussian)>) -> Result<Self, GmError> {
        let comps = terms
            .into_iter()
            .filter(|(w, _)| *w > 0.0)
            .map(|(w, g)| Component {
                log_weight: w.ln(),
                gaussian: g,
            })
            .collect();
        Self::new(comps)
    }

    pub(crate) fn from_log_weights(terms: Vec<(f64, Gaussian)>) -> Self {
        Self {
            components: terms
                .into_iter()
                .map(|(log_weight, gaussian)| Component { log_weight, gaussian })
                .collect(),
        }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn dim(&self) -> Option<usize> {
        self.components.first().map(|c| c.gaussian.dim())
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn into_components(self) -> Vec<Component> {
        self.components
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Component> {
        self.components.iter()
    }

    /// `log Σ wⱼ`.
    pub fn log_mass(&self) -> f64 {
        log_sum_exp(self.components.iter().map(|c| c.log_weight))
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        self.is_empty() || self.log_mass().abs() <= tol
    }

    /// Rescales weights to sum to one. An empty or zero-mass mixture is left as is.
    pub fn normalize(&mut self) {
        let lm = self.log_mass();
        if lm.is_finite() {
            for c in &mut self.components {
                c.log_weight -= lm;
            }
        }
    }

    pub fn normalized(mut self) -> Self {
        self.normalize();
        self
    }

    /// Linear weights, normalized.
    pub fn weights(&self) -> Vec<f64> {
        let lm = self.log_mass();
        self.components
            .iter()
            .map(|c| (c.log_weight - lm).exp())
            .collect()
    }

    /// Overall mixture mean.
    pub fn mean(&self) -> Option<DVector<f64>> {
        let d = self.dim()?;
        let w = self.weights();
        let mut m = DVector::zeros(d);
        for (wi, c) in w.iter().zip(&self.components) {
            m += c.gaussian.mean() * *wi;
        }
        Some(m)
    }

    /// Overall mixture covariance (moment matched).
    pub fn covariance(&self) -> Option<DMatrix<f64>> {
        let mean = self.mean()?;
        let d = mean.len();
        let w = self.weights();
        let mut p = DMatrix::zeros(d, d);
        for (wi, c) in w.iter().zip(&self.components) {
            let dm = c.gaussian.mean() - &mean;
            p += (c.gaussian.covariance() + &dm * dm.transpose()) * *wi;
        }
        Some(p)
    }

    /// Highest-weight component; ties go to the earlier one.
    pub fn heaviest(&self) -> Option<&Component> {
        let mut best: Option<&Component> = None;
        for c in &self.components {
            match best {
                Some(b) if c.log_weight <= b.log_weight => {}
                _ => best = Some(c),
            }
        }
        best
    }

    pub fn log_pdf(&self, x: &DVector<f64>) -> f64 {
        let lm = self.log_mass();
        log_sum_exp(
            self.components
                .iter()
                .map(|c| c.log_weight - lm + c.gaussian.log_pdf(x)),
        )
    }

    pub fn pdf(&self, x: &DVector<f64>) -> f64 {
        self.log_pdf(x).exp()
    }

    /// Returns a copy with every log-weight shifted by `delta`.
    pub fn scaled(&self, log_factor: f64) -> Self {
        Self {
            components: self
                .components
                .iter()
                .map(|c| Component {
                    log_weight: c.log_weight + log_factor,
                    gaussian: c.gaussian.clone(),
                })
                .collect(),
        }
    }

    pub fn push(&mut self, component: Component) {
        self.components.push(component);
    }

    pub fn extend_from(&mut self, other: &GaussianMixture, log_factor: f64) {
        for c in &other.components {
            self.components.push(Component {
                log_weight: c.log_weight + log_factor,
                gaussian: c.gaussian.clone(),
            });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(m: f64, v: f64) -> Gaussian {
        Gaussian::scalar(m, v).unwrap()
    }

    #[test]
    fn moments_of_two_component_mixture() {
        let gm = GaussianMixture::from_weights(vec![(0.5, g(-1.0, 1.0)), (0.5, g(1.0, 1.0))]).unwrap();
        assert!(gm.mean().unwrap()[0].abs() < 1e-15);
        assert!((gm.covariance().unwrap()[(0, 0)] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn normalize_sets_unit_mass() {
        let gm = GaussianMixture::from_weights(vec![(2.0, g(0.0, 1.0)), (6.0, g(1.0, 1.0))])
            .unwrap()
            .normalized();
        assert!(gm.is_normalized(1e-12));
        assert!((gm.weights()[1] - 0.75).abs() < 1e-15);
    }

    #[test]
    fn heaviest_prefers_earlier_on_tie() {
        let gm = GaussianMixture::from_weights(vec![(0.5, g(0.0, 1.0)), (0.5, g(1.0, 1.0))]).unwrap();
        assert_eq!(gm.heaviest().unwrap().gaussian.mean()[0], 0.0);
    }

    #[test]
    fn rejects_mixed_dimensions() {
        let a = Component {
            log_weight: 0.0,
            gaussian: g(0.0, 1.0),
        };
        let b = Component {
            log_weight: 0.0,
            gaussian: Gaussian::from_diagonal(&[0.0, 0.0], &[1.0, 1.0]).unwrap(),
        };
        assert!(GaussianMixture::new(vec![a, b]).is_err());
    }
}
