use std::collections::BTreeMap;
use std::sync::Arc;

use super::{Hypothesis, LabelSet, MdGlmbDensity};
use crate::gm::GaussianMixture;
use crate::linalg::log_sum_exp;

/// One `(I, ξ)` term of a δ-GLMB.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaComponent {
    pub labels: LabelSet,
    /// Opaque association-history tag; only distinctness matters.
    pub history: u64,
    pub log_weight: f64,
    pub pdfs: Vec<Arc<GaussianMixture>>,
}

/// δ-GLMB density as a flat list of `(I, ξ)` components.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DeltaGlmbDensity {
    pub components: Vec<DeltaComponent>,
}

impl DeltaGlmbDensity {
    pub fn new(components: Vec<DeltaComponent>) -> Self {
        Self { components }
    }

    pub fn log_mass(&self) -> f64 {
        log_sum_exp(self.components.iter().map(|c| c.log_weight))
    }

    pub fn cardinality_distribution(&self) -> Vec<f64> {
        let max = self.components.iter().map(|c| c.labels.len()).max().unwrap_or(0);
        let lm = self.log_mass();
        let mut pmf = vec![0.0; max + 1];
        for c in &self.components {
            pmf[c.labels.len()] += (c.log_weight - lm).exp();
        }
        pmf
    }
}

/// Sums the δ-GLMB over association histories:
/// `w(I) = Σ_ξ w^{(ξ)}(I)` and `p(·,ℓ;I) = Σ_ξ w^{(ξ)}(I) p^{(ξ)}(·,ℓ) / w(I)`.
///
/// The result is normalized; a label's pdf keeps its shared allocation when
/// only one history contributes (or all contributors share it).
pub fn marginalize_delta_glmb(d: &DeltaGlmbDensity) -> MdGlmbDensity {
    let mut groups: BTreeMap<&LabelSet, Vec<&DeltaComponent>> = BTreeMap::new();
    for c in &d.components {
        if c.log_weight > f64::NEG_INFINITY {
            groups.entry(&c.labels).or_default().push(c);
        }
    }
    let mut out = BTreeMap::new();
    for (set, members) in groups {
        let log_w = log_sum_exp(members.iter().map(|c| c.log_weight));
        let mut pdfs = Vec::with_capacity(set.len());
        for pos in 0..set.len() {
            let first = &members[0].pdfs[pos];
            if members.iter().all(|c| Arc::ptr_eq(&c.pdfs[pos], first)) {
                pdfs.push(first.clone());
                continue;
            }
            let mut gm = GaussianMixture::empty();
            for c in &members {
                let p = &c.pdfs[pos];
                gm.extend_from(p, c.log_weight - log_w - p.log_mass());
            }
            pdfs.push(Arc::new(gm));
        }
        out.insert(
            set.clone(),
            Hypothesis {
                log_weight: log_w,
                pdfs,
            },
        );
    }
    let mut m = MdGlmbDensity::from_map(out);
    m.normalize();
    m
}
