//! Labeled random finite set densities: labels, LMB, Mδ-GLMB and δ-GLMB, plus
//! conversions between them and the wire format nodes exchange.

mod convert;
mod delta;
mod label;
mod lmb;
mod mdglmb;
pub mod subsets;
pub mod wire;

pub use convert::{lmb_from_mdglmb, lmb_to_mdglmb};
pub use delta::{marginalize_delta_glmb, DeltaComponent, DeltaGlmbDensity};
pub use label::{Label, LabelSet};
pub use lmb::{Bernoulli, LmbDensity};
pub use mdglmb::{Hypothesis, MdGlmbDensity};

use crate::gm::GaussianMixture;

/// A labeled track: label plus location pdf.
#[derive(Debug, Clone, PartialEq)]
pub struct Track {
    pub label: Label,
    pub pdf: GaussianMixture,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LabelError {
    #[error("duplicate label {0}")]
    DuplicateLabel(Label),
    #[error("duplicate hypothesis {0}")]
    DuplicateHypothesis(String),
    #[error("hypothesis has {labels} labels but {pdfs} pdfs")]
    PdfCountMismatch { labels: usize, pdfs: usize },
    #[error("existence probability {0} outside [0, 1]")]
    InvalidExistence(f64),
    #[error("invalid weight {0}")]
    InvalidWeight(f64),
    #[error("wire format: {0}")]
    Wire(String),
}

/// `ρ(n)` of an Mδ-GLMB.
pub fn cardinality_distribution_mdglmb(d: &MdGlmbDensity) -> Vec<f64> {
    d.cardinality_distribution()
}

/// `ρ(n)` of an LMB.
pub fn cardinality_distribution_lmb(d: &LmbDensity) -> Vec<f64> {
    d.cardinality_distribution()
}

/// Existence mass and label-conditional mixture of `ℓ` in an Mδ-GLMB.
pub fn intensity_mdglmb(d: &MdGlmbDensity, label: &Label) -> (f64, GaussianMixture) {
    d.intensity(label)
}
