//! Gaussian and Gaussian-mixture algebra.

pub(crate) mod chernoff;
mod gaussian;
mod mixture;
mod reduce;

pub use chernoff::{chernoff_weight, gaussian_ci, gm_chernoff_multi, gm_chernoff_pair, log_beta};
pub use gaussian::{Gaussian, InformationPair};
pub use mixture::{Component, GaussianMixture};
pub use reduce::{gm_merge_prune_cap, Reduction};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GmError {
    #[error("covariance is not positive definite (eigenvalues in [{min_eig}, {max_eig}])")]
    NotPositiveDefinite { min_eig: f64, max_eig: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("non-finite mean")]
    NonFinite,
    #[error("fusion exponent {0} outside [0, 1]")]
    InvalidExponent(f64),
    #[error("exponent {0} is degenerate for the pairwise weight; use the input directly")]
    DegenerateExponent(f64),
    #[error("invalid weight {0}")]
    InvalidWeight(f64),
    #[error("mixture has no components")]
    EmptyMixture,
    #[error("all pairwise fusion weights underflowed")]
    EmptyFusion,
}
