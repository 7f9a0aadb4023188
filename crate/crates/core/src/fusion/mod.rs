//! Kullback-Leibler averaging of labeled densities and consensus over a sensor graph.

mod consensus;
mod graph;
mod kla;

pub use consensus::{consensus_run, ConsensusConfig, ExchangeStats, Fusable};
pub use graph::{consensus_matrix_power_check, metropolis_weights, ConsensusMatrix, NetworkGraph, PowerCheck};
pub use kla::{fuse_lmb, fuse_mdglmb};

use crate::gm::GmError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FusionError {
    #[error("edge ({}, {}) names a node outside 0..{nodes}", edge.0, edge.1)]
    UnknownNode { edge: (usize, usize), nodes: usize },
    #[error("arc ({}, {}) has no reverse; an undirected graph is required", .0.0, .0.1)]
    NotUndirected((usize, usize)),
    #[error("graph is not strongly connected")]
    Disconnected,
    #[error("invalid consensus matrix: {0}")]
    InvalidConsensusMatrix(String),
    #[error("fusion weights must be non-negative and sum to 1 (got {0:?})")]
    InvalidWeights(Vec<f64>),
    #[error("no input has positive weight")]
    NoInputs,
    #[error("inputs share no hypothesis with nonzero fused weight")]
    EmptyIntersection,
    #[error(transparent)]
    Gm(#[from] GmError),
}
