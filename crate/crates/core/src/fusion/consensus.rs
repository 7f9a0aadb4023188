use std::sync::Arc;

use rayon::prelude::*;

use super::{fuse_lmb, fuse_mdglmb, ConsensusMatrix, FusionError, NetworkGraph};
use crate::gm::{GaussianMixture, Reduction};
use crate::labeled::wire::{lmb_nominal_bytes, lmb_wire_len, mdglmb_nominal_bytes, mdglmb_wire_len};
use crate::labeled::{LmbDensity, MdGlmbDensity};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConsensusConfig {
    pub merge_threshold: f64,
    pub truncation_threshold: f64,
    pub max_components: usize,
    /// Reduce operands and intermediate results of each pairwise fusion.
    pub premerge: bool,
    /// State dimension used by the nominal byte formula.
    pub state_dim: usize,
}

impl Default for ConsensusConfig {
    fn default() -> Self {
        Self {
            merge_threshold: 4.0,
            truncation_threshold: 1e-4,
            max_components: 25,
            premerge: true,
            state_dim: 4,
        }
    }
}

impl ConsensusConfig {
    pub fn reduction(&self) -> Reduction {
        Reduction {
            merge_threshold: self.merge_threshold,
            truncation_threshold: self.truncation_threshold,
            max_components: self.max_components,
        }
    }

    fn reduce(&self, p: &GaussianMixture) -> GaussianMixture {
        self.reduction().apply(p)
    }
}

/// A labeled density that can be averaged and exchanged.
pub trait Fusable: Clone + Send + Sync + Sized {
    fn fuse(inputs: &[(&Self, f64)], reduction: Option<Reduction>) -> Result<Self, FusionError>;
    /// Density used when fusion has nothing in common to keep.
    fn fallback() -> Self;
    fn reduce_pdfs(&mut self, cfg: &ConsensusConfig);
    fn nominal_bytes(&self, state_dim: usize) -> usize;
    fn wire_bytes(&self) -> usize;
}

fn reduce_shared<'a>(pdfs: impl Iterator<Item = &'a mut Arc<GaussianMixture>>, cfg: &ConsensusConfig) {
    let mut done: std::collections::HashMap<usize, Arc<GaussianMixture>> = Default::default();
    for p in pdfs {
        let key = Arc::as_ptr(p) as usize;
        *p = done.entry(key).or_insert_with(|| Arc::new(cfg.reduce(p))).clone();
    }
}

impl Fusable for MdGlmbDensity {
    fn fuse(inputs: &[(&Self, f64)], reduction: Option<Reduction>) -> Result<Self, FusionError> {
        fuse_mdglmb(inputs, reduction)
    }
    fn fallback() -> Self {
        MdGlmbDensity::no_objects()
    }
    fn reduce_pdfs(&mut self, cfg: &ConsensusConfig) {
        reduce_shared(self.hypotheses_mut().flat_map(|(_, h)| h.pdfs.iter_mut()), cfg);
    }
    fn nominal_bytes(&self, state_dim: usize) -> usize {
        mdglmb_nominal_bytes(self, state_dim)
    }
    fn wire_bytes(&self) -> usize {
        mdglmb_wire_len(self)
    }
}

impl Fusable for LmbDensity {
    fn fuse(inputs: &[(&Self, f64)], reduction: Option<Reduction>) -> Result<Self, FusionError> {
        fuse_lmb(inputs, reduction)
    }
    fn fallback() -> Self {
        LmbDensity::empty()
    }
    fn reduce_pdfs(&mut self, cfg: &ConsensusConfig) {
        let mut done: std::collections::HashMap<usize, Arc<GaussianMixture>> = Default::default();
        self.map_pdfs_shared(|p| {
            done.entry(Arc::as_ptr(p) as usize)
                .or_insert_with(|| Arc::new(cfg.reduce(p)))
                .clone()
        });
    }
    fn nominal_bytes(&self, state_dim: usize) -> usize {
        lmb_nominal_bytes(self, state_dim)
    }
    fn wire_bytes(&self) -> usize {
        lmb_wire_len(self)
    }
}

/// Traffic of a consensus run: one broadcast per node per round.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize)]
pub struct ExchangeStats {
    pub messages: u64,
    /// Bytes by the single-precision, one-Gaussian-per-label formula.
    pub nominal_bytes: u64,
    /// Bytes of the JSON payload actually serialized.
    pub wire_bytes: u64,
    /// Nodes whose fusion had an empty hypothesis intersection.
    pub fallbacks: u64,
}

impl std::ops::AddAssign for ExchangeStats {
    fn add_assign(&mut self, o: Self) {
        self.messages += o.messages;
        self.nominal_bytes += o.nominal_bytes;
        self.wire_bytes += o.wire_bytes;
        self.fallbacks += o.fallbacks;
    }
}

/// `rounds` synchronous consensus iterations: every node fuses the previous
/// round's densities of its in-neighbours with its row of `omega`, then merges
/// each pdf.
pub fn consensus_run<D: Fusable>(
    nodes: &[D],
    g: &NetworkGraph,
    omega: &ConsensusMatrix,
    rounds: usize,
    cfg: &ConsensusConfig,
) -> Result<(Vec<D>, ExchangeStats), FusionError> {
    assert_eq!(nodes.len(), g.len(), "one density per node");
    let reduction = cfg.premerge.then(|| cfg.reduction());
    let mut current: Vec<D> = nodes.to_vec();
    let mut stats = ExchangeStats::default();
    for _ in 0..rounds {
        for d in &current {
            stats.messages += 1;
            stats.nominal_bytes += d.nominal_bytes(cfg.state_dim) as u64;
            stats.wire_bytes += d.wire_bytes() as u64;
        }
        let next: Vec<Result<(D, bool), FusionError>> = (0..current.len())
            .into_par_iter()
            .map(|i| {
                let inputs: Vec<(&D, f64)> = g.in_neighbours(i).into_iter().map(|j| (&current[j], omega.get(i, j))).collect();
                let (mut fused, fell_back) = match D::fuse(&inputs, reduction) {
                    Ok(d) => (d, false),
                    Err(FusionError::EmptyIntersection) => {
                        log::warn!("node {i}: no common hypothesis with in-neighbours; reset to empty density");
                        (D::fallback(), true)
                    }
                    Err(e) => return Err(e),
                };
                fused.reduce_pdfs(cfg);
                Ok((fused, fell_back))
            })
            .collect();
        current = Vec::with_capacity(next.len());
        for r in next {
            let (d, fell_back) = r?;
            stats.fallbacks += fell_back as u64;
            current.push(d);
        }
    }
    Ok((current, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fusion::metropolis_weights;
    use crate::gm::Gaussian;
    use crate::labeled::Label;

    fn g(m: f64, v: f64) -> GaussianMixture {
        GaussianMixture::single(Gaussian::scalar(m, v).unwrap())
    }

    #[test]
    fn zero_rounds_is_identity() {
        let graph = NetworkGraph::complete(2);
        let w = metropolis_weights(&graph).unwrap();
        let a = LmbDensity::from_entries(vec![(Label::new(0, 1), 0.3, g(0.0, 1.0))]).unwrap();
        let b = LmbDensity::from_entries(vec![(Label::new(0, 1), 0.6, g(1.0, 1.0))]).unwrap();
        let (out, stats) = consensus_run(&[a.clone(), b.clone()], &graph, &w, 0, &ConsensusConfig::default()).unwrap();
        assert_eq!(out, vec![a, b]);
        assert_eq!(stats, ExchangeStats::default());
    }

    #[test]
    fn two_nodes_converge_to_unweighted_average() {
        let graph = NetworkGraph::complete(2);
        let w = metropolis_weights(&graph).unwrap();
        let l = Label::new(0, 1);
        let a = LmbDensity::from_entries(vec![(l, 0.3, g(0.0, 1.0))]).unwrap();
        let b = LmbDensity::from_entries(vec![(l, 0.6, g(1.0, 2.0))]).unwrap();
        let direct = fuse_lmb(&[(&a, 0.5), (&b, 0.5)], None).unwrap();
        let (out, stats) = consensus_run(&[a, b], &graph, &w, 60, &ConsensusConfig::default()).unwrap();
        let want = direct.get(&l).unwrap();
        for d in &out {
            let got = d.get(&l).unwrap();
            assert!((got.existence - want.existence).abs() < 1e-9);
            assert!((got.pdf.mean().unwrap()[0] - want.pdf.mean().unwrap()[0]).abs() < 1e-9);
        }
        assert_eq!(stats.messages, 120);
        assert_eq!(stats.nominal_bytes, 120 * 4 * (1 + 14));
    }

    #[test]
    fn empty_intersection_falls_back() {
        let graph = NetworkGraph::complete(2);
        let w = metropolis_weights(&graph).unwrap();
        let a = MdGlmbDensity::from_weighted(vec![(vec![Label::new(0, 1)], 1.0, vec![g(0.0, 1.0)])]).unwrap();
        let b = MdGlmbDensity::from_weighted(vec![(vec![Label::new(0, 2)], 1.0, vec![g(0.0, 1.0)])]).unwrap();
        let (out, stats) = consensus_run(&[a, b], &graph, &w, 1, &ConsensusConfig::default()).unwrap();
        assert_eq!(stats.fallbacks, 2);
        assert_eq!(out[0], MdGlmbDensity::no_objects());
    }
}
