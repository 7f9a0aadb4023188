//! Local filtering: Mδ-GLMB and LMB recursions with Gaussian-mixture pdfs.

mod estimate;
mod likelihood;
mod lmb;
mod mdglmb;
mod ranked;

use std::collections::HashMap;
use std::sync::Arc;

pub use estimate::{extract_estimates_lmb, extract_estimates_mdglmb, Estimate};
pub use likelihood::psi_bar;
pub use lmb::{lmb_predict, lmb_update};
pub use mdglmb::{centralized_mdglmb_step, mdglmb_predict, mdglmb_update, mdglmb_update_with};
pub use ranked::{all_assignments, ranked_assignments, AssociationMap};

pub use crate::models::{BirthEntry, BirthModel, MotionModel, ProbabilityModel};

use crate::gm::{gm_merge_prune_cap, GaussianMixture, GmError};
use crate::sensors::UtParams;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FilterError {
    #[error(transparent)]
    Gm(#[from] GmError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterConfig {
    /// Hypothesis cap `I_max` after prediction and update.
    pub max_hypotheses: usize,
    /// Association maps generated per hypothesis.
    pub assignments_per_hypothesis: usize,
    pub merge_threshold: f64,
    pub truncation_threshold: f64,
    pub max_components: usize,
    /// Hypotheses with normalized weight below this are dropped.
    pub hypothesis_threshold: f64,
    /// LMB entries with existence below this are dropped after update.
    pub existence_threshold: f64,
    pub ut: UtParams,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self {
            max_hypotheses: 3000,
            assignments_per_hypothesis: 20,
            merge_threshold: 4.0,
            truncation_threshold: 1e-4,
            max_components: 25,
            hypothesis_threshold: 1e-6,
            existence_threshold: 1e-3,
            ut: UtParams::default(),
        }
    }
}

impl FilterConfig {
    pub(crate) fn reduce(&self, p: &GaussianMixture) -> GaussianMixture {
        gm_merge_prune_cap(p, self.merge_threshold, self.truncation_threshold, self.max_components)
    }
}

/// Applies merge/prune/cap to every pdf not in `keep`, once per allocation.
pub(crate) fn reduce_new_pdfs<'a, I>(pdfs: I, keep: &std::collections::HashSet<usize>, cfg: &FilterConfig)
where
    I: Iterator<Item = &'a mut Arc<GaussianMixture>>,
{
    let mut done: HashMap<usize, Arc<GaussianMixture>> = HashMap::new();
    for p in pdfs {
        let key = Arc::as_ptr(p) as usize;
        if keep.contains(&key) {
            continue;
        }
        let reduced = done.entry(key).or_insert_with(|| Arc::new(cfg.reduce(p))).clone();
        *p = reduced;
    }
}
