use std::collections::BTreeMap;
use std::sync::Arc;

use super::{Label, LabelError};
use crate::gm::GaussianMixture;

/// Existence probability and location pdf of one labeled Bernoulli component.
#[derive(Debug, Clone, PartialEq)]
pub struct Bernoulli {
    pub existence: f64,
    pub pdf: Arc<GaussianMixture>,
}

/// Labeled multi-Bernoulli density `{(r(ℓ), p(·,ℓ))}`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LmbDensity {
    entries: BTreeMap<Label, Bernoulli>,
}

impl LmbDensity {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn from_entries<I>(items: I) -> Result<Self, LabelError>
    where
        I: IntoIterator<Item = (Label, f64, GaussianMixture)>,
    {
        let mut out = Self::default();
        for (l, r, p) in items {
            out.insert(l, r, Arc::new(p))?;
        }
        Ok(out)
    }

    pub fn insert(&mut self, label: Label, existence: f64, pdf: Arc<GaussianMixture>) -> Result<(), LabelError> {
        if !(0.0..=1.0).contains(&existence) {
            return Err(LabelError::InvalidExistence(existence));
        }
        if self.entries.contains_key(&label) {
            return Err(LabelError::DuplicateLabel(label));
        }
        self.entries.insert(label, Bernoulli { existence, pdf });
        Ok(())
    }

    pub(crate) fn insert_unchecked(&mut self, label: Label, b: Bernoulli) {
        self.entries.insert(label, b);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, l: &Label) -> Option<&Bernoulli> {
        self.entries.get(l)
    }

    pub fn iter(&self) -> std::collections::btree_map::Iter<'_, Label, Bernoulli> {
        self.entries.iter()
    }

    pub fn labels(&self) -> Vec<Label> {
        self.entries.keys().cloned().collect()
    }

    pub fn retain<F: FnMut(&Label, &Bernoulli) -> bool>(&mut self, mut f: F) {
        self.entries.retain(|l, b| f(l, b));
    }

    pub fn map_pdfs<F>(&mut self, mut f: F)
    where
        F: FnMut(&Label, &GaussianMixture) -> GaussianMixture,
    {
        for (l, b) in self.entries.iter_mut() {
            b.pdf = Arc::new(f(l, &b.pdf));
        }
    }

    pub fn map_pdfs_shared<F>(&mut self, mut f: F)
    where
        F: FnMut(&Arc<GaussianMixture>) -> Arc<GaussianMixture>,
    {
        for b in self.entries.values_mut() {
            b.pdf = f(&b.pdf);
        }
    }

    /// Cardinality pmf of the sum of independent Bernoullis, by convolution.
    pub fn cardinality_distribution(&self) -> Vec<f64> {
        let mut pmf = vec![1.0];
        for b in self.entries.values() {
            let r = b.existence;
            let mut next = vec![0.0; pmf.len() + 1];
            for (n, p) in pmf.iter().enumerate() {
                next[n] += p * (1.0 - r);
                next[n + 1] += p * r;
            }
            pmf = next;
        }
        pmf
    }

    pub fn expected_cardinality(&self) -> f64 {
        self.entries.values().map(|b| b.existence).sum()
    }
}
