use std::collections::BTreeMap;
use std::sync::Arc;

use super::{Label, LabelError, LabelSet};
use crate::gm::GaussianMixture;
use crate::linalg::log_sum_exp;

/// One Mδ-GLMB component: a weight and one location pdf per label of its set.
#[derive(Debug, Clone, PartialEq)]
pub struct Hypothesis {
    pub log_weight: f64,
    /// Aligned with the label order of the owning [`LabelSet`].
    pub pdfs: Vec<Arc<GaussianMixture>>,
}

/// Marginalized δ-GLMB density `{(w(I), p(·;I))}` keyed by label set.
///
/// Iteration order is the canonical label-set order, so every operation on
/// a density is deterministic.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MdGlmbDensity {
    hypotheses: BTreeMap<LabelSet, Hypothesis>,
}

impl MdGlmbDensity {
    /// The density with only the empty hypothesis: no objects.
    pub fn no_objects() -> Self {
        let mut hypotheses = BTreeMap::new();
        hypotheses.insert(
            LabelSet::empty(),
            Hypothesis {
                log_weight: 0.0,
                pdfs: Vec::new(),
            },
        );
        Self { hypotheses }
    }

    pub fn from_hypotheses<I>(items: I) -> Result<Self, LabelError>
    where
        I: IntoIterator<Item = (LabelSet, Hypothesis)>,
    {
        let mut hypotheses = BTreeMap::new();
        for (set, h) in items {
            if h.pdfs.len() != set.len() {
                return Err(LabelError::PdfCountMismatch {
                    labels: set.len(),
                    pdfs: h.pdfs.len(),
                });
            }
            if h.log_weight.is_nan() {
                return Err(LabelError::InvalidWeight(h.log_weight));
            }
            if hypotheses.insert(set.clone(), h).is_some() {
                return Err(LabelError::DuplicateHypothesis(set.to_string()));
            }
        }
        Ok(Self { hypotheses })
    }

    /// Convenience builder from linear weights and owned pdfs.
    pub fn from_weighted(
        items: Vec<(Vec<Label>, f64, Vec<GaussianMixture>)>,
    ) -> Result<Self, LabelError> {
        let mut out = Vec::with_capacity(items.len());
        for (labels, w, pdfs) in items {
            if labels.len() != pdfs.len() {
                return Err(LabelError::PdfCountMismatch {
                    labels: labels.len(),
                    pdfs: pdfs.len(),
                });
            }
            let mut pairs: Vec<(Label, GaussianMixture)> = labels.into_iter().zip(pdfs).collect();
            pairs.sort_by_key(|(l, _)| *l);
            let set = LabelSet::from_labels(pairs.iter().map(|(l, _)| *l).collect())?;
            out.push((
                set,
                Hypothesis {
                    log_weight: crate::linalg::ln_clamped(w),
                    pdfs: pairs.into_iter().map(|(_, p)| Arc::new(p)).collect(),
                },
            ));
        }
        Self::from_hypotheses(out)
    }

    pub(crate) fn from_map(hypotheses: BTreeMap<LabelSet, Hypothesis>) -> Self {
        Self { hypotheses }
    }

    pub fn len(&self) -> usize {
        self.hypotheses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hypotheses.is_empty()
    }

    pub fn iter(&self) -> std::collections::btree_map::Iter<'_, LabelSet, Hypothesis> {
        self.hypotheses.iter()
    }

    pub fn get(&self, set: &LabelSet) -> Option<&Hypothesis> {
        self.hypotheses.get(set)
    }

    pub fn contains(&self, set: &LabelSet) -> bool {
        self.hypotheses.contains_key(set)
    }

    pub fn hypotheses_mut(&mut self) -> impl Iterator<Item = (&LabelSet, &mut Hypothesis)> {
        self.hypotheses.iter_mut()
    }

    /// Union of all labels appearing in any hypothesis.
    pub fn labels(&self) -> Vec<Label> {
        let mut v: Vec<Label> = self.hypotheses.keys().flat_map(|s| s.iter().cloned()).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn log_mass(&self) -> f64 {
        log_sum_exp(self.hypotheses.values().map(|h| h.log_weight))
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.log_mass()).abs() <= tol
    }

    /// Drops zero-weight hypotheses and rescales the rest to unit mass.
    pub fn normalize(&mut self) {
        self.hypotheses.retain(|_, h| h.log_weight > f64::NEG_INFINITY);
        let lm = self.log_mass();
        if lm.is_finite() {
            for h in self.hypotheses.values_mut() {
                h.log_weight -= lm;
            }
        }
    }

    /// Keeps the `max` heaviest hypotheses (ties: smaller label set) and renormalizes.
    pub fn truncate(&mut self, max: usize) {
        if self.hypotheses.len() > max {
            let mut ranked: Vec<(LabelSet, f64)> = self
                .hypotheses
                .iter()
                .map(|(s, h)| (s.clone(), h.log_weight))
                .collect();
            ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
            for (s, _) in ranked.into_iter().skip(max.max(1)) {
                self.hypotheses.remove(&s);
            }
        }
        self.normalize();
    }

    /// Drops hypotheses with normalized weight below `threshold`, always keeping the heaviest.
    pub fn prune(&mut self, threshold: f64) {
        let lm = self.log_mass();
        let best = self
            .hypotheses
            .values()
            .map(|h| h.log_weight)
            .fold(f64::NEG_INFINITY, f64::max);
        let ln_t = threshold.ln();
        self.hypotheses
            .retain(|_, h| h.log_weight == best || h.log_weight - lm >= ln_t);
        self.normalize();
    }

    /// `ρ(n) = Σ_{|I|=n} w(I)` for `n = 0..=max|I|`.
    pub fn cardinality_distribution(&self) -> Vec<f64> {
        let max = self.hypotheses.keys().map(|s| s.len()).max().unwrap_or(0);
        let lm = self.log_mass();
        let mut pmf = vec![0.0; max + 1];
        for (s, h) in &self.hypotheses {
            pmf[s.len()] += (h.log_weight - lm).exp();
        }
        pmf
    }

    pub fn expected_cardinality(&self) -> f64 {
        self.cardinality_distribution()
            .iter()
            .enumerate()
            .map(|(n, p)| n as f64 * p)
            .sum()
    }

    /// Existence mass `Σ_{I∋ℓ} w(I)` and the correspondingly weighted mixture of
    /// `p(·,ℓ;I)`. Unknown labels give zero mass and an empty mixture.
    pub fn intensity(&self, label: &Label) -> (f64, GaussianMixture) {
        let (r, p) = self.intensity_shared(label);
        (r, Arc::unwrap_or_clone(p))
    }

    /// As [`Self::intensity`]; hypotheses sharing one pdf allocation contribute
    /// it once, and a single distinct pdf is returned as is.
    pub(crate) fn intensity_shared(&self, label: &Label) -> (f64, Arc<GaussianMixture>) {
        let lm = self.log_mass();
        let mut parts: Vec<(Vec<f64>, &Arc<GaussianMixture>)> = Vec::new();
        for (s, h) in &self.hypotheses {
            if let Some(pos) = s.position(label) {
                let p = &h.pdfs[pos];
                match parts.iter_mut().find(|(_, q)| Arc::ptr_eq(q, p)) {
                    Some((ws, _)) => ws.push(h.log_weight - lm),
                    None => parts.push((vec![h.log_weight - lm], p)),
                }
            }
        }
        if parts.is_empty() {
            return (0.0, Arc::new(GaussianMixture::empty()));
        }
        let parts: Vec<(f64, &Arc<GaussianMixture>)> =
            parts.into_iter().map(|(ws, p)| (log_sum_exp(ws), p)).collect();
        let log_r = log_sum_exp(parts.iter().map(|(w, _)| *w));
        if parts.len() == 1 {
            return (log_r.exp(), parts[0].1.clone());
        }
        let mut gm = GaussianMixture::empty();
        for (w, p) in parts {
            gm.extend_from(p, w - log_r - p.log_mass());
        }
        (log_r.exp(), Arc::new(gm))
    }

    /// The heaviest hypothesis, ties broken towards the smaller label set.
    pub fn heaviest(&self) -> Option<(&LabelSet, &Hypothesis)> {
        let mut best: Option<(&LabelSet, &Hypothesis)> = None;
        for (s, h) in &self.hypotheses {
            match best {
                Some((_, b)) if h.log_weight <= b.log_weight => {}
                _ => best = Some((s, h)),
            }
        }
        best
    }

    /// Applies `f` to every pdf.
    pub fn map_pdfs<F>(&mut self, mut f: F)
    where
        F: FnMut(&Label, &GaussianMixture) -> GaussianMixture,
    {
        for (s, h) in self.hypotheses.iter_mut() {
            for (l, p) in s.iter().zip(h.pdfs.iter_mut()) {
                *p = Arc::new(f(l, p));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gm::Gaussian;

    fn g(m: f64) -> GaussianMixture {
        GaussianMixture::single(Gaussian::scalar(m, 1.0).unwrap())
    }

    #[test]
    fn empty_only_has_unit_pmf() {
        assert_eq!(MdGlmbDensity::no_objects().cardinality_distribution(), vec![1.0]);
    }

    #[test]
    fn two_hypothesis_pmf() {
        let l = Label::new(0, 1);
        let d = MdGlmbDensity::from_weighted(vec![(vec![], 0.3, vec![]), (vec![l], 0.7, vec![g(0.0)])])
            .unwrap();
        let pmf = d.cardinality_distribution();
        assert!((pmf[0] - 0.3).abs() < 1e-15 && (pmf[1] - 0.7).abs() < 1e-15);
    }

    #[test]
    fn intensity_single_contributor() {
        let l = Label::new(0, 1);
        let d = MdGlmbDensity::from_weighted(vec![(vec![], 0.4, vec![]), (vec![l], 0.6, vec![g(3.0)])])
            .unwrap();
        let (r, p) = d.intensity(&l);
        assert!((r - 0.6).abs() < 1e-15);
        assert_eq!(p.len(), 1);
        assert_eq!(p.components()[0].gaussian.mean()[0], 3.0);
        let (r0, p0) = d.intensity(&Label::new(9, 9));
        assert_eq!(r0, 0.0);
        assert!(p0.is_empty());
    }

    #[test]
    fn pdf_count_must_match() {
        let l = Label::new(0, 1);
        assert!(MdGlmbDensity::from_weighted(vec![(vec![l], 1.0, vec![])]).is_err());
    }

    #[test]
    fn truncate_keeps_heaviest_and_renormalizes() {
        let a = Label::new(0, 1);
        let b = Label::new(0, 2);
        let mut d = MdGlmbDensity::from_weighted(vec![
            (vec![], 0.1, vec![]),
            (vec![a], 0.5, vec![g(0.0)]),
            (vec![b], 0.4, vec![g(1.0)]),
        ])
        .unwrap();
        d.truncate(2);
        assert_eq!(d.len(), 2);
        assert!(d.is_normalized(1e-12));
        assert!(!d.contains(&LabelSet::empty()));
    }
}
