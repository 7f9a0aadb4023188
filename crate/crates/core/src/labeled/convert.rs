use std::collections::BTreeMap;
use super::lmb::Bernoulli;
use super::subsets::k_best_bernoulli_subsets;
use super::{Hypothesis, LabelSet, LmbDensity, MdGlmbDensity};

/// LMB with the same per-label existence mass and label-conditional mixture;
/// preserves the unlabeled first moment.
pub fn lmb_from_mdglmb(d: &MdGlmbDensity) -> LmbDensity {
    let mut out = LmbDensity::empty();
    for l in d.labels() {
        let (r, pdf) = d.intensity_shared(&l);
        if r > 0.0 {
            out.insert_unchecked(
                l,
                Bernoulli {
                    existence: r.min(1.0),
                    pdf,
                },
            );
        }
    }
    out
}

/// Expands an LMB into label-set hypotheses
/// `w(I) = ∏_{ℓ∉I}(1−r(ℓ)) ∏_{ℓ∈I} r(ℓ)`.
///
/// With `max_hypotheses = None` every subset with nonzero weight is produced;
/// otherwise the heaviest ones are kept (exact K-best) and renormalized.
pub fn lmb_to_mdglmb(d: &LmbDensity, max_hypotheses: Option<usize>) -> MdGlmbDensity {
    let entries: Vec<_> = d.iter().collect();
    let r: Vec<f64> = entries.iter().map(|(_, b)| b.existence).collect();
    let limit = max_hypotheses.unwrap_or(usize::MAX);
    let subsets = k_best_bernoulli_subsets(&r, limit);
    let mut map = BTreeMap::new();
    for s in subsets {
        let labels = s.included.iter().map(|&i| *entries[i].0).collect();
        let pdfs = s.included.iter().map(|&i| entries[i].1.pdf.clone()).collect();
        map.insert(
            LabelSet::from_sorted_unchecked(labels),
            Hypothesis {
                log_weight: s.log_weight,
                pdfs,
            },
        );
    }
    let mut out = MdGlmbDensity::from_map(map);
    out.normalize();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gm::{Gaussian, GaussianMixture};
    use crate::labeled::Label;

    fn g() -> GaussianMixture {
        GaussianMixture::single(Gaussian::scalar(0.0, 1.0).unwrap())
    }

    #[test]
    fn single_birth_expansion() {
        let l = Label::new(3, 1);
        let d = LmbDensity::from_entries(vec![(l, 0.09, g())]).unwrap();
        let m = lmb_to_mdglmb(&d, None);
        assert_eq!(m.len(), 2);
        let w0 = m.get(&LabelSet::empty()).unwrap().log_weight.exp();
        let w1 = m.get(&LabelSet::from_labels(vec![l]).unwrap()).unwrap().log_weight.exp();
        assert!((w0 - 0.91).abs() < 1e-15);
        assert!((w1 - 0.09).abs() < 1e-15);
    }

    #[test]
    fn zero_existence_gives_empty_hypothesis_only() {
        let d = LmbDensity::from_entries(vec![(Label::new(0, 1), 0.0, g()), (Label::new(0, 2), 0.0, g())])
            .unwrap();
        let m = lmb_to_mdglmb(&d, None);
        assert_eq!(m.len(), 1);
        assert!(m.contains(&LabelSet::empty()));
    }

    #[test]
    fn half_existence_from_two_hypotheses() {
        let l = Label::new(0, 1);
        let m = MdGlmbDensity::from_weighted(vec![(vec![], 0.5, vec![]), (vec![l], 0.5, vec![g()])]).unwrap();
        let lmb = lmb_from_mdglmb(&m);
        assert!((lmb.get(&l).unwrap().existence - 0.5).abs() < 1e-15);
    }

    #[test]
    fn uniform_over_two_label_subsets() {
        let a = Label::new(0, 1);
        let b = Label::new(0, 2);
        let m = MdGlmbDensity::from_weighted(vec![
            (vec![], 0.25, vec![]),
            (vec![a], 0.25, vec![g()]),
            (vec![b], 0.25, vec![g()]),
            (vec![a, b], 0.25, vec![g(), g()]),
        ])
        .unwrap();
        let lmb = lmb_from_mdglmb(&m);
        assert!((lmb.get(&a).unwrap().existence - 0.5).abs() < 1e-15);
        assert!((lmb.get(&b).unwrap().existence - 0.5).abs() < 1e-15);
    }

    #[test]
    fn truncated_expansion_renormalizes() {
        let d = LmbDensity::from_entries((1..=6).map(|i| (Label::new(0, i), 0.3, g()))).unwrap();
        let m = lmb_to_mdglmb(&d, Some(10));
        assert_eq!(m.len(), 10);
        assert!(m.is_normalized(1e-12));
        assert!(m.contains(&LabelSet::empty()));
    }
}
