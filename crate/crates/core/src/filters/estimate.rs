use nalgebra::DVector;

use crate::gm::GaussianMixture;
use crate::labeled::{Label, LmbDensity, MdGlmbDensity};

/// A labeled point estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    pub label: Label,
    pub state: DVector<f64>,
}

fn point(pdf: &GaussianMixture) -> Option<DVector<f64>> {
    pdf.heaviest().map(|c| c.gaussian.mean().clone())
}

fn map_cardinality(pmf: &[f64]) -> usize {
    let mut best = 0;
    for (n, p) in pmf.iter().enumerate() {
        if *p > pmf[best] {
            best = n;
        }
    }
    best
}

/// MAP cardinality, then the heaviest label set of that size (ties: the
/// lexicographically smaller set), each label at its heaviest component mean.
pub fn extract_estimates_mdglmb(d: &MdGlmbDensity) -> Vec<Estimate> {
    let n = map_cardinality(&d.cardinality_distribution());
    let mut best: Option<(&crate::labeled::LabelSet, f64, usize)> = None;
    for (idx, (s, h)) in d.iter().enumerate() {
        if s.len() != n {
            continue;
        }
        if best.is_none_or(|(_, w, _)| h.log_weight > w) {
            best = Some((s, h.log_weight, idx));
        }
    }
    let Some((set, _, _)) = best else {
        return Vec::new();
    };
    let h = d.get(set).expect("present");
    set.iter()
        .zip(&h.pdfs)
        .filter_map(|(l, p)| point(p).map(|state| Estimate { label: *l, state }))
        .collect()
}

/// MAP cardinality of the Bernoulli sum, then that many labels by descending
/// existence (ties: smaller label).
pub fn extract_estimates_lmb(d: &LmbDensity) -> Vec<Estimate> {
    let n = map_cardinality(&d.cardinality_distribution());
    let mut entries: Vec<_> = d.iter().collect();
    entries.sort_by(|a, b| b.1.existence.total_cmp(&a.1.existence).then_with(|| a.0.cmp(b.0)));
    entries
        .into_iter()
        .take(n)
        .filter_map(|(l, b)| point(&b.pdf).map(|state| Estimate { label: *l, state }))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gm::Gaussian;

    fn g(m: f64) -> GaussianMixture {
        GaussianMixture::single(Gaussian::scalar(m, 1.0).unwrap())
    }

    #[test]
    fn mdglmb_map_cardinality_zero() {
        let l = Label::new(0, 1);
        let d = MdGlmbDensity::from_weighted(vec![(vec![], 0.7, vec![]), (vec![l], 0.3, vec![g(1.0)])]).unwrap();
        assert!(extract_estimates_mdglmb(&d).is_empty());
    }

    #[test]
    fn mdglmb_single_estimate() {
        let l = Label::new(0, 1);
        let d = MdGlmbDensity::from_weighted(vec![(vec![], 0.2, vec![]), (vec![l], 0.8, vec![g(1.5)])]).unwrap();
        let e = extract_estimates_mdglmb(&d);
        assert_eq!(e.len(), 1);
        assert_eq!(e[0].label, l);
        assert_eq!(e[0].state[0], 1.5);
    }

    #[test]
    fn mdglmb_tie_prefers_smaller_set() {
        let a = Label::new(0, 1);
        let b = Label::new(0, 2);
        let d = MdGlmbDensity::from_weighted(vec![(vec![b], 0.5, vec![g(2.0)]), (vec![a], 0.5, vec![g(1.0)])]).unwrap();
        let e = extract_estimates_mdglmb(&d);
        assert_eq!(e[0].label, a);
    }

    #[test]
    fn lmb_greedy_selection() {
        let d = LmbDensity::from_entries(vec![
            (Label::new(0, 1), 0.9, g(1.0)),
            (Label::new(0, 2), 0.1, g(2.0)),
            (Label::new(0, 3), 0.8, g(3.0)),
        ])
        .unwrap();
        let labels: Vec<_> = extract_estimates_lmb(&d).iter().map(|e| e.label).collect();
        assert_eq!(labels, vec![Label::new(0, 1), Label::new(0, 3)]);

        let single = LmbDensity::from_entries(vec![(Label::new(0, 1), 0.09, g(0.0))]).unwrap();
        assert!(extract_estimates_lmb(&single).is_empty());

        let tie = LmbDensity::from_entries(vec![(Label::new(0, 2), 0.6, g(0.0)), (Label::new(0, 1), 0.6, g(0.0))]).unwrap();
        let e = extract_estimates_lmb(&tie);
        assert_eq!(e.len(), 1);
        assert_eq!(e[0].label, Label::new(0, 1));
    }
}
