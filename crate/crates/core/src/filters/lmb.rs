use std::sync::Arc;

use super::mdglmb::{predict_survivor, update_components};
use super::{ranked_assignments, FilterConfig, FilterError};
use crate::labeled::{lmb_from_mdglmb, lmb_to_mdglmb, marginalize_delta_glmb, Bernoulli, DeltaGlmbDensity, LmbDensity};
use crate::models::{BirthModel, MotionModel};
use crate::sensors::SensorModel;

/// LMB prediction: survivors get `r_S = ⟨P_S, p⟩ r` and predicted pdfs; birth
/// entries with labels `(k, i)` are appended.
pub fn lmb_predict(posterior: &LmbDensity, motion: &MotionModel, birth: &BirthModel, k: u32) -> Result<LmbDensity, FilterError> {
    let mut out = LmbDensity::empty();
    for (l, b) in posterior.iter() {
        let (ps, pdf) = predict_survivor(&b.pdf, *l, k, motion)?;
        let r = b.existence * ps;
        if r > 0.0 {
            out.insert_unchecked(
                *l,
                Bernoulli {
                    existence: r,
                    pdf: Arc::new(pdf),
                },
            );
        }
    }
    for (l, b) in birth.at(k).iter() {
        out.insert_unchecked(*l, b.clone());
    }
    Ok(out)
}

/// LMB update: expand to the ranked label-set hypotheses, run the GLMB update,
/// and collapse back to one Bernoulli per label.
pub fn lmb_update(predicted: &LmbDensity, z: &[f64], sensor: &SensorModel, k: u32, cfg: &FilterConfig) -> LmbDensity {
    let expanded = lmb_to_mdglmb(predicted, Some(cfg.max_hypotheses));
    let kb = cfg.assignments_per_hypothesis;
    let comps = update_components(&expanded, z, sensor, k, cfg, |lp| ranked_assignments(lp, kb));
    let md = marginalize_delta_glmb(&DeltaGlmbDensity::new(comps));
    let mut out = lmb_from_mdglmb(&md);
    out.retain(|_, b| b.existence >= cfg.existence_threshold);
    let keep: std::collections::HashSet<usize> = predicted.iter().map(|(_, b)| Arc::as_ptr(&b.pdf) as usize).collect();
    out.map_pdfs_shared(|p| {
        if keep.contains(&(Arc::as_ptr(p) as usize)) {
            p.clone()
        } else {
            Arc::new(cfg.reduce(p))
        }
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filters::ProbabilityModel;
    use crate::gm::{Gaussian, GaussianMixture};
    use crate::labeled::Label;
    use crate::models::BirthEntry;
    use nalgebra::DMatrix;

    fn g1(m: f64, v: f64) -> GaussianMixture {
        GaussianMixture::single(Gaussian::scalar(m, v).unwrap())
    }

    fn cfg() -> FilterConfig {
        FilterConfig {
            hypothesis_threshold: 0.0,
            existence_threshold: 0.0,
            merge_threshold: 0.0,
            ..FilterConfig::default()
        }
    }

    #[test]
    fn constant_survival_scales_existence() {
        let motion = MotionModel {
            transition: DMatrix::identity(1, 1),
            process_noise: DMatrix::from_element(1, 1, 1.0),
            survival: ProbabilityModel::Constant(0.99),
        };
        let birth = BirthModel {
            entries: (1..=10)
                .map(|i| BirthEntry {
                    index: i,
                    existence: 0.09,
                    pdf: g1(i as f64, 1.0),
                })
                .collect(),
        };
        let prior = LmbDensity::from_entries(vec![(Label::new(0, 1), 0.5, g1(0.0, 1.0))]).unwrap();
        let out = lmb_predict(&prior, &motion, &birth, 4).unwrap();
        assert_eq!(out.len(), 11);
        assert!((out.get(&Label::new(0, 1)).unwrap().existence - 0.495).abs() < 1e-15);
        assert_eq!(out.get(&Label::new(4, 7)).unwrap().existence, 0.09);

        let empty = lmb_predict(&LmbDensity::empty(), &motion, &birth, 0).unwrap();
        assert_eq!(empty.len(), 10);
    }

    #[test]
    fn age_dependent_survival() {
        let motion = MotionModel {
            transition: DMatrix::identity(1, 1),
            process_noise: DMatrix::from_element(1, 1, 1.0),
            survival: ProbabilityModel::per_label(|l: Label, k| if k - l.birth_time > 3 { 0.5 } else { 0.99 }),
        };
        let prior = LmbDensity::from_entries(vec![(Label::new(0, 1), 0.8, g1(0.0, 1.0)), (Label::new(3, 1), 0.8, g1(0.0, 1.0))]).unwrap();
        let out = lmb_predict(&prior, &motion, &BirthModel::default(), 5).unwrap();
        assert!((out.get(&Label::new(0, 1)).unwrap().existence - 0.4).abs() < 1e-15);
        assert!((out.get(&Label::new(3, 1)).unwrap().existence - 0.792).abs() < 1e-15);
    }

    #[test]
    fn vacuous_update() {
        let pred = LmbDensity::from_entries(vec![(Label::new(0, 1), 0.3, g1(0.0, 1.0)), (Label::new(0, 2), 0.6, g1(4.0, 1.0))]).unwrap();
        let s = SensorModel::linear(vec![1.0], 1.0, 0.0, 0.0, (-10.0, 10.0));
        let out = lmb_update(&pred, &[], &s, 0, &cfg());
        for (l, b) in pred.iter() {
            let o = out.get(l).unwrap();
            assert!((o.existence - b.existence).abs() < 1e-12);
            assert_eq!(o.pdf, b.pdf);
        }
    }

    #[test]
    fn single_entry_single_measurement() {
        let r = 0.4;
        let pred = LmbDensity::from_entries(vec![(Label::new(0, 1), r, g1(0.0, 3.0))]).unwrap();
        let s = SensorModel::linear(vec![1.0], 1.0, 2.0, 0.9, (-50.0, 50.0));
        let out = lmb_update(&pred, &[1.0], &s, 0, &cfg());
        let kappa: f64 = 2.0 / 100.0;
        let q = (-0.5 * (1.0 / 4.0f64)).exp() / (2.0 * std::f64::consts::PI * 4.0).sqrt();
        // (I, θ) pairs: (∅, −), ({ℓ}, miss), ({ℓ}, z).
        let w0 = 1.0 - r;
        let w_miss = r * 0.1;
        let w_det = r * 0.9 * q / kappa;
        let want = (w_miss + w_det) / (w0 + w_miss + w_det);
        assert!((out.get(&Label::new(0, 1)).unwrap().existence - want).abs() < 1e-12);
    }
}
