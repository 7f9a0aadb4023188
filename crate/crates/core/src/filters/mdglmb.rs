use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use nalgebra::DMatrix;

use super::likelihood::TermCache;
use super::{ranked_assignments, reduce_new_pdfs, AssociationMap, FilterConfig, FilterError};
use crate::gm::{Component, GaussianMixture};
use crate::labeled::subsets::k_best_subsets;
use crate::labeled::{marginalize_delta_glmb, DeltaComponent, DeltaGlmbDensity, Label, LabelSet, MdGlmbDensity};
use crate::linalg::ln_clamped;
use crate::models::{BirthModel, MotionModel};
use crate::sensors::SensorModel;

/// `(P̄_S, predicted survivor pdf)` for one label pdf.
pub(crate) fn predict_survivor(
    pdf: &GaussianMixture,
    label: Label,
    k: u32,
    motion: &MotionModel,
) -> Result<(f64, GaussianMixture), FilterError> {
    let lm = pdf.log_mass();
    let ps = motion.survival.expect_components(pdf, label, k);
    let uniform = ps.windows(2).all(|w| w[0] == w[1]);
    let ps_bar: f64 = if uniform {
        ps.first().copied().unwrap_or(0.0)
    } else {
        pdf.iter().zip(&ps).map(|(c, p)| (c.log_weight - lm).exp() * p).sum()
    };
    let mut comps = Vec::with_capacity(pdf.len());
    for (c, p) in pdf.iter().zip(&ps) {
        let log_weight = if uniform || ps_bar <= 0.0 {
            c.log_weight - lm
        } else {
            c.log_weight - lm + ln_clamped(*p) - ps_bar.ln()
        };
        if log_weight > f64::NEG_INFINITY {
            comps.push(Component {
                log_weight,
                gaussian: motion.predict_gaussian(&c.gaussian)?,
            });
        }
    }
    Ok((ps_bar.clamp(0.0, 1.0), GaussianMixture::from_components_unchecked(comps)))
}

fn pdf_ptrs(d: &MdGlmbDensity) -> HashSet<usize> {
    d.iter()
        .flat_map(|(_, h)| h.pdfs.iter().map(|p| Arc::as_ptr(p) as usize))
        .collect()
}

fn finish(mut d: MdGlmbDensity, keep: &HashSet<usize>, cfg: &FilterConfig) -> MdGlmbDensity {
    if d.is_empty() {
        log::warn!("all hypotheses vanished; resetting to the empty density");
        return MdGlmbDensity::no_objects();
    }
    if cfg.hypothesis_threshold > 0.0 {
        d.prune(cfg.hypothesis_threshold);
    }
    d.truncate(cfg.max_hypotheses);
    reduce_new_pdfs(d.hypotheses_mut().flat_map(|(_, h)| h.pdfs.iter_mut()), keep, cfg);
    d
}

/// Mδ-GLMB prediction with LMB birth at step `k`.
///
/// Each prior hypothesis `J` contributes its ranked survivor/birth subsets,
/// with a budget proportional to its weight; the result is marginalized over
/// `J`, normalized and truncated to `max_hypotheses`.
pub fn mdglmb_predict(
    posterior: &MdGlmbDensity,
    motion: &MotionModel,
    birth: &BirthModel,
    k: u32,
    cfg: &FilterConfig,
) -> Result<MdGlmbDensity, FilterError> {
    let births = birth.at(k);
    let birth_items: Vec<(Label, f64, Arc<GaussianMixture>)> =
        births.iter().map(|(l, b)| (*l, b.existence, b.pdf.clone())).collect();
    let mut keep: HashSet<usize> = birth_items.iter().map(|(_, _, p)| Arc::as_ptr(p) as usize).collect();

    let mut cache: HashMap<(usize, Label), (f64, Arc<GaussianMixture>)> = HashMap::new();
    let lm = posterior.log_mass();
    let mut comps = Vec::new();
    for (history, (set, h)) in posterior.iter().enumerate() {
        let w = h.log_weight - lm;
        if w == f64::NEG_INFINITY {
            continue;
        }
        let mut ln_in = Vec::with_capacity(set.len() + birth_items.len());
        let mut ln_out = Vec::with_capacity(ln_in.capacity());
        let mut surv = Vec::with_capacity(set.len());
        for (l, p) in set.iter().zip(&h.pdfs) {
            let key = (Arc::as_ptr(p) as usize, *l);
            let entry = match cache.get(&key) {
                Some(e) => e.clone(),
                None => {
                    let (ps, pdf) = predict_survivor(p, *l, k, motion)?;
                    let e = (ps, Arc::new(pdf));
                    keep.insert(Arc::as_ptr(&e.1) as usize);
                    cache.insert(key, e.clone());
                    e
                }
            };
            ln_in.push(ln_clamped(entry.0));
            ln_out.push(ln_clamped(1.0 - entry.0));
            surv.push((*l, entry.1));
        }
        for (_, r, _) in &birth_items {
            ln_in.push(ln_clamped(*r));
            ln_out.push(ln_clamped(1.0 - r));
        }
        let budget = ((w.exp() * cfg.max_hypotheses as f64).ceil() as usize).clamp(1, cfg.max_hypotheses);
        for s in k_best_subsets(&ln_in, &ln_out, budget) {
            let mut labels = Vec::with_capacity(s.included.len());
            let mut pdfs = Vec::with_capacity(s.included.len());
            for &i in &s.included {
                if i < surv.len() {
                    labels.push(surv[i].0);
                    pdfs.push(surv[i].1.clone());
                } else {
                    let b = &birth_items[i - surv.len()];
                    labels.push(b.0);
                    pdfs.push(b.2.clone());
                }
            }
            comps.push(DeltaComponent {
                labels: LabelSet::from_sorted_unchecked(labels),
                history: history as u64,
                log_weight: w + s.log_weight,
                pdfs,
            });
        }
    }
    let out = marginalize_delta_glmb(&DeltaGlmbDensity::new(comps));
    Ok(finish(out, &keep, cfg))
}

/// Per-`(I, θ)` components of the update, before marginalization.
pub(crate) fn update_components<F>(
    predicted: &MdGlmbDensity,
    z: &[f64],
    sensor: &SensorModel,
    k: u32,
    cfg: &FilterConfig,
    mut generate: F,
) -> Vec<DeltaComponent>
where
    F: FnMut(&DMatrix<f64>) -> Vec<AssociationMap>,
{
    let mut cache = TermCache::default();
    let mut comps = Vec::new();
    let mut history = 0u64;
    for (set, h) in predicted.iter() {
        if h.log_weight == f64::NEG_INFINITY {
            continue;
        }
        let n = set.len();
        let mut lp = DMatrix::from_element(n, z.len() + 1, f64::NEG_INFINITY);
        for (t, (l, p)) in set.iter().zip(&h.pdfs).enumerate() {
            let terms = cache.get(p, *l, k, z, sensor, &cfg.ut);
            lp[(t, 0)] = terms.miss_log_psi;
            for (j, v) in terms.detect_log_psi.iter().enumerate() {
                lp[(t, j + 1)] = *v;
            }
        }
        for map in generate(&lp) {
            let mut pdfs = Vec::with_capacity(n);
            for (t, (l, p)) in set.iter().zip(&h.pdfs).enumerate() {
                let terms = cache.get(p, *l, k, z, sensor, &cfg.ut);
                pdfs.push(match map.theta[t] {
                    0 => terms.miss_pdf.clone(),
                    j => terms.detect_pdf(j - 1, z, sensor),
                });
            }
            comps.push(DeltaComponent {
                labels: set.clone(),
                history,
                log_weight: h.log_weight + map.log_score,
                pdfs,
            });
            history += 1;
        }
    }
    comps
}

/// Mδ-GLMB update with a caller-supplied association generator (ranked or
/// exhaustive), normalized jointly over `(I, θ)` and marginalized over `θ`.
pub fn mdglmb_update_with<F>(
    predicted: &MdGlmbDensity,
    z: &[f64],
    sensor: &SensorModel,
    k: u32,
    cfg: &FilterConfig,
    generate: F,
) -> MdGlmbDensity
where
    F: FnMut(&DMatrix<f64>) -> Vec<AssociationMap>,
{
    let comps = update_components(predicted, z, sensor, k, cfg, generate);
    let out = marginalize_delta_glmb(&DeltaGlmbDensity::new(comps));
    finish(out, &pdf_ptrs(predicted), cfg)
}

/// Mδ-GLMB update using the `assignments_per_hypothesis` best maps per hypothesis.
pub fn mdglmb_update(predicted: &MdGlmbDensity, z: &[f64], sensor: &SensorModel, k: u32, cfg: &FilterConfig) -> MdGlmbDensity {
    let kb = cfg.assignments_per_hypothesis;
    mdglmb_update_with(predicted, z, sensor, k, cfg, |lp| ranked_assignments(lp, kb))
}

/// One centralized step: predict once, then update with each sensor's scan in turn.
pub fn centralized_mdglmb_step(
    posterior: &MdGlmbDensity,
    motion: &MotionModel,
    birth: &BirthModel,
    scans: &[(&SensorModel, &[f64])],
    k: u32,
    cfg: &FilterConfig,
) -> Result<MdGlmbDensity, FilterError> {
    let mut d = mdglmb_predict(posterior, motion, birth, k, cfg)?;
    for (sensor, z) in scans {
        d = mdglmb_update(&d, z, sensor, k, cfg);
    }
    Ok(d)
}
