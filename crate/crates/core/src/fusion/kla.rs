use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use super::FusionError;
use crate::gm::chernoff::{chernoff_fold, reduce_operand};
use crate::gm::{GaussianMixture, Reduction};
use crate::labeled::{Bernoulli, Hypothesis, Label, LmbDensity, MdGlmbDensity};
use crate::linalg::ln_clamped;

fn active_inputs<'a, T>(inputs: &[(&'a T, f64)]) -> Result<Vec<(&'a T, f64)>, FusionError> {
    let sum: f64 = inputs.iter().map(|(_, w)| w).sum();
    if inputs.iter().any(|(_, w)| !(*w >= 0.0) || !w.is_finite()) || (sum - 1.0).abs() > 1e-9 {
        return Err(FusionError::InvalidWeights(inputs.iter().map(|(_, w)| *w).collect()));
    }
    let active: Vec<(&T, f64)> = inputs.iter().filter(|(_, w)| *w > 0.0).cloned().collect();
    if active.is_empty() {
        return Err(FusionError::NoInputs);
    }
    Ok(active)
}

/// Fuses one label's pdfs, memoized on the tuple of pdf allocations.
struct PdfFuser {
    reduction: Option<Reduction>,
    memo: HashMap<Vec<usize>, Option<(Arc<GaussianMixture>, f64)>>,
    operands: HashMap<usize, Arc<GaussianMixture>>,
}

impl PdfFuser {
    fn fuse(&mut self, pdfs: &[(&Arc<GaussianMixture>, f64)]) -> Option<(Arc<GaussianMixture>, f64)> {
        let key: Vec<usize> = pdfs.iter().map(|(p, _)| Arc::as_ptr(p) as usize).collect();
        if let Some(hit) = self.memo.get(&key) {
            return hit.clone();
        }
        let first = pdfs[0].0;
        let out = if pdfs.iter().all(|(p, _)| Arc::ptr_eq(p, first)) {
            // p^{Σω} / ∫ p^{Σω} = p for normalized p.
            Some((first.clone(), 0.0))
        } else {
            let reduction = self.reduction;
            let ops: Vec<(Arc<GaussianMixture>, f64)> = pdfs
                .iter()
                .map(|(p, w)| {
                    let op = self
                        .operands
                        .entry(Arc::as_ptr(p) as usize)
                        .or_insert_with(|| Arc::new(reduce_operand(p, reduction)))
                        .clone();
                    (op, *w)
                })
                .collect();
            let refs: Vec<(&GaussianMixture, f64)> = ops.iter().map(|(p, w)| (p.as_ref(), *w)).collect();
            match chernoff_fold(&refs, reduction) {
                Ok((gm, log_eta)) => Some((Arc::new(gm), log_eta)),
                Err(e) => {
                    log::debug!("label pdf fusion failed: {e}");
                    None
                }
            }
        };
        self.memo.insert(key, out.clone());
        out
    }
}

/// Kullback-Leibler average of Mδ-GLMB densities.
///
/// Only hypotheses present in every positively weighted input survive; their
/// fused log-weight is `Σᵢ ωᵢ log wᵢ(I) + Σ_{ℓ∈I} log η(ℓ)` with `η` the mass of
/// the pairwise-approximated geometric mean of the label pdfs.
pub fn fuse_mdglmb(inputs: &[(&MdGlmbDensity, f64)], reduction: Option<Reduction>) -> Result<MdGlmbDensity, FusionError> {
    let active = active_inputs(inputs)?;
    if active.len() == 1 {
        return Ok(active[0].0.clone());
    }
    let masses: Vec<f64> = active.iter().map(|(d, _)| d.log_mass()).collect();
    let mut fuser = PdfFuser {
        reduction,
        memo: HashMap::new(),
        operands: HashMap::new(),
    };
    let mut out = Vec::new();
    'hyp: for (set, h0) in active[0].0.iter() {
        let mut hyps = vec![(h0, active[0].1)];
        for (d, w) in &active[1..] {
            match d.get(set) {
                Some(h) => hyps.push((h, *w)),
                None => continue 'hyp,
            }
        }
        let mut log_w: f64 = hyps
            .iter()
            .zip(&masses)
            .map(|((h, w), lm)| if *w > 0.0 { w * (h.log_weight - lm) } else { 0.0 })
            .sum();
        if log_w == f64::NEG_INFINITY {
            continue;
        }
        let mut pdfs = Vec::with_capacity(set.len());
        for pos in 0..set.len() {
            let parts: Vec<(&Arc<GaussianMixture>, f64)> = hyps.iter().map(|(h, w)| (&h.pdfs[pos], *w)).collect();
            match fuser.fuse(&parts) {
                Some((p, log_eta)) => {
                    log_w += log_eta;
                    pdfs.push(p);
                }
                None => continue 'hyp,
            }
        }
        if log_w.is_finite() {
            out.push((set.clone(), Hypothesis { log_weight: log_w, pdfs }));
        }
    }
    if out.is_empty() {
        return Err(FusionError::EmptyIntersection);
    }
    let mut d = MdGlmbDensity::from_hypotheses(out).expect("hypotheses built from valid inputs");
    d.normalize();
    Ok(d)
}

/// Kullback-Leibler average of LMB densities:
/// `r̄ = r̃ / (q̃ + r̃)` with `q̃ = ∏(1−rᵢ)^{ωᵢ}` and `r̃ = η ∏ rᵢ^{ωᵢ}`.
///
/// A label missing from any positively weighted input has `r̃ = 0` and is dropped.
pub fn fuse_lmb(inputs: &[(&LmbDensity, f64)], reduction: Option<Reduction>) -> Result<LmbDensity, FusionError> {
    let active = active_inputs(inputs)?;
    if active.len() == 1 {
        return Ok(active[0].0.clone());
    }
    let labels: BTreeSet<Label> = active.iter().flat_map(|(d, _)| d.labels()).collect();
    let mut fuser = PdfFuser {
        reduction,
        memo: HashMap::new(),
        operands: HashMap::new(),
    };
    let mut out = LmbDensity::empty();
    for l in labels {
        let Some(entries) = active
            .iter()
            .map(|(d, w)| d.get(&l).map(|b| (b, *w)))
            .collect::<Option<Vec<(&Bernoulli, f64)>>>()
        else {
            continue;
        };
        let log_q: f64 = entries.iter().map(|(b, w)| w * ln_clamped(1.0 - b.existence)).sum();
        let log_r_prod: f64 = entries.iter().map(|(b, w)| w * ln_clamped(b.existence)).sum();
        if log_r_prod == f64::NEG_INFINITY {
            continue;
        }
        let parts: Vec<(&Arc<GaussianMixture>, f64)> = entries.iter().map(|(b, w)| (&b.pdf, *w)).collect();
        let Some((pdf, log_eta)) = fuser.fuse(&parts) else {
            continue;
        };
        let log_r = log_eta + log_r_prod;
        // r̄ = 1 / (1 + q̃/r̃), evaluated in the log domain.
        let existence = 1.0 / (1.0 + (log_q - log_r).exp());
        if existence > 0.0 {
            out.insert_unchecked(l, Bernoulli { existence, pdf });
        }
    }
    Ok(out)
}
