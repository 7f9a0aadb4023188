use std::collections::HashMap;
use std::sync::Arc;

use crate::gm::{Component, GaussianMixture};
use crate::labeled::Label;
use crate::linalg::{ln_clamped, log_sum_exp};
use crate::sensors::{log_likelihood, predict_measurement, update_with_prediction, MeasurementPrediction, SensorModel, UtParams};

/// `ln κ(z)`, floored at the smallest positive double so a zero clutter
/// intensity still yields finite detection scores.
pub(crate) fn ln_clutter(sensor: &SensorModel, z: f64) -> f64 {
    sensor.clutter_intensity(z).max(f64::MIN_POSITIVE).ln()
}

/// Everything one track pdf needs for one scan: per-component detection
/// probabilities and measurement predictions, the misdetection term, and
/// the detection scores for every measurement.
pub(crate) struct TrackTerms {
    pdf: Arc<GaussianMixture>,
    preds: Vec<Option<MeasurementPrediction>>,
    ln_pd: Vec<f64>,
    pub miss_log_psi: f64,
    pub miss_pdf: Arc<GaussianMixture>,
    pub detect_log_psi: Vec<f64>,
    detect_pdf: Vec<Option<Arc<GaussianMixture>>>,
}

impl TrackTerms {
    pub fn new(pdf: &Arc<GaussianMixture>, label: Label, k: u32, z: &[f64], sensor: &SensorModel, ut: &UtParams) -> Self {
        let lm = pdf.log_mass();
        let pd: Vec<f64> = sensor.detection.expect_components(pdf, label, k);
        let ln_pd: Vec<f64> = pd.iter().map(|&p| ln_clamped(p)).collect();

        // Misdetection: ⟨1 − P_D, p⟩ and the reweighted pdf.
        let ln_q: Vec<f64> = pd.iter().map(|&p| ln_clamped(1.0 - p)).collect();
        let miss_terms: Vec<f64> = pdf.iter().zip(&ln_q).map(|(c, q)| c.log_weight - lm + q).collect();
        let miss_log_psi = log_sum_exp(miss_terms.iter().cloned());
        let uniform = pd.windows(2).all(|w| w[0] == w[1]);
        let miss_pdf = if uniform || !miss_log_psi.is_finite() {
            pdf.clone()
        } else {
            let comps = pdf
                .iter()
                .zip(&miss_terms)
                .filter(|(_, w)| **w > f64::NEG_INFINITY)
                .map(|(c, w)| Component {
                    log_weight: w - miss_log_psi,
                    gaussian: c.gaussian.clone(),
                })
                .collect();
            Arc::new(GaussianMixture::from_components_unchecked(comps))
        };

        let preds: Vec<Option<MeasurementPrediction>> = pdf
            .iter()
            .zip(&pd)
            .map(|(c, &p)| {
                if p > 0.0 {
                    match predict_measurement(&c.gaussian, sensor, ut) {
                        Ok(pr) => Some(pr),
                        Err(e) => {
                            log::debug!("component dropped from update of {label}: {e}");
                            None
                        }
                    }
                } else {
                    None
                }
            })
            .collect();

        let detect_log_psi = z
            .iter()
            .map(|&zj| {
                let terms = pdf.iter().zip(&preds).zip(&ln_pd).filter_map(|((c, pr), lp)| {
                    pr.as_ref().map(|pr| c.log_weight - lm + lp + log_likelihood(pr, zj, sensor))
                });
                log_sum_exp(terms) - ln_clutter(sensor, zj)
            })
            .collect();

        Self {
            pdf: pdf.clone(),
            preds,
            ln_pd,
            miss_log_psi,
            miss_pdf,
            detect_log_psi,
            detect_pdf: vec![None; z.len()],
        }
    }

    /// Pdf conditioned on measurement `j` (0-based); computed once and cached.
    pub fn detect_pdf(&mut self, j: usize, z: &[f64], sensor: &SensorModel) -> Arc<GaussianMixture> {
        if let Some(p) = &self.detect_pdf[j] {
            return p.clone();
        }
        let lm = self.pdf.log_mass();
        let mut comps = Vec::with_capacity(self.pdf.len());
        for ((c, pr), lp) in self.pdf.iter().zip(&self.preds).zip(&self.ln_pd) {
            let Some(pr) = pr else { continue };
            match update_with_prediction(&c.gaussian, pr, z[j], sensor) {
                Ok((g, ll)) => comps.push(Component {
                    log_weight: c.log_weight - lm + lp + ll,
                    gaussian: g,
                }),
                Err(e) => log::debug!("component dropped from update: {e}"),
            }
        }
        let mut gm = GaussianMixture::from_components_unchecked(comps);
        gm.normalize();
        let gm = Arc::new(gm);
        self.detect_pdf[j] = Some(gm.clone());
        gm
    }
}

/// Per-scan cache of [`TrackTerms`], keyed by pdf allocation and label.
#[derive(Default)]
pub(crate) struct TermCache {
    map: HashMap<(usize, Label), TrackTerms>,
}

impl TermCache {
    pub fn get(
        &mut self,
        pdf: &Arc<GaussianMixture>,
        label: Label,
        k: u32,
        z: &[f64],
        sensor: &SensorModel,
        ut: &UtParams,
    ) -> &mut TrackTerms {
        let key = (Arc::as_ptr(pdf) as usize, label);
        self.map
            .entry(key)
            .or_insert_with(|| TrackTerms::new(pdf, label, k, z, sensor, ut))
    }
}

/// `(log ψ̄, conditioned pdf)` for one track and one association value
/// (`z_index = 0` misdetection, `j > 0` measurement `z[j − 1]`).
pub fn psi_bar(
    pdf: &GaussianMixture,
    label: Label,
    k: u32,
    z_index: usize,
    z: &[f64],
    sensor: &SensorModel,
    ut: &UtParams,
) -> (f64, GaussianMixture) {
    let pdf = Arc::new(pdf.clone());
    let mut t = TrackTerms::new(&pdf, label, k, z, sensor, ut);
    if z_index == 0 {
        (t.miss_log_psi, (*t.miss_pdf).clone())
    } else {
        let p = t.detect_pdf(z_index - 1, z, sensor);
        (t.detect_log_psi[z_index - 1], (*p).clone())
    }
}
