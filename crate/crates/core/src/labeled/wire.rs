//! JSON exchange format for labeled densities.
//!
//! This is the payload a node broadcasts to its neighbours in each consensus
//! round. Layout:
//!
//! ```text
//! LMB:     { "format": "lmb", "version": 1,
//!            "tracks": [ { "label": [k, i], "existence": r,
//!                          "components": [ { "log_weight": w, "mean": [..],
//!                                            "covariance": [.. row-major ..] } ] } ] }
//! Mδ-GLMB: { "format": "mdglmb", "version": 1,
//!            "hypotheses": [ { "labels": [[k, i], ..], "log_weight": w,
//!                              "pdfs": [ [ component, .. ], .. ] } ] }
//! ```
//!
//! Numbers are written as double precision. `pdfs[j]` belongs to `labels[j]`.

use std::io::Write;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{Hypothesis, Label, LabelError, LabelSet, LmbDensity, MdGlmbDensity};
use crate::gm::{Component, Gaussian, GaussianMixture};

pub const WIRE_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct WireComponent {
    log_weight: f64,
    mean: Vec<f64>,
    covariance: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct WireTrack {
    label: (u32, u32),
    existence: f64,
    components: Vec<WireComponent>,
}

#[derive(Debug, Serialize, Deserialize)]
struct WireHypothesis {
    labels: Vec<(u32, u32)>,
    log_weight: f64,
    pdfs: Vec<Vec<WireComponent>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "format", rename_all = "lowercase")]
enum WireDensity {
    Lmb { version: u32, tracks: Vec<WireTrack> },
    Mdglmb { version: u32, hypotheses: Vec<WireHypothesis> },
}

fn encode_gm(gm: &GaussianMixture) -> Vec<WireComponent> {
    gm.iter()
        .map(|c| {
            let cov = c.gaussian.covariance();
            let d = cov.nrows();
            let mut row_major = Vec::with_capacity(d * d);
            for i in 0..d {
                for j in 0..d {
                    row_major.push(cov[(i, j)]);
                }
            }
            WireComponent {
                log_weight: c.log_weight,
                mean: c.gaussian.mean().iter().cloned().collect(),
                covariance: row_major,
            }
        })
        .collect()
}

fn decode_gm(comps: Vec<WireComponent>) -> Result<GaussianMixture, LabelError> {
    let mut out = Vec::with_capacity(comps.len());
    for c in comps {
        let d = c.mean.len();
        if c.covariance.len() != d * d {
            return Err(LabelError::Wire(format!(
                "covariance has {} entries, expected {}",
                c.covariance.len(),
                d * d
            )));
        }
        let g = Gaussian::new(
            DVector::from_vec(c.mean),
            DMatrix::from_row_slice(d, d, &c.covariance),
        )
        .map_err(|e| LabelError::Wire(e.to_string()))?;
        out.push(Component {
            log_weight: c.log_weight,
            gaussian: g,
        });
    }
    GaussianMixture::new(out).map_err(|e| LabelError::Wire(e.to_string()))
}

fn wire_lmb(d: &LmbDensity) -> WireDensity {
    WireDensity::Lmb {
        version: WIRE_VERSION,
        tracks: d
            .iter()
            .map(|(l, b)| WireTrack {
                label: (l.birth_time, l.index),
                existence: b.existence,
                components: encode_gm(&b.pdf),
            })
            .collect(),
    }
}

fn wire_mdglmb(d: &MdGlmbDensity) -> WireDensity {
    WireDensity::Mdglmb {
        version: WIRE_VERSION,
        hypotheses: d
            .iter()
            .map(|(s, h)| WireHypothesis {
                labels: s.iter().map(|l| (l.birth_time, l.index)).collect(),
                log_weight: h.log_weight,
                pdfs: h.pdfs.iter().map(|p| encode_gm(p)).collect(),
            })
            .collect(),
    }
}

pub fn lmb_to_json(d: &LmbDensity) -> String {
    serde_json::to_string(&wire_lmb(d)).expect("in-memory serialization")
}

pub fn mdglmb_to_json(d: &MdGlmbDensity) -> String {
    serde_json::to_string(&wire_mdglmb(d)).expect("in-memory serialization")
}

pub fn lmb_from_json(s: &str) -> Result<LmbDensity, LabelError> {
    match serde_json::from_str(s).map_err(|e| LabelError::Wire(e.to_string()))? {
        WireDensity::Lmb { version, tracks } => {
            check_version(version)?;
            let mut out = LmbDensity::empty();
            for t in tracks {
                out.insert(Label::new(t.label.0, t.label.1), t.existence, Arc::new(decode_gm(t.components)?))?;
            }
            Ok(out)
        }
        WireDensity::Mdglmb { .. } => Err(LabelError::Wire("expected format \"lmb\"".into())),
    }
}

pub fn mdglmb_from_json(s: &str) -> Result<MdGlmbDensity, LabelError> {
    match serde_json::from_str(s).map_err(|e| LabelError::Wire(e.to_string()))? {
        WireDensity::Mdglmb {
            version,
            hypotheses,
        } => {
            check_version(version)?;
            let mut items = Vec::with_capacity(hypotheses.len());
            for h in hypotheses {
                let labels: Vec<Label> = h.labels.iter().map(|&(k, i)| Label::new(k, i)).collect();
                if labels.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(LabelError::Wire("hypothesis labels must be sorted and distinct".into()));
                }
                let pdfs = h
                    .pdfs
                    .into_iter()
                    .map(|p| decode_gm(p).map(Arc::new))
                    .collect::<Result<Vec<_>, _>>()?;
                items.push((
                    LabelSet::from_labels(labels)?,
                    Hypothesis {
                        log_weight: h.log_weight,
                        pdfs,
                    },
                ));
            }
            MdGlmbDensity::from_hypotheses(items)
        }
        WireDensity::Lmb { .. } => Err(LabelError::Wire("expected format \"mdglmb\"".into())),
    }
}

fn check_version(v: u32) -> Result<(), LabelError> {
    if v != WIRE_VERSION {
        return Err(LabelError::Wire(format!("unsupported version {v}")));
    }
    Ok(())
}

struct CountingWriter(usize);

impl Write for CountingWriter {
    fn write(&mut self, buf: &[u8]) -> std::io::Result<usize> {
        self.0 += buf.len();
        Ok(buf.len())
    }
    fn flush(&mut self) -> std::io::Result<()> {
        Ok(())
    }
}

/// Size in bytes of [`lmb_to_json`] without building the string.
pub fn lmb_wire_len(d: &LmbDensity) -> usize {
    let mut w = CountingWriter(0);
    serde_json::to_writer(&mut w, &wire_lmb(d)).expect("counting writer");
    w.0
}

/// Size in bytes of [`mdglmb_to_json`] without building the string.
pub fn mdglmb_wire_len(d: &MdGlmbDensity) -> usize {
    let mut w = CountingWriter(0);
    serde_json::to_writer(&mut w, &wire_mdglmb(d)).expect("counting writer");
    w.0
}

/// Nominal single-precision exchange size with one Gaussian (mean plus upper
/// covariance triangle) per label: `4 Σ_I (1 + (d + d(d+1)/2)|I|)`.
pub fn mdglmb_nominal_bytes(d: &MdGlmbDensity, state_dim: usize) -> usize {
    let per_label = state_dim + state_dim * (state_dim + 1) / 2;
    d.iter().map(|(s, _)| 4 * (1 + per_label * s.len())).sum()
}

/// Nominal LMB exchange size `4 (1 + (d + d(d+1)/2)|L|)`.
pub fn lmb_nominal_bytes(d: &LmbDensity, state_dim: usize) -> usize {
    let per_label = state_dim + state_dim * (state_dim + 1) / 2;
    4 * (1 + per_label * d.len())
}
