//! Fixtures shared by the criterion benchmarks.

use dmot_core::filters::{lmb_predict, lmb_update, mdglmb_predict, mdglmb_update};
use dmot_core::gm::Gaussian;
use dmot_core::labeled::{LmbDensity, MdGlmbDensity};
use dmot_core::sim::{generate_truth, simulate_scans, Scenario};
use nalgebra::{DMatrix, DVector};

/// Per-node local posteriors of `desk_small` after `steps` steps, plus the
/// scans of the following step.
pub struct Snapshot {
    pub scenario: Scenario,
    pub step: u32,
    pub mdglmb: Vec<MdGlmbDensity>,
    pub lmb: Vec<LmbDensity>,
    pub next_scans: Vec<Vec<f64>>,
}

pub fn desk_snapshot(steps: u32) -> Snapshot {
    let s = Scenario::bundled("desk_small").expect("bundled scenario");
    let truth = generate_truth(&s);
    let scans = simulate_scans(&s, &truth, 7, 0).expect("scans");
    let n = s.sensors.len();
    let mut md = vec![MdGlmbDensity::no_objects(); n];
    let mut lmb = vec![LmbDensity::empty(); n];
    for k in 0..steps {
        for i in 0..n {
            let pred = mdglmb_predict(&md[i], &s.motion, &s.birth, k, &s.filter).expect("predict");
            md[i] = mdglmb_update(&pred, &scans[k as usize][i], &s.sensors[i], k, &s.filter);
            let pred = lmb_predict(&lmb[i], &s.motion, &s.birth, k).expect("predict");
            lmb[i] = lmb_update(&pred, &scans[k as usize][i], &s.sensors[i], k, &s.filter);
        }
    }
    Snapshot {
        next_scans: scans[steps as usize].clone(),
        scenario: s,
        step: steps,
        mdglmb: md,
        lmb,
    }
}

/// Two well-conditioned 4-d Gaussians.
pub fn gaussian_pair() -> (Gaussian, Gaussian) {
    let a = DMatrix::from_fn(4, 4, |i, j| ((i * 4 + j) as f64 * 0.37).sin());
    let p = &a * a.transpose() + DMatrix::identity(4, 4);
    let q = &p * 2.0 + DMatrix::from_diagonal_element(4, 4, 0.5);
    (
        Gaussian::new(DVector::from_row_slice(&[1.0, 0.5, -2.0, 0.1]), p).expect("spd"),
        Gaussian::new(DVector::from_row_slice(&[0.0, 0.2, 1.0, -0.3]), q).expect("spd"),
    )
}
