use nalgebra::DMatrix;

use crate::assign::{murty_k_best, Assignment};

/// One association map for an ordered list of tracks: `theta[t] = 0` means
/// track `t` is undetected, `theta[t] = j > 0` assigns measurement `j − 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct AssociationMap {
    pub theta: Vec<usize>,
    pub log_score: f64,
}

/// Builds the `tracks × (|Z| + tracks)` cost matrix: measurement columns
/// first, then one private misdetection column per track.
fn cost_matrix(log_psi: &DMatrix<f64>) -> DMatrix<f64> {
    let n = log_psi.nrows();
    let m = log_psi.ncols() - 1;
    DMatrix::from_fn(n, m + n, |t, c| {
        let s = if c < m {
            log_psi[(t, c + 1)]
        } else if c - m == t {
            log_psi[(t, 0)]
        } else {
            f64::NEG_INFINITY
        };
        -s
    })
}

fn to_map(a: &Assignment, log_psi: &DMatrix<f64>) -> AssociationMap {
    let m = log_psi.ncols() - 1;
    let theta: Vec<usize> = a.cols.iter().map(|&c| if c < m { c + 1 } else { 0 }).collect();
    let log_score = theta.iter().enumerate().map(|(t, &j)| log_psi[(t, j)]).sum();
    AssociationMap { theta, log_score }
}

/// Canonical order: descending score, then lexicographic on `theta`.
pub(crate) fn sort_maps(maps: &mut [AssociationMap]) {
    maps.sort_by(|a, b| b.log_score.total_cmp(&a.log_score).then_with(|| a.theta.cmp(&b.theta)));
}

/// The `k` highest-scoring valid association maps for a `tracks × (1 + |Z|)`
/// matrix of `log ψ̄` values (column 0 is misdetection). Maps with score `−∞`
/// are never returned.
pub fn ranked_assignments(log_psi: &DMatrix<f64>, k: usize) -> Vec<AssociationMap> {
    assert!(log_psi.ncols() >= 1, "log_psi needs a misdetection column");
    if log_psi.nrows() == 0 {
        return vec![AssociationMap {
            theta: Vec::new(),
            log_score: 0.0,
        }];
    }
    let cost = cost_matrix(log_psi);
    let mut maps: Vec<AssociationMap> = murty_k_best(&cost, k).iter().map(|a| to_map(a, log_psi)).collect();
    sort_maps(&mut maps);
    maps
}

/// Every valid map with finite score, in canonical order.
pub fn all_assignments(log_psi: &DMatrix<f64>) -> Vec<AssociationMap> {
    let n = log_psi.nrows();
    let m = log_psi.ncols() - 1;
    let mut out = Vec::new();
    let mut theta = vec![0usize; n];
    let mut used = vec![false; m + 1];
    fn rec(
        t: usize,
        log_psi: &DMatrix<f64>,
        theta: &mut Vec<usize>,
        used: &mut Vec<bool>,
        out: &mut Vec<AssociationMap>,
    ) {
        if t == theta.len() {
            let log_score: f64 = theta.iter().enumerate().map(|(i, &j)| log_psi[(i, j)]).sum();
            if log_score > f64::NEG_INFINITY {
                out.push(AssociationMap {
                    theta: theta.clone(),
                    log_score,
                });
            }
            return;
        }
        for j in 0..log_psi.ncols() {
            if j > 0 && used[j] {
                continue;
            }
            theta[t] = j;
            if j > 0 {
                used[j] = true;
            }
            rec(t + 1, log_psi, theta, used, out);
            if j > 0 {
                used[j] = false;
            }
        }
    }
    rec(0, log_psi, &mut theta, &mut used, &mut out);
    sort_maps(&mut out);
    out
}
