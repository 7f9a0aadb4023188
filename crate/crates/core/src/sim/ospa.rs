use nalgebra::DMatrix;
use serde::Serialize;

use crate::assign::hungarian;

/// OSPA distance and its split; `total^p = loc^p + card^p`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct OspaEntry {
    pub total: f64,
    pub loc: f64,
    pub card: f64,
}

fn cut_distance(a: &[f64; 2], b: &[f64; 2], c: f64, p: f64) -> f64 {
    let d = (a[0] - b[0]).hypot(a[1] - b[1]).min(c);
    d.powf(p)
}

/// OSPA metric of order `p` with cutoff `c` between two position sets.
pub fn ospa(x: &[[f64; 2]], y: &[[f64; 2]], c: f64, p: f64) -> OspaEntry {
    assert!(c > 0.0 && p >= 1.0, "ospa needs c > 0 and p >= 1");
    let (small, large) = if x.len() <= y.len() { (x, y) } else { (y, x) };
    let n = large.len();
    if n == 0 {
        return OspaEntry::default();
    }
    let m = small.len();
    let cost = DMatrix::from_fn(m, n, |i, j| cut_distance(&small[i], &large[j], c, p));
    let best = hungarian(&cost).expect("all cells finite");
    let loc_sum: f64 = best.cols.iter().enumerate().map(|(i, &j)| cost[(i, j)]).sum();
    let card_sum = c.powf(p) * (n - m) as f64;
    let nf = n as f64;
    OspaEntry {
        total: ((loc_sum + card_sum) / nf).powf(1.0 / p),
        loc: (loc_sum / nf).powf(1.0 / p),
        card: (card_sum / nf).powf(1.0 / p),
    }
}
