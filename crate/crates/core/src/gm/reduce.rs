use nalgebra::{DMatrix, DVector};

use super::{Component, Gaussian, GaussianMixture};
use crate::linalg;

/// Parameters of [`gm_merge_prune_cap`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reduction {
    pub merge_threshold: f64,
    pub truncation_threshold: f64,
    pub max_components: usize,
}

impl Reduction {
    pub fn apply(&self, p: &GaussianMixture) -> GaussianMixture {
        gm_merge_prune_cap(p, self.merge_threshold, self.truncation_threshold, self.max_components)
    }
}

/// Prune, merge and cap a mixture.
///
/// 1. components whose normalized weight is below `trunc_thresh` are dropped
///    (the heaviest always survives, so a nonempty input stays nonempty);
/// 2. repeatedly, the heaviest remaining component absorbs every component
///    whose squared Mahalanobis distance in its metric is `<= merge_thresh`,
///    preserving weight, mean and covariance of the cluster;
/// 3. at most `max_components` of the heaviest results are kept;
/// 4. weights are renormalized.
///
/// Output components are sorted by decreasing weight, ties by input order.
pub fn gm_merge_prune_cap(
    p: &GaussianMixture,
    merge_thresh: f64,
    trunc_thresh: f64,
    max_components: usize,
) -> GaussianMixture {
    if p.is_empty() {
        return GaussianMixture::empty();
    }
    let weights = p.weights();
    let comps = p.components();

    let mut order: Vec<usize> = (0..comps.len()).collect();
    order.sort_by(|&i, &j| weights[j].total_cmp(&weights[i]).then(i.cmp(&j)));

    let mut alive: Vec<usize> = order
        .iter()
        .cloned()
        .filter(|&i| weights[i] >= trunc_thresh)
        .collect();
    if alive.is_empty() {
        alive.push(order[0]);
    }

    let mut merged: Vec<(f64, Gaussian)> = Vec::new();
    while !alive.is_empty() {
        let head = alive[0];
        let head_g = &comps[head].gaussian;
        let lower = linalg::cholesky(head_g.covariance()).map(|c| c.l());
        let mut y = vec![0.0; head_g.dim()];
        let (cluster, rest): (Vec<usize>, Vec<usize>) = alive.iter().partition(|&&i| {
            if i == head {
                return true;
            }
            match &lower {
                Some(l) => mahalanobis_sq_lower(l, comps[i].gaussian.mean(), head_g.mean(), &mut y) <= merge_thresh,
                None => false,
            }
        });
        alive = rest;
        if cluster.len() == 1 {
            merged.push((weights[head], head_g.clone()));
            continue;
        }
        merged.push(moment_match(
            cluster.iter().map(|&i| (weights[i], &comps[i].gaussian)),
        ));
    }

    let mut idx: Vec<usize> = (0..merged.len()).collect();
    idx.sort_by(|&i, &j| merged[j].0.total_cmp(&merged[i].0).then(i.cmp(&j)));
    idx.truncate(max_components.max(1));

    let out: Vec<Component> = idx
        .into_iter()
        .map(|i| Component {
            log_weight: merged[i].0.ln(),
            gaussian: merged[i].1.clone(),
        })
        .collect();
    GaussianMixture::from_components_unchecked(out).normalized()
}

/// `‖L⁻¹(x − m)‖²` by forward substitution into `y`.
fn mahalanobis_sq_lower(l: &DMatrix<f64>, x: &DVector<f64>, m: &DVector<f64>, y: &mut [f64]) -> f64 {
    let mut acc = 0.0;
    for r in 0..y.len() {
        let mut v = x[r] - m[r];
        for c in 0..r {
            v -= l[(r, c)] * y[c];
        }
        y[r] = v / l[(r, r)];
        acc += y[r] * y[r];
    }
    acc
}

/// Moment-preserving merge of weighted Gaussians; returns `(Σw, merged)`.
pub(crate) fn moment_match<'a, I>(items: I) -> (f64, Gaussian)
where
    I: IntoIterator<Item = (f64, &'a Gaussian)>,
{
    let items: Vec<(f64, &Gaussian)> = items.into_iter().collect();
    let d = items[0].1.dim();
    let total: f64 = items.iter().map(|(w, _)| w).sum();
    let mut mean = DVector::zeros(d);
    for (w, g) in &items {
        mean += g.mean() * *w;
    }
    mean /= total;
    let mut cov = DMatrix::zeros(d, d);
    for (w, g) in &items {
        let dm = g.mean() - &mean;
        cov += (g.covariance() + &dm * dm.transpose()) * *w;
    }
    cov /= total;
    let g = Gaussian::from_parts(mean.clone(), cov.clone())
        .unwrap_or_else(|_| items[0].1.clone());
    (total, g)
}
