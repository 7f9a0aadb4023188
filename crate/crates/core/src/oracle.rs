//! Brute-force reference computations: grid set integrals, exhaustive
//! enumeration of subsets, associations and permutations. Slow by design.

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;
use std::time::Instant;

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::filters::{all_assignments, mdglmb_update_with, ranked_assignments, FilterConfig};
use crate::fusion::{
    consensus_matrix_power_check, consensus_run, fuse_lmb, fuse_mdglmb, metropolis_weights, ConsensusConfig,
    ConsensusMatrix, NetworkGraph,
};
use crate::gm::{Gaussian, GaussianMixture};
use crate::labeled::{
    intensity_mdglmb, marginalize_delta_glmb, DeltaComponent, DeltaGlmbDensity, Label, LabelSet, LmbDensity,
    MdGlmbDensity,
};
use crate::sensors::SensorModel;
use crate::sim::{ospa, Scenario};

/// Uniform 1-D grid with trapezoid weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl Grid {
    pub fn new(lo: f64, hi: f64, n: usize) -> Self {
        assert!(n >= 2 && hi > lo);
        Self { lo, hi, n }
    }

    pub fn step(&self) -> f64 {
        (self.hi - self.lo) / (self.n - 1) as f64
    }

    pub fn nodes(&self) -> Vec<(f64, f64)> {
        let h = self.step();
        (0..self.n)
            .map(|i| {
                let w = if i == 0 || i == self.n - 1 { h / 2.0 } else { h };
                (self.lo + i as f64 * h, w)
            })
            .collect()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes().into_iter().map(|(x, w)| w * f(x)).sum()
    }
}

/// Grid moments of a nonnegative function on `grid^dim`:
/// mass, and per coordinate the normalized mean and variance.
#[derive(Debug, Clone, PartialEq)]
pub struct GridMoments {
    pub mass: f64,
    pub mean: Vec<f64>,
    pub var: Vec<f64>,
}

pub fn grid_moments(f: &dyn Fn(&[f64]) -> f64, dim: usize, grid: &Grid) -> GridMoments {
    let nodes = grid.nodes();
    let mut mass = 0.0;
    let mut s1 = vec![0.0; dim];
    let mut s2 = vec![0.0; dim];
    let mut x = vec![0.0; dim];
    let total = nodes.len().pow(dim as u32);
    for flat in 0..total {
        let mut rest = flat;
        let mut w = 1.0;
        for xi in x.iter_mut() {
            let (v, wi) = nodes[rest % nodes.len()];
            rest /= nodes.len();
            *xi = v;
            w *= wi;
        }
        let v = w * f(&x);
        mass += v;
        for j in 0..dim {
            s1[j] += v * x[j];
            s2[j] += v * x[j] * x[j];
        }
    }
    let mean: Vec<f64> = s1.iter().map(|s| s / mass).collect();
    let var = s2.iter().zip(&mean).map(|(s, m)| s / mass - m * m).collect();
    GridMoments { mass, mean, var }
}

/// `Σ_{S ⊆ labels} ∫ f(S, x_1..x_|S|) dx` over scalar states, by grid quadrature.
pub fn set_integral_oracle(f: &dyn Fn(&LabelSet, &[f64]) -> f64, labels: &[Label], grid: &Grid) -> f64 {
    assert!(labels.len() <= 3, "set integral oracle is limited to 3 labels");
    labels
        .iter()
        .copied()
        .powerset()
        .map(|subset| {
            let set = LabelSet::from_labels(subset).expect("distinct labels");
            grid_moments(&|x: &[f64]| f(&set, x), set.len(), grid).mass
        })
        .sum()
}

fn scalar_pdf(p: &GaussianMixture, x: f64) -> f64 {
    p.iter()
        .map(|c| {
            let m = c.gaussian.mean()[0];
            let v = c.gaussian.covariance()[(0, 0)];
            c.log_weight.exp() * (-(x - m).powi(2) / (2.0 * v)).exp() / (2.0 * std::f64::consts::PI * v).sqrt()
        })
        .sum()
}

/// Value of a normalized scalar-state Mδ-GLMB at the labeled set `{(x_i, set_i)}`.
pub fn mdglmb_value(d: &MdGlmbDensity, set: &LabelSet, x: &[f64]) -> f64 {
    match d.get(set) {
        Some(h) => {
            (h.log_weight - d.log_mass()).exp() * h.pdfs.iter().zip(x).map(|(p, xi)| scalar_pdf(p, *xi)).product::<f64>()
        }
        None => 0.0,
    }
}

/// Reference hypothesis of a fused density.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceHypothesis {
    pub labels: LabelSet,
    pub weight: f64,
    pub mean: Vec<f64>,
    pub var: Vec<f64>,
}

/// Normalized `∏ πᵢ(X)^{ωᵢ}` of scalar-state Mδ-GLMBs, by set integration on `grid`.
pub fn fused_mdglmb_reference(inputs: &[(&MdGlmbDensity, f64)], grid: &Grid) -> Vec<ReferenceHypothesis> {
    let labels: Vec<Label> = inputs
        .iter()
        .flat_map(|(d, _)| d.labels())
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    let g = |set: &LabelSet, x: &[f64]| -> f64 {
        inputs.iter().map(|(d, w)| mdglmb_value(d, set, x).powf(*w)).product()
    };
    let total = set_integral_oracle(&g, &labels, grid);
    let mut out = Vec::new();
    for subset in labels.iter().copied().powerset() {
        let set = LabelSet::from_labels(subset).expect("distinct labels");
        if inputs.iter().any(|(d, _)| !d.contains(&set)) {
            continue;
        }
        let m = grid_moments(&|x: &[f64]| g(&set, x), set.len(), grid);
        if m.mass > 0.0 {
            out.push(ReferenceHypothesis {
                labels: set,
                weight: m.mass / total,
                mean: m.mean,
                var: m.var,
            });
        }
    }
    out
}

/// `r̄ = r̃ / (q̃ + r̃)` with `q̃ = ∏(1−rᵢ)^{ωᵢ}` and `r̃ = η ∏ rᵢ^{ωᵢ}`.
pub fn lmb_fusion_closed_form(r: &[f64], omega: &[f64], eta: f64) -> f64 {
    let q: f64 = r.iter().zip(omega).map(|(r, w)| (1.0 - r).powf(*w)).product();
    let rt: f64 = eta * r.iter().zip(omega).map(|(r, w)| r.powf(*w)).product::<f64>();
    rt / (q + rt)
}

/// `η = ∫ ∏ N(x; mᵢ, vᵢ)^{ωᵢ} dx` on `grid`.
pub fn eta_on_grid(pdfs: &[(f64, f64)], omega: &[f64], grid: &Grid) -> f64 {
    grid.integrate(|x| {
        pdfs.iter()
            .zip(omega)
            .map(|((m, v), w)| ((-(x - m).powi(2) / (2.0 * v)).exp() / (2.0 * std::f64::consts::PI * v).sqrt()).powf(*w))
            .product()
    })
}

/// Consensus on information pairs: `Ωᵢ ← Σⱼ ωᵢⱼ Ωⱼ`, `qᵢ ← Σⱼ ωᵢⱼ qⱼ`.
/// Returns `(mean, covariance)` per node after each of `rounds` rounds.
pub fn information_consensus_reference(
    nodes: &[(DVector<f64>, DMatrix<f64>)],
    omega: &ConsensusMatrix,
    rounds: usize,
) -> Vec<Vec<(DVector<f64>, DMatrix<f64>)>> {
    let mut info: Vec<(DMatrix<f64>, DVector<f64>)> = nodes
        .iter()
        .map(|(m, p)| {
            let o = p.clone().try_inverse().expect("invertible covariance");
            let q = &o * m;
            (o, q)
        })
        .collect();
    let mut out = Vec::with_capacity(rounds);
    for _ in 0..rounds {
        info = (0..info.len())
            .map(|i| {
                let mut o = DMatrix::zeros(info[i].0.nrows(), info[i].0.ncols());
                let mut q = DVector::zeros(info[i].1.len());
                for (j, (oj, qj)) in info.iter().enumerate() {
                    let w = omega.get(i, j);
                    o += oj * w;
                    q += qj * w;
                }
                (o, q)
            })
            .collect();
        out.push(
            info.iter()
                .map(|(o, q)| {
                    let p = o.clone().try_inverse().expect("invertible information");
                    (&p * q, p)
                })
                .collect(),
        );
    }
    out
}

/// Every association map of `n` tracks to `m` measurements: `θ[i] = 0` is a
/// miss, `θ[i] = j` assigns measurement `j−1`; positive entries are distinct.
pub fn enumerate_associations(n: usize, m: usize) -> Vec<Vec<usize>> {
    (0..n)
        .map(|_| 0..=m)
        .multi_cartesian_product()
        .filter(|theta| {
            let pos: Vec<_> = theta.iter().filter(|&&j| j > 0).collect();
            pos.iter().collect::<HashSet<_>>().len() == pos.len()
        })
        .collect()
}

/// Cardinality pmf of an LMB by enumerating all `2^|r|` subsets.
pub fn lmb_cardinality_by_enumeration(r: &[f64]) -> Vec<f64> {
    let mut pmf = vec![0.0; r.len() + 1];
    for subset in (0..r.len()).powerset() {
        let p: f64 = (0..r.len())
            .map(|i| if subset.contains(&i) { r[i] } else { 1.0 - r[i] })
            .product();
        pmf[subset.len()] += p;
    }
    pmf
}

/// OSPA by trying every injection of the smaller set into the larger.
pub fn ospa_brute_force(x: &[[f64; 2]], y: &[[f64; 2]], c: f64, p: f64) -> f64 {
    let (small, large) = if x.len() <= y.len() { (x, y) } else { (y, x) };
    let n = large.len();
    if n == 0 {
        return 0.0;
    }
    let best = (0..n)
        .permutations(small.len())
        .map(|perm| {
            perm.iter()
                .enumerate()
                .map(|(i, &j)| {
                    let d = (small[i][0] - large[j][0]).hypot(small[i][1] - large[j][1]);
                    d.min(c).powf(p)
                })
                .sum::<f64>()
        })
        .fold(f64::INFINITY, f64::min);
    ((best + c.powf(p) * (n - small.len()) as f64) / n as f64).powf(1.0 / p)
}

/// Outcome of a named oracle check.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub name: &'static str,
    pub cases: usize,
    pub max_error: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub seconds: f64,
    pub note: String,
}

impl fmt::Display for OracleReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {} cases, max error {:.3e} (tolerance {:.0e}), {:.2}s: {}",
            self.name,
            self.cases,
            self.max_error,
            self.tolerance,
            self.seconds,
            if self.passed { "PASS" } else { "FAIL" }
        )?;
        if !self.note.is_empty() {
            write!(f, " [{}]", self.note)?;
        }
        Ok(())
    }
}

struct Tracker {
    max: f64,
    ok: bool,
}

impl Tracker {
    fn new() -> Self {
        Self { max: 0.0, ok: true }
    }
    fn rel(&mut self, got: f64, want: f64, tol: f64) {
        let e = (got - want).abs() / want.abs().max(f64::MIN_POSITIVE);
        self.push(e, tol);
    }
    fn abs(&mut self, got: f64, want: f64, tol: f64) {
        self.push((got - want).abs(), tol);
    }
    fn push(&mut self, e: f64, tol: f64) {
        if !(e <= tol) {
            self.ok = false;
        }
        if e > self.max || e.is_nan() {
            self.max = e;
        }
    }
    fn fail(&mut self) {
        self.ok = false;
    }
}

fn scalar(m: f64, v: f64) -> GaussianMixture {
    GaussianMixture::single(Gaussian::scalar(m, v).expect("positive variance"))
}

fn report(name: &'static str, cases: usize, t: Tracker, tolerance: f64, start: Instant, note: String) -> OracleReport {
    OracleReport {
        name,
        cases,
        max_error: t.max,
        tolerance,
        passed: t.ok,
        seconds: start.elapsed().as_secs_f64(),
        note,
    }
}

/// Mδ-GLMB fusion of random scalar, two-label pairs against grid set integration.
pub fn check_fusion_mdglmb() -> OracleReport {
    const TOL: f64 = 1e-3;
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let grid = Grid::new(-12.0, 16.0, 561);
    let (a, b) = (Label::new(0, 1), Label::new(0, 2));
    let sets = [vec![], vec![a], vec![b], vec![a, b]];
    let mut t = Tracker::new();
    let cases = 12;
    for case in 0..cases {
        let make = |rng: &mut ChaCha8Rng| {
            // Drop one hypothesis at random in half the cases; the empty set is always kept.
            let skip = if case % 2 == 0 { rng.random_range(1..4) } else { 99 };
            let items = sets
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != skip)
                .map(|(_, s)| {
                    let w = rng.random_range(0.1..1.0);
                    let pdfs = s.iter().map(|_| scalar(rng.random_range(0.5..3.0), rng.random_range(0.5..2.0))).collect();
                    (s.clone(), w, pdfs)
                })
                .collect();
            MdGlmbDensity::from_weighted(items).expect("valid density")
        };
        let x = make(&mut rng);
        let y = make(&mut rng);
        let w = rng.random_range(0.2..0.8);
        let inputs = [(&x, w), (&y, 1.0 - w)];
        let fused = match fuse_mdglmb(&inputs, None) {
            Ok(f) => f,
            Err(_) => {
                t.fail();
                continue;
            }
        };
        let reference = fused_mdglmb_reference(&inputs, &grid);
        if reference.len() != fused.len() {
            t.fail();
        }
        let lm = fused.log_mass();
        for r in &reference {
            let Some(h) = fused.get(&r.labels) else {
                t.fail();
                continue;
            };
            t.rel((h.log_weight - lm).exp(), r.weight, TOL);
            for (pos, p) in h.pdfs.iter().enumerate() {
                t.rel(p.mean().expect("nonempty")[0], r.mean[pos], TOL);
                t.rel(p.covariance().expect("nonempty")[(0, 0)], r.var[pos], TOL);
            }
        }
    }
    report("fusion-mdglmb", cases, t, TOL, start, String::new())
}

/// LMB fusion against the closed forms; identical pdfs with `η = 1`, distinct
/// pdfs with `η` from grid quadrature.
pub fn check_fusion_lmb() -> OracleReport {
    const TOL_IDENTICAL: f64 = 1e-10;
    const TOL_GRID: f64 = 1e-3;
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let grid = Grid::new(-20.0, 25.0, 4001);
    let l = Label::new(0, 1);
    let mut t_id = Tracker::new();
    let mut t_grid = Tracker::new();
    let fuse = |r: &[f64], pdfs: &[(f64, f64)], w: &[f64]| -> Option<f64> {
        let dens: Vec<LmbDensity> = r
            .iter()
            .zip(pdfs)
            .map(|(r, (m, v))| LmbDensity::from_entries(vec![(l, *r, scalar(*m, *v))]).expect("valid"))
            .collect();
        let inputs: Vec<(&LmbDensity, f64)> = dens.iter().zip(w).map(|(d, w)| (d, *w)).collect();
        fuse_lmb(&inputs, None).ok()?.get(&l).map(|b| b.existence)
    };

    // Fixture: r = 0.2 and 0.8 with equal weights and a common pdf.
    match fuse(&[0.2, 0.8], &[(0.0, 1.0), (0.0, 1.0)], &[0.5, 0.5]) {
        Some(r) => t_id.abs(r, 0.5, TOL_IDENTICAL),
        None => t_id.fail(),
    }
    let mut cases = 1;
    for _ in 0..200 {
        let n = rng.random_range(2..=4);
        let r: Vec<f64> = (0..n).map(|_| rng.random_range(0.01..0.99)).collect();
        let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..1.0)).collect();
        let sum: f64 = raw.iter().sum();
        let mut w: Vec<f64> = raw.iter().map(|x| x / sum).collect();
        let rest: f64 = w[..n - 1].iter().sum();
        w[n - 1] = 1.0 - rest;
        let (m, v) = (rng.random_range(-2.0..2.0), rng.random_range(0.5..3.0));
        let same = vec![(m, v); n];
        match fuse(&r, &same, &w) {
            Some(got) => t_id.abs(got, lmb_fusion_closed_form(&r, &w, 1.0), TOL_IDENTICAL),
            None => t_id.fail(),
        }
        let distinct: Vec<(f64, f64)> = (0..n).map(|_| (rng.random_range(-2.0..2.0), rng.random_range(0.5..3.0))).collect();
        let eta = eta_on_grid(&distinct, &w, &grid);
        match fuse(&r, &distinct, &w) {
            Some(got) => t_grid.abs(got, lmb_fusion_closed_form(&r, &w, eta), TOL_GRID),
            None => t_grid.fail(),
        }
        cases += 2;
    }
    let note = format!("identical-pdf max error {:.3e}, grid max error {:.3e}", t_id.max, t_grid.max);
    let mut t = Tracker::new();
    t.push(t_id.max, TOL_IDENTICAL);
    t.ok &= t_id.ok && t_grid.ok;
    report("fusion-lmb", cases, t, TOL_IDENTICAL, start, note)
}

fn random_spd(rng: &mut ChaCha8Rng, d: usize) -> DMatrix<f64> {
    let a = DMatrix::from_fn(d, d, |_, _| rng.random_range(-1.0..1.0));
    &a * a.transpose() + DMatrix::identity(d, d) * 0.5
}

/// Consensus on single-Gaussian densities against information-pair averaging, 5 rounds.
pub fn check_ci_consensus() -> OracleReport {
    const TOL: f64 = 1e-8;
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let g = NetworkGraph::undirected(4, &[(0, 1), (1, 2), (2, 3), (1, 3)]).expect("valid graph");
    let omega = metropolis_weights(&g).expect("connected");
    let l = Label::new(0, 1);
    let mut t = Tracker::new();
    let cases = 10;
    let rounds = 5;
    let cfg = ConsensusConfig::default();
    for _ in 0..cases {
        let nodes: Vec<(DVector<f64>, DMatrix<f64>)> = (0..4)
            .map(|_| (DVector::from_fn(4, |_, _| rng.random_range(-3.0..3.0)), random_spd(&mut rng, 4)))
            .collect();
        let reference = information_consensus_reference(&nodes, &omega, rounds);
        let mut current: Vec<MdGlmbDensity> = nodes
            .iter()
            .map(|(m, p)| {
                let gm = GaussianMixture::single(Gaussian::new(m.clone(), p.clone()).expect("spd"));
                MdGlmbDensity::from_weighted(vec![(vec![l], 1.0, vec![gm])]).expect("valid")
            })
            .collect();
        for want in &reference {
            current = match consensus_run(&current, &g, &omega, 1, &cfg) {
                Ok((d, _)) => d,
                Err(_) => {
                    t.fail();
                    break;
                }
            };
            for (d, (wm, wp)) in current.iter().zip(want) {
                let Some((_, h)) = d.heaviest() else {
                    t.fail();
                    continue;
                };
                t.abs((h.log_weight - d.log_mass()).exp(), 1.0, TOL);
                let p = &h.pdfs[0];
                let (m, c) = (p.mean().expect("nonempty"), p.covariance().expect("nonempty"));
                for (a, b) in m.iter().zip(wm.iter()).chain(c.iter().zip(wp.iter())) {
                    t.push((a - b).abs() / b.abs().max(1.0), TOL);
                }
            }
        }
    }
    report("ci-consensus", cases * rounds, t, TOL, start, String::new())
}

/// Powers of the Metropolis matrix of the 7-node network of the bundled scenarios.
pub fn check_consensus_power() -> OracleReport {
    let start = Instant::now();
    let s = Scenario::bundled("paper_highsnr").expect("bundled scenario");
    let omega = metropolis_weights(&s.graph).expect("connected");
    let d1 = consensus_matrix_power_check(&omega, 1);
    let d3 = consensus_matrix_power_check(&omega, 3);
    let d10 = consensus_matrix_power_check(&omega, 10);
    let mut t = Tracker::new();
    t.max = d10.deviation;
    t.ok = s.graph.len() == 7
        && s.graph.diameter() == Some(3)
        && d3.deviation < d1.deviation
        && d10.deviation < 0.05
        && d1.primitive;
    let note = format!(
        "diameter {:?}, deviation n=1 {:.4}, n=3 {:.4}, n=10 {:.4}",
        s.graph.diameter(),
        d1.deviation,
        d3.deviation,
        d10.deviation
    );
    report("consensus-power", 3, t, 0.05, start, note)
}

/// Exhaustive association enumeration against the ranked path with K = 16,
/// two tracks and two measurements.
pub fn check_update_associations() -> OracleReport {
    const TOL: f64 = 1e-12;
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let (a, b) = (Label::new(0, 1), Label::new(0, 2));
    let cfg = FilterConfig {
        hypothesis_threshold: 0.0,
        ..FilterConfig::default()
    };
    let mut t = Tracker::new();
    let mut bitwise = true;
    if enumerate_associations(2, 2).len() != 7 {
        t.fail();
    }
    let cases = 50;
    for _ in 0..cases {
        let p_d = rng.random_range(0.5..0.99);
        let sensor = SensorModel::linear(vec![1.0], rng.random_range(0.3..1.5), rng.random_range(0.5..3.0), p_d, (-10.0, 10.0));
        let items = [vec![], vec![a], vec![b], vec![a, b]]
            .into_iter()
            .map(|s| {
                let pdfs = s.iter().map(|_| scalar(rng.random_range(-3.0..3.0), rng.random_range(0.5..2.0))).collect();
                (s, rng.random_range(0.1..1.0), pdfs)
            })
            .collect();
        let predicted = MdGlmbDensity::from_weighted(items).expect("valid");
        let z = [rng.random_range(-4.0..4.0), rng.random_range(-4.0..4.0)];
        let exhaustive = mdglmb_update_with(&predicted, &z, &sensor, 1, &cfg, all_assignments);
        let ranked = mdglmb_update_with(&predicted, &z, &sensor, 1, &cfg, |lp| ranked_assignments(lp, 16));
        if exhaustive.len() != ranked.len() {
            t.fail();
            continue;
        }
        for ((s0, h0), (s1, h1)) in exhaustive.iter().zip(ranked.iter()) {
            if s0 != s1 {
                t.fail();
                continue;
            }
            t.abs(h1.log_weight, h0.log_weight, TOL);
            bitwise &= h0.log_weight.to_bits() == h1.log_weight.to_bits();
            for (p0, p1) in h0.pdfs.iter().zip(&h1.pdfs) {
                if p0 != p1 {
                    t.fail();
                }
            }
        }
    }
    let note = if bitwise { "log-weights bit-identical" } else { "log-weights differ in low bits" };
    report("update-associations", cases, t, TOL, start, note.into())
}

/// Marginalization against direct sums over random δ-GLMB components.
pub fn check_marginalization() -> OracleReport {
    const TOL: f64 = 1e-12;
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let pool = [Label::new(0, 1), Label::new(0, 2), Label::new(1, 1)];
    let mut t = Tracker::new();
    let cases = 100;
    for _ in 0..cases {
        let shared: Vec<Arc<GaussianMixture>> = pool.iter().map(|_| Arc::new(random_mixture(&mut rng))).collect();
        let n = rng.random_range(1..=8);
        let components: Vec<DeltaComponent> = (0..n)
            .map(|h| {
                let labels: Vec<Label> = pool.iter().copied().filter(|_| rng.random_bool(0.5)).collect();
                let pdfs = labels
                    .iter()
                    .map(|l| {
                        let i = pool.iter().position(|p| p == l).expect("pool label");
                        if rng.random_bool(0.3) { shared[i].clone() } else { Arc::new(random_mixture(&mut rng)) }
                    })
                    .collect();
                DeltaComponent {
                    labels: LabelSet::from_labels(labels).expect("distinct"),
                    history: h as u64,
                    log_weight: rng.random_range(-4.0..0.0),
                    pdfs,
                }
            })
            .collect();
        let delta = DeltaGlmbDensity::new(components);
        let md = marginalize_delta_glmb(&delta);
        let want_pmf = delta.cardinality_distribution();
        let got_pmf = md.cardinality_distribution();
        for k in 0..want_pmf.len().max(got_pmf.len()) {
            t.abs(got_pmf.get(k).copied().unwrap_or(0.0), want_pmf.get(k).copied().unwrap_or(0.0), TOL);
        }
        let total: f64 = delta.components.iter().map(|c| c.log_weight.exp()).sum();
        for l in &pool {
            let (r, p) = intensity_mdglmb(&md, l);
            let want_r: f64 = delta
                .components
                .iter()
                .filter(|c| c.labels.contains(l))
                .map(|c| c.log_weight.exp())
                .sum::<f64>()
                / total;
            t.abs(r, want_r, TOL);
            for _ in 0..5 {
                let x = DVector::from_fn(2, |_, _| rng.random_range(-3.0..3.0));
                let want: f64 = delta
                    .components
                    .iter()
                    .filter_map(|c| c.labels.position(l).map(|pos| (c, pos)))
                    .map(|(c, pos)| c.log_weight.exp() / total * c.pdfs[pos].pdf(&x))
                    .sum();
                let got = if r > 0.0 { r * p.pdf(&x) } else { 0.0 };
                t.push((got - want).abs() / want.abs().max(1.0), TOL);
            }
        }
    }
    report("marginalization", cases, t, TOL, start, String::new())
}

fn random_mixture(rng: &mut ChaCha8Rng) -> GaussianMixture {
    let n = rng.random_range(1..=2);
    let terms = (0..n)
        .map(|_| {
            let m = DVector::from_fn(2, |_, _| rng.random_range(-2.0..2.0));
            let c = random_spd(rng, 2);
            (rng.random_range(0.2..1.0), Gaussian::new(m, c).expect("spd"))
        })
        .collect();
    GaussianMixture::from_weights(terms).expect("valid mixture").normalized()
}

/// OSPA against permutation enumeration on random sets of up to 4 points.
pub fn check_ospa() -> OracleReport {
    const TOL: f64 = 1e-9;
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let mut t = Tracker::new();
    let cases = 1000;
    let points = |rng: &mut ChaCha8Rng| -> Vec<[f64; 2]> {
        let n = rng.random_range(0..=4);
        (0..n).map(|_| [rng.random_range(0.0..1500.0), rng.random_range(0.0..1500.0)]).collect()
    };
    for _ in 0..cases {
        let x = points(&mut rng);
        let y = points(&mut rng);
        t.abs(ospa(&x, &y, 600.0, 2.0).total, ospa_brute_force(&x, &y, 600.0, 2.0), TOL);
    }
    report("ospa", cases, t, TOL, start, String::new())
}

/// LMB cardinality against subset enumeration.
pub fn check_subsets() -> OracleReport {
    const TOL: f64 = 1e-12;
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut t = Tracker::new();
    let cases = 100;
    for i in 0..cases {
        let n = if i == 0 { 10 } else { rng.random_range(0..=8) };
        let r: Vec<f64> = (0..n).map(|_| if i == 0 { 0.09 } else { rng.random_range(0.0..1.0) }).collect();
        let d = LmbDensity::from_entries(
            r.iter()
                .enumerate()
                .map(|(j, r)| (Label::new(0, j as u32), *r, scalar(0.0, 1.0))),
        )
        .expect("valid");
        let want = lmb_cardinality_by_enumeration(&r);
        let got = d.cardinality_distribution();
        for k in 0..want.len() {
            t.abs(got.get(k).copied().unwrap_or(0.0), want[k], TOL);
        }
    }
    report("subsets", cases, t, TOL, start, String::new())
}

pub const NAMES: [&str; 8] = [
    "fusion-mdglmb",
    "fusion-lmb",
    "ci-consensus",
    "consensus-power",
    "update-associations",
    "marginalization",
    "ospa",
    "subsets",
];

/// Runs the check called `name`, or `all` of them.
pub fn run_named(name: &str) -> Result<OracleReport, String> {
    Ok(match name {
        "fusion-mdglmb" => check_fusion_mdglmb(),
        "fusion-lmb" => check_fusion_lmb(),
        "ci-consensus" => check_ci_consensus(),
        "consensus-power" => check_consensus_power(),
        "update-associations" => check_update_associations(),
        "marginalization" => check_marginalization(),
        "ospa" => check_ospa(),
        "subsets" => check_subsets(),
        _ => return Err(format!("unknown oracle {name:?}; expected one of {}", NAMES.join(", "))),
    })
}
