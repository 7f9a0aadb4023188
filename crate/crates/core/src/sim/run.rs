use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use super::ospa::{ospa, OspaEntry};
use super::truth::{generate_truth, positions, TruthSet};
use super::Scenario;
use crate::filters::{
    centralized_mdglmb_step, extract_estimates_lmb, extract_estimates_mdglmb, lmb_predict, lmb_update, mdglmb_predict,
    mdglmb_update, Estimate, FilterError,
};
use crate::fusion::{consensus_run, metropolis_weights, ExchangeStats, Fusable, FusionError};
use crate::labeled::{Label, LmbDensity, MdGlmbDensity};
use crate::sensors::{simulate_measurements, stream_rng, SensorError, SensorModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    ConsensusMdglmb,
    ConsensusLmb,
    CentralizedMdglmb,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Self::ConsensusMdglmb, Self::ConsensusLmb, Self::CentralizedMdglmb];

    pub fn name(self) -> &'static str {
        match self {
            Self::ConsensusMdglmb => "consensus-mdglmb",
            Self::ConsensusLmb => "consensus-lmb",
            Self::CentralizedMdglmb => "centralized-mdglmb",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| format!("unknown algorithm {s:?} (expected one of consensus-mdglmb, consensus-lmb, centralized-mdglmb)"))
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("trial {trial}, step {step}, node {node}: {source}")]
    Filter {
        trial: usize,
        step: u32,
        node: usize,
        #[source]
        source: FilterError,
    },
    #[error("trial {trial}, step {step}: consensus: {source}")]
    Fusion {
        trial: usize,
        step: u32,
        #[source]
        source: FusionError,
    },
    #[error("trial {trial}, step {step}, sensor {sensor}: measurement simulation: {source}")]
    Sensor {
        trial: usize,
        step: u32,
        sensor: usize,
        #[source]
        source: SensorError,
    },
    #[error("cannot start worker pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateRecord {
    pub label: Label,
    pub state: Vec<f64>,
}

impl From<&Estimate> for EstimateRecord {
    fn from(e: &Estimate) -> Self {
        Self {
            label: e.label,
            state: e.state.iter().copied().collect(),
        }
    }
}

/// One node's output at one step.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepRecord {
    pub estimates: Vec<EstimateRecord>,
    pub ospa: OspaEntry,
}

impl StepRecord {
    pub fn cardinality(&self) -> usize {
        self.estimates.len()
    }
}

/// Output of one Monte-Carlo trial. `nodes[i][k]` is node `i` at step `k`;
/// the centralized filter reports a single node.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialResult {
    pub algorithm: Algorithm,
    pub trial: usize,
    pub truth_cardinality: Vec<usize>,
    pub nodes: Vec<Vec<StepRecord>>,
    pub exchange: ExchangeStats,
}

impl TrialResult {
    /// Canonical serialization; equal bytes for equal results.
    pub fn to_bytes(&self) -> Vec<u8> {
        serde_json::to_vec(self).expect("serializable")
    }
}

fn record(estimates: Vec<Estimate>, truth: &TruthSet, s: &Scenario) -> StepRecord {
    let est: Vec<[f64; 2]> = estimates.iter().map(|e| [e.state[0], e.state[2]]).collect();
    StepRecord {
        ospa: ospa(&positions(truth), &est, s.ospa.cutoff, s.ospa.order),
        estimates: estimates.iter().map(EstimateRecord::from).collect(),
    }
}

/// All scans of a trial: `scans[k][j]` from sensor `j` at step `k`. Sensor `j`
/// draws from its own stream of `seed`, so scans do not depend on the algorithm.
pub fn simulate_scans(s: &Scenario, truth: &[TruthSet], seed: u64, trial: usize) -> Result<Vec<Vec<Vec<f64>>>, RunError> {
    let mut rngs: Vec<_> = (0..s.sensors.len()).map(|j| stream_rng(seed, trial as u64, j as u64)).collect();
    let mut out = Vec::with_capacity(truth.len());
    for (k, set) in truth.iter().enumerate() {
        let mut step = Vec::with_capacity(s.sensors.len());
        for (j, (sensor, rng)) in s.sensors.iter().zip(rngs.iter_mut()).enumerate() {
            let z = simulate_measurements(set, sensor, k as u32, rng).map_err(|source| RunError::Sensor {
                trial,
                step: k as u32,
                sensor: j,
                source,
            })?;
            step.push(z);
        }
        out.push(step);
    }
    Ok(out)
}

fn run_consensus<D, L, E>(
    s: &Scenario,
    init: D,
    local: L,
    extract: E,
    consensus_steps: usize,
    truth: &[TruthSet],
    scans: &[Vec<Vec<f64>>],
    trial: usize,
) -> Result<(Vec<Vec<StepRecord>>, ExchangeStats), RunError>
where
    D: Fusable,
    L: Fn(&D, &[f64], &SensorModel, u32) -> Result<D, FilterError> + Sync,
    E: Fn(&D) -> Vec<Estimate>,
{
    let n = s.sensors.len();
    let omega = metropolis_weights(&s.graph).map_err(|source| RunError::Fusion { trial, step: 0, source })?;
    let mut posts = vec![init; n];
    let mut nodes = vec![Vec::with_capacity(truth.len()); n];
    let mut stats = ExchangeStats::default();
    for (k, set) in truth.iter().enumerate() {
        let step = k as u32;
        let locals: Vec<D> = posts
            .par_iter()
            .zip(s.sensors.par_iter())
            .enumerate()
            .map(|(i, (p, sensor))| {
                local(p, &scans[k][i], sensor, step).map_err(|source| RunError::Filter {
                    trial,
                    step,
                    node: i,
                    source,
                })
            })
            .collect::<Result<_, _>>()?;
        let (fused, st) = consensus_run(&locals, &s.graph, &omega, consensus_steps, &s.consensus)
            .map_err(|source| RunError::Fusion { trial, step, source })?;
        stats += st;
        for (i, d) in fused.iter().enumerate() {
            nodes[i].push(record(extract(d), set, s));
        }
        posts = fused;
    }
    Ok((nodes, stats))
}

/// Runs one trial of `algorithm` with `consensus_steps` rounds per step.
pub fn run_trial(
    s: &Scenario,
    algorithm: Algorithm,
    consensus_steps: usize,
    seed: u64,
    trial: usize,
) -> Result<TrialResult, RunError> {
    let truth = generate_truth(s);
    let scans = simulate_scans(s, &truth, seed, trial)?;
    let cfg = &s.filter;
    let (nodes, exchange) = match algorithm {
        Algorithm::ConsensusMdglmb => run_consensus(
            s,
            MdGlmbDensity::no_objects(),
            |p, z, sensor, k| {
                let pred = mdglmb_predict(p, &s.motion, &s.birth, k, cfg)?;
                Ok(mdglmb_update(&pred, z, sensor, k, cfg))
            },
            extract_estimates_mdglmb,
            consensus_steps,
            &truth,
            &scans,
            trial,
        )?,
        Algorithm::ConsensusLmb => run_consensus(
            s,
            LmbDensity::empty(),
            |p, z, sensor, k| {
                let pred = lmb_predict(p, &s.motion, &s.birth, k)?;
                Ok(lmb_update(&pred, z, sensor, k, cfg))
            },
            extract_estimates_lmb,
            consensus_steps,
            &truth,
            &scans,
            trial,
        )?,
        Algorithm::CentralizedMdglmb => {
            let mut post = MdGlmbDensity::no_objects();
            let mut out = Vec::with_capacity(truth.len());
            for (k, set) in truth.iter().enumerate() {
                let step: Vec<(&SensorModel, &[f64])> =
                    s.sensors.iter().zip(&scans[k]).map(|(m, z)| (m, z.as_slice())).collect();
                post = centralized_mdglmb_step(&post, &s.motion, &s.birth, &step, k as u32, cfg).map_err(|source| {
                    RunError::Filter {
                        trial,
                        step: k as u32,
                        node: 0,
                        source,
                    }
                })?;
                out.push(record(extract_estimates_mdglmb(&post), set, s));
            }
            (vec![out], ExchangeStats::default())
        }
    };
    Ok(TrialResult {
        algorithm,
        trial,
        truth_cardinality: truth.iter().map(Vec::len).collect(),
        nodes,
        exchange,
    })
}

/// Per-step aggregate over trials (and nodes, for the network summary).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepSummary {
    pub step: u32,
    pub truth_card: usize,
    pub est_card_mean: f64,
    pub est_card_std: f64,
    pub ospa: f64,
    pub ospa_loc: f64,
    pub ospa_card: f64,
}

/// Mean and population standard deviation, summed in slice order.
fn summarize(step: u32, truth_card: usize, samples: &[&StepRecord]) -> StepSummary {
    let n = samples.len() as f64;
    let mean = |f: &dyn Fn(&StepRecord) -> f64| samples.iter().map(|r| f(r)).sum::<f64>() / n;
    let card_mean = mean(&|r| r.cardinality() as f64);
    let var = samples
        .iter()
        .map(|r| (r.cardinality() as f64 - card_mean).powi(2))
        .sum::<f64>()
        / n;
    StepSummary {
        step,
        truth_card,
        est_card_mean: card_mean,
        est_card_std: var.sqrt(),
        ospa: mean(&|r| r.ospa.total),
        ospa_loc: mean(&|r| r.ospa.loc),
        ospa_card: mean(&|r| r.ospa.card),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentResult {
    pub scenario: String,
    pub algorithm: Algorithm,
    pub consensus_steps: usize,
    pub seed: u64,
    pub trials: usize,
    pub workers: usize,
    /// `nodes[i]`: per-step summary of node `i` over trials.
    #[serde(skip)]
    pub nodes: Vec<Vec<StepSummary>>,
    /// Per-step summary over all nodes and trials.
    #[serde(skip)]
    pub network: Vec<StepSummary>,
    /// Exchange totals over all trials.
    pub exchange: ExchangeStats,
    pub trial_wall_seconds: Vec<f64>,
    pub total_wall_seconds: f64,
}

/// Mean absolute cardinality error and mean OSPA over `steps` of a summary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WindowMetrics {
    pub card_error: f64,
    pub ospa: f64,
}

pub fn window_metrics(summary: &[StepSummary], steps: std::ops::RangeInclusive<u32>) -> WindowMetrics {
    let rows: Vec<&StepSummary> = summary.iter().filter(|r| steps.contains(&r.step)).collect();
    let n = rows.len().max(1) as f64;
    WindowMetrics {
        card_error: rows.iter().map(|r| (r.est_card_mean - r.truth_card as f64).abs()).sum::<f64>() / n,
        ospa: rows.iter().map(|r| r.ospa).sum::<f64>() / n,
    }
}

/// Aggregates finished trials, in the given order.
pub fn aggregate(trials: &[TrialResult]) -> (Vec<Vec<StepSummary>>, Vec<StepSummary>) {
    let Some(first) = trials.first() else {
        return (Vec::new(), Vec::new());
    };
    let n_nodes = first.nodes.len();
    let steps = first.truth_cardinality.len();
    let nodes = (0..n_nodes)
        .map(|i| {
            (0..steps)
                .map(|k| {
                    let samples: Vec<&StepRecord> = trials.iter().map(|t| &t.nodes[i][k]).collect();
                    summarize(k as u32, first.truth_cardinality[k], &samples)
                })
                .collect()
        })
        .collect();
    let network = (0..steps)
        .map(|k| {
            let samples: Vec<&StepRecord> = trials.iter().flat_map(|t| t.nodes.iter().map(move |n| &n[k])).collect();
            summarize(k as u32, first.truth_cardinality[k], &samples)
        })
        .collect();
    (nodes, network)
}

/// Runs `trials` independent trials on `workers` threads and aggregates them.
///
/// Trial `t` uses master seed `seed` and stream `t`; results do not depend on `workers`.
pub fn run_experiment(
    s: &Scenario,
    algorithm: Algorithm,
    consensus_steps: usize,
    trials: usize,
    seed: u64,
    workers: usize,
) -> Result<(ExperimentResult, Vec<TrialResult>), RunError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| RunError::Pool(e.to_string()))?;
    let start = Instant::now();
    let timed: Vec<Result<(TrialResult, f64), RunError>> = pool.install(|| {
        (0..trials)
            .into_par_iter()
            .map(|t| {
                let t0 = Instant::now();
                let r = run_trial(s, algorithm, consensus_steps, seed, t)?;
                log::info!("{} trial {t} done in {:.2}s", algorithm, t0.elapsed().as_secs_f64());
                Ok((r, t0.elapsed().as_secs_f64()))
            })
            .collect()
    });
    let mut results = Vec::with_capacity(trials);
    let mut wall = Vec::with_capacity(trials);
    let mut exchange = ExchangeStats::default();
    for r in timed {
        let (r, secs) = r?;
        exchange += r.exchange;
        wall.push(secs);
        results.push(r);
    }
    let (nodes, network) = aggregate(&results);
    Ok((
        ExperimentResult {
            scenario: s.name.clone(),
            algorithm,
            consensus_steps,
            seed,
            trials,
            workers: workers.max(1),
            nodes,
            network,
            exchange,
            trial_wall_seconds: wall,
            total_wall_seconds: start.elapsed().as_secs_f64(),
        },
        results,
    ))
}
