use std::path::Path;

use serde::Deserialize;
use toml::Spanned;

use crate::filters::FilterConfig;
use crate::fusion::{ConsensusConfig, NetworkGraph};
use crate::gm::{Gaussian, GaussianMixture};
use crate::models::{BirthEntry, BirthModel, MotionModel, ProbabilityModel};
use crate::sensors::{SensorModel, DEFAULT_RANGE_MAX};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{source_name}:{line}: {message}")]
    Parse {
        source_name: String,
        line: usize,
        message: String,
    },
    #[error("{source_name}{}: {field}: {message}", line.map(|l| format!(":{l}")).unwrap_or_default())]
    Invalid {
        source_name: String,
        field: String,
        line: Option<usize>,
        message: String,
    },
    #[error("unknown bundled scenario {0:?}")]
    UnknownBundled(String),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    schema_version: u32,
    name: String,
    #[serde(default = "default_seed")]
    seed: u64,
    #[serde(default = "default_trials")]
    trials: usize,
    area: RawArea,
    time: RawTime,
    motion: RawMotion,
    #[serde(default)]
    birth: Vec<Spanned<RawBirth>>,
    sensors: Vec<Spanned<RawSensor>>,
    graph: RawGraph,
    #[serde(default)]
    trajectories: Vec<Spanned<RawTrajectory>>,
    #[serde(default)]
    filter: RawFilter,
    #[serde(default)]
    consensus: RawConsensus,
    #[serde(default)]
    ospa: RawOspa,
}

fn default_seed() -> u64 {
    1
}
fn default_trials() -> usize {
    1
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawArea {
    x: [f64; 2],
    y: [f64; 2],
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTime {
    sampling_interval: f64,
    steps: u32,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMotion {
    sigma_w: f64,
    survival_probability: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBirth {
    index: u32,
    existence: f64,
    mean: Vec<f64>,
    covariance_diag: Vec<f64>,
}

#[derive(Debug, Deserialize, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
enum RawSensorKind {
    Toa,
    Doa,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSensor {
    kind: RawSensorKind,
    position: [f64; 2],
    noise_std: f64,
    clutter_rate: f64,
    detection_probability: f64,
    range_max: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGraph {
    #[serde(default)]
    edges: Vec<Spanned<[usize; 2]>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSegment {
    step: u32,
    velocity: [f64; 2],
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTrajectory {
    id: u32,
    birth: u32,
    death: u32,
    initial_state: [f64; 4],
    #[serde(default)]
    segments: Vec<RawSegment>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawFilter {
    max_hypotheses: usize,
    assignments_per_hypothesis: usize,
    merge_threshold: f64,
    truncation_threshold: f64,
    max_components: usize,
    hypothesis_threshold: f64,
    existence_threshold: f64,
}

impl Default for RawFilter {
    fn default() -> Self {
        let c = FilterConfig::default();
        Self {
            max_hypotheses: c.max_hypotheses,
            assignments_per_hypothesis: c.assignments_per_hypothesis,
            merge_threshold: c.merge_threshold,
            truncation_threshold: c.truncation_threshold,
            max_components: c.max_components,
            hypothesis_threshold: c.hypothesis_threshold,
            existence_threshold: c.existence_threshold,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawConsensus {
    steps: usize,
    premerge: bool,
}

impl Default for RawConsensus {
    fn default() -> Self {
        Self {
            steps: 1,
            premerge: true,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawOspa {
    cutoff: f64,
    order: f64,
}

impl Default for RawOspa {
    fn default() -> Self {
        Self {
            cutoff: 600.0,
            order: 2.0,
        }
    }
}

/// Axis-aligned surveillance rectangle in metres.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Area {
    pub x: (f64, f64),
    pub y: (f64, f64),
}

impl Area {
    pub fn contains(&self, px: f64, py: f64) -> bool {
        px >= self.x.0 && px <= self.x.1 && py >= self.y.0 && py <= self.y.1
    }
}

/// Piecewise-constant-velocity truth object. Present for `birth <= k < death`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub id: u32,
    pub birth: u32,
    pub death: u32,
    pub initial_state: [f64; 4],
    /// `(step, [vx, vy])`: velocity in force from that step on.
    pub segments: Vec<(u32, [f64; 2])>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OspaParams {
    pub cutoff: f64,
    pub order: f64,
}

/// A validated scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub seed: u64,
    pub trials: usize,
    pub area: Area,
    pub sampling_interval: f64,
    pub steps: u32,
    pub motion: MotionModel,
    pub birth: BirthModel,
    pub sensors: Vec<SensorModel>,
    pub graph: NetworkGraph,
    pub trajectories: Vec<Trajectory>,
    pub filter: FilterConfig,
    pub consensus: ConsensusConfig,
    pub consensus_steps: usize,
    pub ospa: OspaParams,
}

const BUNDLED: &[(&str, &str)] = &[
    ("paper_highsnr", include_str!("../../scenarios/paper_highsnr.toml")),
    ("paper_lowsnr", include_str!("../../scenarios/paper_lowsnr.toml")),
    ("paper_lowpd", include_str!("../../scenarios/paper_lowpd.toml")),
    ("desk_small", include_str!("../../scenarios/desk_small.toml")),
];

impl Scenario {
    /// Names of the scenarios compiled into the library.
    pub fn bundled_names() -> Vec<&'static str> {
        BUNDLED.iter().map(|(n, _)| *n).collect()
    }

    pub fn bundled(name: &str) -> Result<Self, ScenarioError> {
        let (_, text) = BUNDLED
            .iter()
            .find(|(n, _)| *n == name)
            .ok_or_else(|| ScenarioError::UnknownBundled(name.to_string()))?;
        Self::parse(text, name)
    }

    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn parse(text: &str, source_name: &str) -> Result<Self, ScenarioError> {
        let line_of = |offset: usize| text[..offset.min(text.len())].matches('\n').count() + 1;
        let raw: RawScenario = toml::from_str(text).map_err(|e| ScenarioError::Parse {
            source_name: source_name.to_string(),
            line: e.span().map(|s| line_of(s.start)).unwrap_or(1),
            message: e.message().to_string(),
        })?;
        let invalid = |field: String, span: Option<std::ops::Range<usize>>, message: String| ScenarioError::Invalid {
            source_name: source_name.to_string(),
            field,
            line: span.map(|s| line_of(s.start)),
            message,
        };

        if raw.schema_version != SCHEMA_VERSION {
            return Err(invalid(
                "schema_version".into(),
                None,
                format!("unsupported version {} (expected {SCHEMA_VERSION})", raw.schema_version),
            ));
        }
        let ts = raw.time.sampling_interval;
        if !(ts > 0.0 && ts.is_finite()) {
            return Err(invalid("time.sampling_interval".into(), None, "must be positive".into()));
        }
        if raw.time.steps == 0 {
            return Err(invalid("time.steps".into(), None, "must be at least 1".into()));
        }
        let area = Area {
            x: (raw.area.x[0], raw.area.x[1]),
            y: (raw.area.y[0], raw.area.y[1]),
        };
        if !(area.x.0 < area.x.1 && area.y.0 < area.y.1) {
            return Err(invalid("area".into(), None, "bounds must be increasing".into()));
        }
        if !(raw.motion.sigma_w > 0.0) {
            return Err(invalid("motion.sigma_w".into(), None, "must be positive".into()));
        }
        let ps = raw.motion.survival_probability;
        if !(0.0..=1.0).contains(&ps) {
            return Err(invalid("motion.survival_probability".into(), None, "must lie in [0, 1]".into()));
        }
        let motion = MotionModel::ncv(ts, raw.motion.sigma_w, ProbabilityModel::Constant(ps));

        let mut birth = BirthModel::default();
        for (i, b) in raw.birth.iter().enumerate() {
            let span = Some(b.span());
            let b = b.get_ref();
            let field = format!("birth[{i}]");
            if !(0.0..=1.0).contains(&b.existence) {
                return Err(invalid(field, span, "existence must lie in [0, 1]".into()));
            }
            if b.mean.len() != 4 || b.covariance_diag.len() != 4 {
                return Err(invalid(field, span, "mean and covariance_diag need 4 entries".into()));
            }
            if birth.entries.iter().any(|e| e.index == b.index) {
                return Err(invalid(field, span, format!("duplicate index {}", b.index)));
            }
            let g = Gaussian::from_diagonal(&b.mean, &b.covariance_diag)
                .map_err(|e| invalid(format!("birth[{i}].covariance_diag"), span.clone(), e.to_string()))?;
            birth.entries.push(BirthEntry {
                index: b.index,
                existence: b.existence,
                pdf: GaussianMixture::single(g),
            });
        }
        birth.entries.sort_by_key(|e| e.index);

        if raw.sensors.is_empty() {
            return Err(invalid("sensors".into(), None, "at least one sensor is required".into()));
        }
        let mut sensors = Vec::with_capacity(raw.sensors.len());
        for (i, s) in raw.sensors.iter().enumerate() {
            let span = Some(s.span());
            let s = s.get_ref();
            if !(s.noise_std > 0.0) {
                return Err(invalid(format!("sensors[{i}].noise_std"), span, "must be positive".into()));
            }
            if !(s.clutter_rate >= 0.0) {
                return Err(invalid(format!("sensors[{i}].clutter_rate"), span, "must be non-negative".into()));
            }
            if !(0.0..=1.0).contains(&s.detection_probability) {
                return Err(invalid(format!("sensors[{i}].detection_probability"), span, "must lie in [0, 1]".into()));
            }
            let mut model = match s.kind {
                RawSensorKind::Toa => SensorModel::toa(s.position, s.noise_std, s.clutter_rate, s.detection_probability),
                RawSensorKind::Doa => SensorModel::doa(s.position, s.noise_std, s.clutter_rate, s.detection_probability),
            };
            if let Some(r) = s.range_max {
                if s.kind != RawSensorKind::Toa || !(r > 0.0) {
                    return Err(invalid(format!("sensors[{i}].range_max"), span, "only a positive bound on toa sensors".into()));
                }
                model.space = (0.0, r);
            } else if s.kind == RawSensorKind::Toa {
                model.space = (0.0, DEFAULT_RANGE_MAX);
            }
            sensors.push(model);
        }

        let mut edges = Vec::with_capacity(raw.graph.edges.len());
        for (i, e) in raw.graph.edges.iter().enumerate() {
            let [a, b] = *e.get_ref();
            if a >= sensors.len() || b >= sensors.len() || a == b {
                return Err(invalid(
                    format!("graph.edges[{i}]"),
                    Some(e.span()),
                    format!("edge [{a}, {b}] must join two distinct sensors in 0..{}", sensors.len()),
                ));
            }
            edges.push((a, b));
        }
        let graph = NetworkGraph::undirected(sensors.len(), &edges).expect("edges checked");
        if !graph.is_strongly_connected() {
            return Err(invalid("graph.edges".into(), None, "graph is disconnected".into()));
        }

        let mut trajectories = Vec::with_capacity(raw.trajectories.len());
        for (i, t) in raw.trajectories.iter().enumerate() {
            let span = Some(t.span());
            let t = t.get_ref();
            let field = format!("trajectories[{i}]");
            if t.death <= t.birth {
                return Err(invalid(format!("{field}.death"), span, format!("death {} must exceed birth {}", t.death, t.birth)));
            }
            if trajectories.iter().any(|o: &Trajectory| o.id == t.id) {
                return Err(invalid(format!("{field}.id"), span, format!("duplicate id {}", t.id)));
            }
            let mut segments: Vec<(u32, [f64; 2])> = t.segments.iter().map(|s| (s.step, s.velocity)).collect();
            segments.sort_by_key(|s| s.0);
            let traj = Trajectory {
                id: t.id,
                birth: t.birth,
                death: t.death,
                initial_state: t.initial_state,
                segments,
            };
            for k in traj.birth..traj.death.min(raw.time.steps) {
                let x = traj.state_at(k, ts).expect("alive");
                if !area.contains(x[0], x[2]) {
                    return Err(invalid(
                        field.clone(),
                        span,
                        format!("leaves the surveillance area at step {k} ({:.0}, {:.0})", x[0], x[2]),
                    ));
                }
            }
            trajectories.push(traj);
        }

        let f = &raw.filter;
        if f.max_hypotheses == 0 || f.assignments_per_hypothesis == 0 || f.max_components == 0 {
            return Err(invalid("filter".into(), None, "hypothesis, assignment and component caps must be at least 1".into()));
        }
        let filter = FilterConfig {
            max_hypotheses: f.max_hypotheses,
            assignments_per_hypothesis: f.assignments_per_hypothesis,
            merge_threshold: f.merge_threshold,
            truncation_threshold: f.truncation_threshold,
            max_components: f.max_components,
            hypothesis_threshold: f.hypothesis_threshold,
            existence_threshold: f.existence_threshold,
            ..FilterConfig::default()
        };
        let consensus = ConsensusConfig {
            merge_threshold: f.merge_threshold,
            truncation_threshold: f.truncation_threshold,
            max_components: f.max_components,
            premerge: raw.consensus.premerge,
            state_dim: 4,
        };
        if !(raw.ospa.cutoff > 0.0) || !(raw.ospa.order >= 1.0) {
            return Err(invalid("ospa".into(), None, "cutoff must be positive and order at least 1".into()));
        }
        if raw.trials == 0 {
            return Err(invalid("trials".into(), None, "must be at least 1".into()));
        }

        Ok(Self {
            name: raw.name,
            seed: raw.seed,
            trials: raw.trials,
            area,
            sampling_interval: ts,
            steps: raw.time.steps,
            motion,
            birth,
            sensors,
            graph,
            trajectories,
            filter,
            consensus,
            consensus_steps: raw.consensus.steps,
            ospa: OspaParams {
                cutoff: raw.ospa.cutoff,
                order: raw.ospa.order,
            },
        })
    }

    /// Sets clutter rate on every sensor.
    pub fn with_clutter_rate(mut self, rate: f64) -> Self {
        for s in &mut self.sensors {
            s.clutter_rate = rate;
        }
        self
    }

    /// Sets a constant detection probability on every sensor.
    pub fn with_detection_probability(mut self, p_d: f64) -> Self {
        for s in &mut self.sensors {
            s.detection = ProbabilityModel::Constant(p_d);
        }
        self
    }
}

impl Trajectory {
    /// State at step `k`, or `None` outside `[birth, death)`.
    pub fn state_at(&self, k: u32, ts: f64) -> Option<[f64; 4]> {
        if k < self.birth || k >= self.death {
            return None;
        }
        let mut x = self.initial_state;
        for step in self.birth + 1..=k {
            for (s, v) in &self.segments {
                if *s == step {
                    x[1] = v[0];
                    x[3] = v[1];
                }
            }
            x[0] += ts * x[1];
            x[2] += ts * x[3];
        }
        Some(x)
    }
}
