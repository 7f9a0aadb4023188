//! Scenarios, ground truth, Monte-Carlo runs and OSPA scoring.

mod ospa;
mod output;
mod run;
mod scenario;
mod truth;

pub use ospa::{ospa, OspaEntry};
pub use output::{write_experiment, CSV_COLUMNS};
pub use run::{
    aggregate, run_experiment, run_trial, simulate_scans, window_metrics, Algorithm, EstimateRecord, ExperimentResult,
    RunError, StepRecord, StepSummary, TrialResult, WindowMetrics,
};
pub use scenario::{Area, OspaParams, Scenario, ScenarioError, Trajectory, SCHEMA_VERSION};
pub use truth::{generate_truth, positions, TruthSet};

/// Loads and validates a scenario file.
pub fn load_scenario(path: &std::path::Path) -> Result<Scenario, ScenarioError> {
    Scenario::load(path)
}
