use std::fs;
use std::io;
use std::path::Path;

use super::run::{ExperimentResult, StepSummary};

/// Column order of every per-step CSV.
pub const CSV_COLUMNS: [&str; 7] = ["step", "truth_card", "est_card_mean", "est_card_std", "ospa", "ospa_loc", "ospa_card"];

fn write_csv(path: &Path, rows: &[StepSummary]) -> io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    if rows.is_empty() {
        w.write_record(CSV_COLUMNS)?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()
}

/// Writes `node_<i>.csv` per node, `network.csv` and `summary.json` into `dir`.
pub fn write_experiment(result: &ExperimentResult, dir: &Path) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    for (i, rows) in result.nodes.iter().enumerate() {
        write_csv(&dir.join(format!("node_{i}.csv")), rows)?;
    }
    write_csv(&dir.join("network.csv"), &result.network)?;
    let json = serde_json::to_string_pretty(result).map_err(io::Error::other)?;
    fs::write(dir.join("summary.json"), json + "\n")
}
