use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const SMALL: &str = r#"
schema_version = 1
name = "cli_small"
seed = 5
trials = 2

[area]
x = [0.0, 10000.0]
y = [0.0, 10000.0]

[time]
sampling_interval = 5.0
steps = 6

[motion]
sigma_w = 5.0
survival_probability = 0.99

[[birth]]
index = 1
existence = 0.1
mean = [3000.0, 0.0, 3000.0, 0.0]
covariance_diag = [1.0e6, 1.0e4, 1.0e6, 1.0e4]

[[sensors]]
kind = "toa"
position = [0.0, 5000.0]
noise_std = 50.0
clutter_rate = 1.0
detection_probability = 0.95

[[sensors]]
kind = "doa"
position = [10000.0, 5000.0]
noise_std = 0.02
clutter_rate = 1.0
detection_probability = 0.95

[graph]
edges = [[0, 1]]

[[trajectories]]
id = 1
birth = 0
death = 6
initial_state = [3000.0, 20.0, 3000.0, 10.0]

[filter]
max_hypotheses = 50
assignments_per_hypothesis = 5
"#;

fn dmot(args: &[&str], workers: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_dmot"));
    cmd.args(args).env_remove("DMOT_WORKERS");
    if let Some(w) = workers {
        cmd.env("DMOT_WORKERS", w);
    }
    cmd.output().expect("binary runs")
}

fn write_scenario(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("scenario.toml");
    std::fs::write(&p, text).unwrap();
    p
}

fn bundled(name: &str) -> String {
    format!("{}/../core/scenarios/{name}.toml", env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn validate_accepts_bundled_scenarios() {
    for name in ["desk_small", "paper_highsnr", "paper_lowsnr", "paper_lowpd"] {
        let out = dmot(&["validate", "--scenario", &bundled(name)], None);
        assert!(out.status.success(), "{name}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(String::from_utf8_lossy(&out.stdout).contains("ok"));
    }
}

#[test]
fn validate_reports_field_and_line() {
    let dir = tempfile::tempdir().unwrap();
    let bad = SMALL.replacen("noise_std = 50.0", "noise_std = -1.0", 1);
    let p = write_scenario(dir.path(), &bad);
    let out = dmot(&["validate", "--scenario", p.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("sensors[0].noise_std"), "{err}");
    assert!(err.contains("scenario.toml:"), "{err}");

    let missing = dmot(&["validate", "--scenario", "/nonexistent/x.toml"], None);
    assert_eq!(missing.status.code(), Some(3));
}

#[test]
fn run_writes_csvs_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_scenario(dir.path(), SMALL);
    let out_dir = dir.path().join("out");
    let out = dmot(
        &[
            "run", "--scenario", p.to_str().unwrap(), "--algorithm", "consensus-mdglmb", "--trials", "2",
            "--consensus-steps", "2", "--seed", "9", "--out", out_dir.to_str().unwrap(),
        ],
        Some("2"),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["node_0.csv", "node_1.csv", "network.csv"] {
        let text = std::fs::read_to_string(out_dir.join(f)).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("step,truth_card,est_card_mean,est_card_std,ospa,ospa_loc,ospa_card"));
        assert_eq!(lines.count(), 6, "{f}");
    }
    let summary: String = std::fs::read_to_string(out_dir.join("summary.json")).unwrap().split_whitespace().collect();
    assert!(summary.contains("\"workers\":2"), "{summary}");
    assert!(summary.contains("\"consensus_steps\":2"), "{summary}");
}

#[test]
fn runs_are_reproducible_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_scenario(dir.path(), SMALL);
    let mut csvs = Vec::new();
    for workers in ["1", "3"] {
        let out_dir = dir.path().join(format!("w{workers}"));
        let out = dmot(
            &["run", "--scenario", p.to_str().unwrap(), "--algorithm", "consensus-lmb", "--out", out_dir.to_str().unwrap()],
            Some(workers),
        );
        assert!(out.status.success());
        csvs.push(std::fs::read(out_dir.join("network.csv")).unwrap());
    }
    assert_eq!(csvs[0], csvs[1]);
}

#[test]
fn usage_errors_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_scenario(dir.path(), SMALL);
    let path = p.to_str().unwrap();
    let out_dir = dir.path().join("o");
    let out = out_dir.to_str().unwrap();
    assert_eq!(dmot(&["run", "--scenario", path, "--algorithm", "kalman", "--out", out], None).status.code(), Some(2));
    assert_eq!(
        dmot(&["run", "--scenario", path, "--algorithm", "consensus-lmb", "--out", out], Some("zero")).status.code(),
        Some(2)
    );
    assert_eq!(
        dmot(&["run", "--scenario", path, "--algorithm", "consensus-lmb", "--trials", "0", "--out", out], None).status.code(),
        Some(2)
    );
    assert_eq!(dmot(&["oracle", "nope"], None).status.code(), Some(2));
}

#[test]
fn unwritable_output_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_scenario(dir.path(), SMALL);
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let out = dmot(
        &["run", "--scenario", p.to_str().unwrap(), "--algorithm", "centralized-mdglmb", "--out", blocker.join("sub").to_str().unwrap()],
        None,
    );
    assert_eq!(out.status.code(), Some(5));
}

#[test]
fn oracle_subcommand() {
    let list = dmot(&["oracle", "list"], None);
    assert!(list.status.success());
    let names = String::from_utf8_lossy(&list.stdout).to_string();
    assert!(names.lines().any(|l| l == "ospa"));
    let out = dmot(&["oracle", "ospa"], None);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("PASS"));
}
