use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dmot_core::oracle;
use dmot_core::sim::{run_experiment, window_metrics, write_experiment, Algorithm, Scenario, ScenarioError};

/// Overrides the number of trial workers.
const WORKERS_ENV: &str = "DMOT_WORKERS";

#[derive(Parser)]
#[command(name = "dmot", version, about = "Distributed multi-object tracking simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte-Carlo experiment and write per-step CSVs and summary.json.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        algorithm: Algorithm,
        /// Defaults to the scenario's trial count.
        #[arg(long)]
        trials: Option<usize>,
        /// Defaults to the scenario's consensus steps.
        #[arg(long)]
        consensus_steps: Option<usize>,
        /// Defaults to the scenario's seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Parse and validate a scenario file.
    Validate {
        #[arg(long)]
        scenario: PathBuf,
    },
    /// Run a brute-force oracle check by name (`list` prints the names).
    Oracle { name: String },
}

/// Exit codes by failure category.
enum Failure {
    Usage(String),
    Scenario(ScenarioError),
    Runtime(String),
    Io(String),
    OracleMismatch(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Scenario(_) => 3,
            Failure::Runtime(_) => 4,
            Failure::Io(_) => 5,
            Failure::OracleMismatch(_) => 6,
        }
    }

    fn report(&self) -> String {
        match self {
            Failure::Usage(m) => format!("usage error: {m}"),
            Failure::Scenario(e) => format!("scenario error: {e}"),
            Failure::Runtime(m) => format!("runtime error: {m}"),
            Failure::Io(m) => format!("io error: {m}"),
            Failure::OracleMismatch(m) => format!("oracle mismatch: {m}"),
        }
    }
}

fn workers() -> Result<usize, Failure> {
    match std::env::var(WORKERS_ENV) {
        Ok(v) => v
            .parse::<usize>()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| Failure::Usage(format!("{WORKERS_ENV} must be a positive integer, got {v:?}"))),
        Err(_) => Ok(std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)),
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Validate { scenario } => {
            let s = Scenario::load(&scenario).map_err(Failure::Scenario)?;
            println!(
                "{}: ok ({} sensors, {} birth components, {} trajectories, {} steps, graph diameter {})",
                s.name,
                s.sensors.len(),
                s.birth.entries.len(),
                s.trajectories.len(),
                s.steps,
                s.graph.diameter().unwrap_or(0)
            );
            Ok(())
        }
        Command::Run {
            scenario,
            algorithm,
            trials,
            consensus_steps,
            seed,
            out,
        } => {
            let s = Scenario::load(&scenario).map_err(Failure::Scenario)?;
            let trials = trials.unwrap_or(s.trials);
            if trials == 0 {
                return Err(Failure::Usage("--trials must be at least 1".into()));
            }
            let (res, _) = run_experiment(
                &s,
                algorithm,
                consensus_steps.unwrap_or(s.consensus_steps),
                trials,
                seed.unwrap_or(s.seed),
                workers()?,
            )
            .map_err(|e| Failure::Runtime(e.to_string()))?;
            write_experiment(&res, &out).map_err(|e| Failure::Io(format!("{}: {e}", out.display())))?;
            let last = s.steps.saturating_sub(1);
            let w = window_metrics(&res.network, 0..=last);
            println!(
                "{} on {}: {} trials, mean OSPA {:.1} m, mean |card error| {:.3}, {} bytes exchanged, {:.1}s",
                algorithm,
                s.name,
                trials,
                w.ospa,
                w.card_error,
                res.exchange.nominal_bytes,
                res.total_wall_seconds
            );
            Ok(())
        }
        Command::Oracle { name } => {
            if name == "list" {
                for n in oracle::NAMES {
                    println!("{n}");
                }
                return Ok(());
            }
            let report = oracle::run_named(&name).map_err(Failure::Usage)?;
            println!("{report}");
            if report.passed {
                Ok(())
            } else {
                Err(Failure::OracleMismatch(name))
            }
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.report());
            ExitCode::from(f.code())
        }
    }
}
