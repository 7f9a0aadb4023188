//! Acceptance suite. Runs every criterion, prints one line each, and exits
//! nonzero if any failed.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use dmot_core::oracle::{self, OracleReport};
use dmot_core::sim::{run_experiment, run_trial, window_metrics, Algorithm, ExperimentResult, Scenario, WindowMetrics};

const WINDOW: std::ops::RangeInclusive<u32> = 15..=35;
const SLACK: f64 = 1.15;
const SEED: u64 = 7;

struct Outcome {
    passed: bool,
    detail: String,
}

fn oracle_criterion(report: OracleReport, budget: Duration) -> Outcome {
    let in_time = report.seconds < budget.as_secs_f64();
    Outcome {
        passed: report.passed && in_time,
        detail: format!("{report}; budget {:.0}s", budget.as_secs_f64()),
    }
}

fn workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

fn window(res: &ExperimentResult) -> WindowMetrics {
    window_metrics(&res.network, WINDOW)
}

fn experiment(s: &Scenario, alg: Algorithm, n: usize) -> Result<WindowMetrics, String> {
    run_experiment(s, alg, n, s.trials, SEED, workers())
        .map(|(res, _)| window(&res))
        .map_err(|e| e.to_string())
}

fn desk_tracking() -> Result<Outcome, String> {
    let start = Instant::now();
    let s = Scenario::bundled("desk_small").map_err(|e| e.to_string())?;
    let n1 = experiment(&s, Algorithm::ConsensusMdglmb, 1)?;
    let n3 = experiment(&s, Algorithm::ConsensusMdglmb, 3)?;
    let lmb = experiment(&s, Algorithm::ConsensusLmb, 1)?;
    let central = experiment(&s, Algorithm::CentralizedMdglmb, 1)?;
    let secs = start.elapsed().as_secs_f64();
    let tracks = |w: &WindowMetrics| w.card_error < 0.3 && w.ospa < 300.0;
    let ordered = central.ospa <= SLACK * n3.ospa && n3.ospa <= SLACK * n1.ospa;
    Ok(Outcome {
        passed: tracks(&n1) && tracks(&lmb) && ordered && secs < 300.0,
        detail: format!(
            "{} trials; card error / OSPA: mdglmb N=1 {:.3}/{:.1}, N=3 {:.3}/{:.1}, lmb {:.3}/{:.1}, centralized {:.3}/{:.1}; ordering {}; {:.0}s (budget 300s)",
            s.trials,
            n1.card_error,
            n1.ospa,
            n3.card_error,
            n3.ospa,
            lmb.card_error,
            lmb.ospa,
            central.card_error,
            central.ospa,
            if ordered { "holds" } else { "violated" },
            secs
        ),
    })
}

fn low_snr() -> Result<Outcome, String> {
    let start = Instant::now();
    let s = Scenario::bundled("desk_small").map_err(|e| e.to_string())?.with_clutter_rate(15.0);
    let md = experiment(&s, Algorithm::ConsensusMdglmb, 1)?;
    let lmb = experiment(&s, Algorithm::ConsensusLmb, 1)?;
    let secs = start.elapsed().as_secs_f64();
    let lmb_fails = lmb.card_error >= 0.5;
    Ok(Outcome {
        passed: md.card_error < 0.5 && secs < 300.0,
        detail: format!(
            "clutter rate 15; card error mdglmb {:.3}, lmb {:.3}; {}; {:.0}s (budget 300s)",
            md.card_error,
            lmb.card_error,
            if lmb_fails { "lmb loses track" } else { "REVIEW: lmb still tracks at this scale" },
            secs
        ),
    })
}

fn determinism() -> Result<Outcome, String> {
    let start = Instant::now();
    let s = Scenario::bundled("desk_small").map_err(|e| e.to_string())?;
    let trials = 4;
    let mut identical = true;
    for alg in Algorithm::ALL {
        let serial: Vec<Vec<u8>> = (0..trials)
            .map(|t| run_trial(&s, alg, 1, SEED, t).map(|r| r.to_bytes()))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        let again = run_trial(&s, alg, 1, SEED, 0).map_err(|e| e.to_string())?.to_bytes();
        let (_, pooled) = run_experiment(&s, alg, 1, trials, SEED, 8).map_err(|e| e.to_string())?;
        identical &= again == serial[0];
        identical &= pooled.len() == trials && pooled.iter().zip(&serial).all(|(p, b)| &p.to_bytes() == b);
    }
    let secs = start.elapsed().as_secs_f64();
    Ok(Outcome {
        passed: identical && secs < 120.0,
        detail: format!(
            "{} algorithms x {trials} trials, repeated and on 8 workers: {}; {:.0}s (budget 120s)",
            Algorithm::ALL.len(),
            if identical { "byte-identical" } else { "outputs differ" },
            secs
        ),
    })
}

fn main() -> ExitCode {
    let criteria: Vec<(&str, Box<dyn Fn() -> Result<Outcome, String>>)> = vec![
        ("mdglmb fusion vs set-integral quadrature", Box::new(|| Ok(oracle_criterion(oracle::check_fusion_mdglmb(), Duration::from_secs(10))))),
        ("lmb fusion vs closed form", Box::new(|| Ok(oracle_criterion(oracle::check_fusion_lmb(), Duration::from_secs(5))))),
        ("gaussian consensus vs information averaging", Box::new(|| Ok(oracle_criterion(oracle::check_ci_consensus(), Duration::from_secs(1))))),
        ("consensus matrix powers on 7-node network", Box::new(|| Ok(oracle_criterion(oracle::check_consensus_power(), Duration::from_secs(1))))),
        ("ranked vs exhaustive update", Box::new(|| Ok(oracle_criterion(oracle::check_update_associations(), Duration::from_secs(1))))),
        ("delta-glmb marginalization", Box::new(|| Ok(oracle_criterion(oracle::check_marginalization(), Duration::from_secs(5))))),
        ("desk_small tracking and ordering", Box::new(desk_tracking)),
        ("desk_small low SNR", Box::new(low_snr)),
        ("ospa vs brute force", Box::new(|| Ok(oracle_criterion(oracle::check_ospa(), Duration::from_secs(10))))),
        ("run_trial determinism", Box::new(determinism)),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = run().unwrap_or_else(|e| Outcome {
            passed: false,
            detail: format!("error: {e}"),
        });
        failed += usize::from(!outcome.passed);
        println!(
            "criterion {:>2} {:<44} {}  {}",
            i + 1,
            name,
            if outcome.passed { "PASS" } else { "FAIL" },
            outcome.detail
        );
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
