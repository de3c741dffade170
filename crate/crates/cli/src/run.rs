use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use mpf::scenario::{run_experiment, Estimator, ExperimentReport, Simulation, TrialTrace};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::Failure;

#[derive(Args, Debug)]
pub struct RunArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    /// Comma-separated list of cpf, mpf-uniform, mpf-particle, mpf-ball, oracle.
    #[arg(long, value_delimiter = ',', default_value = "cpf,mpf-uniform,mpf-particle,mpf-ball")]
    pub estimators: Vec<String>,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    /// Trial i uses seed `seed + i`.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// Worker threads; defaults to the available parallelism. Results do not
    /// depend on it.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Write zeros instead of measured wall times so that reruns produce
    /// byte-identical files.
    #[arg(long)]
    pub no_timing: bool,
}

/// Everything needed to reproduce a run.
#[derive(Serialize, Deserialize, Debug, PartialEq)]
pub struct Manifest {
    pub scenario: String,
    pub scenario_name: String,
    /// SHA-256 of the scenario document followed by its script file.
    pub config_sha256: String,
    pub seed: u64,
    pub trials: usize,
    pub estimators: Vec<String>,
    pub workers: usize,
    pub timing: bool,
    pub versions: Versions,
}

#[derive(Serialize, Deserialize, Debug, PartialEq)]
pub struct Versions {
    pub mpf: String,
    pub target: String,
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::Io(format!("cannot write {}: {e}", path.display()))
}

pub fn parse_estimators(names: &[String]) -> Result<Vec<Estimator>, Failure> {
    let mut out: Vec<Estimator> = Vec::new();
    for name in names {
        let e: Estimator = name.parse().map_err(|e: mpf::scenario::UnknownEstimator| Failure::Input(e.to_string()))?;
        if !out.contains(&e) {
            out.push(e);
        }
    }
    if out.is_empty() {
        return Err(Failure::Input("--estimators must name at least one estimator".into()));
    }
    Ok(out)
}

pub fn run(args: &RunArgs) -> Result<(), Failure> {
    let estimators = parse_estimators(&args.estimators)?;
    if args.trials == 0 {
        return Err(Failure::Input("--trials must be at least 1".into()));
    }
    let workers = match args.workers {
        Some(0) => return Err(Failure::Input("--workers must be at least 1".into())),
        Some(w) => w,
        None => std::thread::available_parallelism().map_or(1, usize::from),
    };
    let sim = Simulation::load(&args.scenario)?;
    let report = run_experiment(&sim, &estimators, args.trials, args.seed, workers);

    let traces = args.out.join("traces");
    fs::create_dir_all(&traces).map_err(|e| io_err(&traces, e))?;
    let timing = !args.no_timing;
    write_experiment_csv(&args.out.join("experiment.csv"), &report, timing)?;
    for (i, trial) in report.trials.iter().enumerate() {
        write_trace_csv(&traces.join(format!("trial_{i:04}.csv")), trial, timing)?;
    }
    let table = timing_table(&report, timing);
    let path = args.out.join("timing.txt");
    fs::write(&path, &table).map_err(|e| io_err(&path, e))?;

    let manifest = Manifest {
        scenario: args.scenario.display().to_string(),
        scenario_name: sim.scenario.name.clone(),
        config_sha256: hex::encode(Sha256::digest(&sim.scenario.source)),
        seed: args.seed,
        trials: args.trials,
        estimators: estimators.iter().map(|e| e.name().to_string()).collect(),
        workers,
        timing,
        versions: Versions {
            mpf: env!("CARGO_PKG_VERSION").to_string(),
            target: format!("{}-{}", std::env::consts::ARCH, std::env::consts::OS),
        },
    };
    let path = args.out.join("manifest.json");
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(&path, json + "\n").map_err(|e| io_err(&path, e))?;

    print!("{}", summary(&report));
    print!("{table}");
    Ok(())
}

fn ms(v: f64, timing: bool) -> String {
    if timing {
        format!("{v:.4}")
    } else {
        "0".to_string()
    }
}

fn write_experiment_csv(path: &Path, report: &ExperimentReport, timing: bool) -> Result<(), Failure> {
    let mut w = csv::Writer::from_path(path).map_err(|e| io_err(path, e))?;
    w.write_record([
        "timestep",
        "estimator",
        "mean_wrmse",
        "ci_low",
        "ci_high",
        "contact_fraction",
        "transition_ms",
        "observation_ms",
    ])
    .map_err(|e| io_err(path, e))?;
    for r in &report.rows {
        w.write_record([
            r.timestep.to_string(),
            r.estimator.name().to_string(),
            r.mean_wrmse.to_string(),
            r.ci_low.to_string(),
            r.ci_high.to_string(),
            r.contact_fraction.to_string(),
            ms(r.transition_ms, timing),
            ms(r.observation_ms, timing),
        ])
        .map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

fn write_trace_csv(path: &Path, trial: &TrialTrace, timing: bool) -> Result<(), Failure> {
    let mut w = csv::Writer::from_path(path).map_err(|e| io_err(path, e))?;
    w.write_record([
        "timestep",
        "estimator",
        "wrmse",
        "contact",
        "transition_ms",
        "observation_ms",
        "deprivation",
        "resampled",
        "shortfall",
        "fallback",
    ])
    .map_err(|e| io_err(path, e))?;
    for t in 0..trial.len() {
        for (e, est) in trial.estimators.iter().enumerate() {
            let r = &trial.records[e][t];
            w.write_record([
                (t + 1).to_string(),
                est.name().to_string(),
                r.wrmse.to_string(),
                u8::from(trial.contact[t]).to_string(),
                ms(r.transition_ms, timing),
                ms(r.observation_ms, timing),
                u8::from(r.deprivation).to_string(),
                u8::from(r.resampled).to_string(),
                r.shortfall.to_string(),
                u8::from(r.fallback).to_string(),
            ])
            .map_err(|e| io_err(path, e))?;
        }
    }
    w.flush().map_err(|e| io_err(path, e))
}

/// Per-step wall time over contact steps, one row per estimator:
/// mean ± 1.96·sd for the whole step and for each phase.
pub fn timing_table(report: &ExperimentReport, timing: bool) -> String {
    let mut out = String::new();
    let contact_steps = report.timing.first().map_or(0, |t| t.total.count);
    let _ = writeln!(out, "Per-step wall time in contact ({contact_steps} steps per estimator), ms, mean ± 1.96 sd");
    let _ = writeln!(
        out,
        "{:<14}{:>20}{:>20}{:>20}{:>14}",
        "Estimator", "Total", "Transition", "Observation", "Median total"
    );
    for row in &report.timing {
        let cell = |s: &mpf::stats::Summary| {
            if !timing {
                "-".to_string()
            } else if s.count == 0 {
                "n/a".to_string()
            } else {
                format!("{:.2} ± {:.2}", s.mean, s.spread95)
            }
        };
        let median = if timing && row.total.count > 0 { format!("{:.2}", row.total.median) } else { "-".into() };
        let _ = writeln!(
            out,
            "{:<14}{:>20}{:>20}{:>20}{:>14}",
            row.estimator.label(),
            cell(&row.total),
            cell(&row.transition),
            cell(&row.observation),
            median
        );
    }
    out
}

fn summary(report: &ExperimentReport) -> String {
    let mut out = String::new();
    let steps = report.steps();
    let shaded = report.shaded.iter().filter(|s| **s).count();
    let _ = writeln!(out, "{} trials, {steps} steps, {shaded} steps with contact in some trial", report.trials.len());
    let _ = writeln!(out, "{:<14}{:>18}{:>14}", "Estimator", "final W-RMSE", "deprivations");
    for (e, est) in report.estimators.iter().enumerate() {
        let last = &report.rows[(steps - 1) * report.estimators.len() + e];
        let _ = writeln!(
            out,
            "{:<14}{:>18}{:>14}",
            est.label(),
            format!("{:.4} ± {:.4}", last.mean_wrmse, last.ci_high - last.mean_wrmse),
            report.deprivation_events(*est)
        );
    }
    out
}
