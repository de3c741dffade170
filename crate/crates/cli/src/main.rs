//! `mpf`: run filter experiments, dump distance-field slices, and validate
//! scenario files.

mod run;
mod slice;
mod validate;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "mpf", version, about = "Contact-based configuration estimation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run seeded trials of one or more estimators and write CSV reports.
    Run(run::RunArgs),
    /// Write one slice of the scenario's signed distance field as CSV.
    SdfSlice {
        #[arg(long)]
        scenario: PathBuf,
        /// Axis perpendicular to the slice: x, y, z or 0, 1, 2.
        #[arg(long, value_parser = slice::parse_axis)]
        axis: usize,
        #[arg(long)]
        index: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check a scenario file and print its resolved parameters.
    Validate {
        #[arg(long)]
        scenario: PathBuf,
    },
}

/// Failure classes map to exit codes: bad input is 2, I/O is 1.
pub enum Failure {
    Input(String),
    Io(String),
}

impl From<mpf::scenario::ScenarioError> for Failure {
    fn from(e: mpf::scenario::ScenarioError) -> Self {
        match e {
            mpf::scenario::ScenarioError::Io { .. } => Failure::Io(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run::run(&args),
        Command::SdfSlice { scenario, axis, index, out } => slice::run(&scenario, axis, index, &out),
        Command::Validate { scenario } => validate::run(&scenario),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
