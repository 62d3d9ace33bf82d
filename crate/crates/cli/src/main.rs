//! `preempt`: completion-time moments for preempt-repeat jobs.
//!
//! Exit codes: 0 ok, 1 validation mismatch, 2 input error, 3 degenerate
//! model, 4 numerical failure.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "preempt",
    version,
    about = "Completion-time moments of preempt-repeat jobs under machine breakdowns"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate q, the conditional moments and E[R], E[R^2], Var[R].
    Analyze {
        file: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Estimate E[R] and E[R^2] by Monte Carlo.
    Simulate {
        file: PathBuf,
        #[arg(long)]
        json: bool,
        #[arg(long)]
        n: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Compare the analytic moments with a Monte Carlo run.
    Validate {
        file: PathBuf,
        #[arg(long)]
        n: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Multiplies the analytic E[R^2] before comparing (harness check).
        #[arg(long, hide = true)]
        perturb_second_moment: Option<f64>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Analyze { file, json } => commands::analyze(&file, json),
        Command::Simulate {
            file,
            json,
            n,
            seed,
        } => commands::simulate(&file, json, n, seed),
        Command::Validate {
            file,
            n,
            seed,
            perturb_second_moment,
        } => commands::validate(&file, n, seed, perturb_second_moment.unwrap_or(1.0)),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}
