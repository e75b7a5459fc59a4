//! `qesmms`: verification runs, family solves, m-sweeps and exports.
//!
//! Exit codes: 0 success, 1 input error, 2 a check failed, 3 a solver or
//! quadrature did not converge.

mod commands;
mod config;
mod output;

use clap::{Parser, Subcommand};
use config::RunConfig;
use std::process::ExitCode;

#[derive(Debug)]
pub enum CliError {
    Input(String),
    NonConvergence(String),
}

impl From<qesmms_core::Error> for CliError {
    fn from(e: qesmms_core::Error) -> Self {
        use qesmms_core::Error::*;
        match e {
            NonConvergence(_) | Divergent(_) => CliError::NonConvergence(e.to_string()),
            OutOfDomain { .. } | Degenerate(_) | Invalid(_) | Unsupported(_) => CliError::Input(e.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(name = "qesmms", version, about = "Quasi-Einstein smooth metric measure spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a descriptor for the quasi-Einstein condition and the estimates.
    Verify(RunConfig),
    /// Weighted energy and volume of a descriptor.
    Energy(RunConfig),
    /// Steady cigar family on the plane.
    SolveCigar(RunConfig),
    /// Böhm (finite m) or Bryant (m = +inf) family.
    SolveBryant(RunConfig),
    /// Compact quasi-Einstein metrics on S²-bundles.
    SolveLpp(RunConfig),
    /// Solve a family over a list of m values.
    SweepM(RunConfig),
    /// Dual scale tuple and the equivalence checks.
    Duality(RunConfig),
    /// Curves of a descriptor or a family solve as CSV.
    Export(RunConfig),
}

fn threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("QESMMS_THREADS") else { return Ok(()) };
    let k: usize = v.trim().parse().ok().filter(|&k| k > 0).ok_or_else(|| CliError::Input(format!("QESMMS_THREADS must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new().num_threads(k).build_global().map_err(|e| CliError::Input(e.to_string()))
}

fn run(cli: Cli) -> Result<commands::Failures, CliError> {
    threads()?;
    let (cmd, raw) = match &cli.command {
        Command::Verify(c) => (commands::verify as fn(&RunConfig) -> _, c),
        Command::Energy(c) => (commands::energy_cmd as fn(&RunConfig) -> _, c),
        Command::SolveCigar(c) => (commands::solve_cigar as fn(&RunConfig) -> _, c),
        Command::SolveBryant(c) => (commands::solve_bryant as fn(&RunConfig) -> _, c),
        Command::SolveLpp(c) => (commands::solve_lpp as fn(&RunConfig) -> _, c),
        Command::SweepM(c) => (commands::sweep_m as fn(&RunConfig) -> _, c),
        Command::Duality(c) => (commands::duality as fn(&RunConfig) -> _, c),
        Command::Export(c) => (commands::export as fn(&RunConfig) -> _, c),
    };
    cmd(&raw.resolve()?)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(failed) if failed.is_empty() => ExitCode::SUCCESS,
        Ok(failed) => {
            eprintln!("check failed: {}", failed.join(", "));
            ExitCode::from(2)
        }
        Err(CliError::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::NonConvergence(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
