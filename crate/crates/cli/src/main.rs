//! Command-line front end: preset regret tables, ad-hoc experiments,
//! analytic constants, and verification suites.

mod config;
mod constants;
mod run;
mod tables;
mod verify;

use clap::{Parser, Subcommand};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "cbt",
    version,
    about = "Infinite-arms bandit simulator: regret tables, analytic constants, verification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate policies and emit one summary row per (policy, horizon) cell
    Run(run::RunArgs),
    /// Print analytic constants, per-horizon targets, and lower-bound levels
    Constants(constants::ConstantsArgs),
    /// Check the implementation against its analytic oracles
    Verify(verify::VerifyArgs),
}

/// What went wrong, which decides the exit code: 1 for failed verification
/// checks, 2 for unusable flags, config, or input. A vanished output pipe
/// is not an error at all.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Checks(usize),
    Pipe,
}

impl From<cbt_core::Error> for Failure {
    fn from(e: cbt_core::Error) -> Self {
        if e.is_broken_pipe() {
            Failure::Pipe
        } else {
            Failure::Usage(e.to_string())
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        if e.kind() == std::io::ErrorKind::BrokenPipe {
            Failure::Pipe
        } else {
            Failure::Usage(e.to_string())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run::command(args),
        Command::Constants(args) => constants::command(args),
        Command::Verify(args) => verify::command(args),
    };
    match result {
        Ok(()) | Err(Failure::Pipe) => ExitCode::SUCCESS,
        Err(Failure::Usage(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
        Err(Failure::Checks(failed)) => {
            eprintln!("{failed} check(s) failed");
            ExitCode::from(1)
        }
    }
}
