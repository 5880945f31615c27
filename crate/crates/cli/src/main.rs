//! `region-stabilize`: simulate statistics, evaluate bounds, run the checks.
//!
//! Exit codes: 0 success, 1 failed verification, 2 invalid configuration,
//! 3 input/output failure.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{Command, Flags, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "region-stabilize", version, about = "Normal approximation of region-stabilizing statistics")]
struct Cli {
    /// Flat key=value file; flags given on the command line take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Option<Sub>,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Simulate replicates and write the samples CSV and a summary.
    Simulate(Flags),
    /// Evaluate the bound ingredients and write a report.
    Bound(Flags),
    /// Run the property suites, TAP output.
    Verify(Flags),
    /// Bound reports over a grid of intensities, one JSON line per point.
    Sweep(Flags),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, flags) = match cli.command {
        Some(Sub::Simulate(f)) => (Some(Command::Simulate), f),
        Some(Sub::Bound(f)) => (Some(Command::Bound), f),
        Some(Sub::Verify(f)) => (Some(Command::Verify), f),
        Some(Sub::Sweep(f)) => (Some(Command::Sweep), f),
        None => (None, Flags::default()),
    };
    let file = match &cli.config {
        None => Default::default(),
        Some(path) => match std::fs::read_to_string(path) {
            Ok(text) => match config::parse_file(&text) {
                Ok(map) => map,
                Err(e) => return fail(2, &format!("{}: {e}", path.display())),
            },
            Err(e) => return fail(3, &format!("{}: {e}", path.display())),
        },
    };
    let cfg = match RunConfig::resolve(command, flags, file) {
        Ok(c) => c,
        Err(e) => return fail(2, &e),
    };
    if let Err(e) = run::init_threads() {
        return fail(2, &e);
    }
    match run::dispatch(&cfg) {
        Ok(code) => ExitCode::from(code),
        Err(run::Failure::Config(e)) => fail(2, &e),
        Err(run::Failure::Io(e)) => fail(3, &e),
    }
}

fn fail(code: u8, msg: &str) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(code)
}
