//! `wiener-meter`: estimates, checks and bound sweeps from a JSON config.
//!
//! Exit codes: 0 success / all checks pass, 1 a check failed, 2 usage or
//! configuration error.

mod config;
mod run;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::Value;
use wiener_meter::report::Document;
use wiener_meter::MonteCarlo;

#[derive(Parser)]
#[command(name = "wiener-meter", version, about = "Dyadic Monte Carlo for Wiener-measure set probabilities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate a path-set probability at one or more levels.
    Estimate(Options),
    /// Run a named check and report pass/fail.
    Verify(Options),
    /// Tabulate bounds or estimates over a parameter grid.
    Sweep(Options),
}

#[derive(Args)]
struct Options {
    /// JSON config file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (results do not depend on it).
    #[arg(long)]
    workers: Option<usize>,
    /// Write only this format (default: both where available).
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

/// What a command produced.
pub struct Outcome {
    pub passed: bool,
    pub results: Value,
    pub csv: Option<String>,
}

fn write(dir: &Path, name: &str, text: &str) -> Result<(), String> {
    let path = dir.join(name);
    fs::write(&path, text).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

fn execute(name: &str, opts: &Options) -> Result<bool, String> {
    let text = fs::read_to_string(&opts.config)
        .map_err(|e| format!("cannot read {}: {e}", opts.config.display()))?;
    let mut config: Value = serde_json::from_str(&text).map_err(|e| format!("config is not valid JSON: {e}"))?;
    if let (Some(seed), Some(map)) = (opts.seed, config.as_object_mut()) {
        map.insert("seed".into(), seed.into());
    }
    let mc = opts.workers.map_or_else(MonteCarlo::new, MonteCarlo::with_workers);
    let outcome = match name {
        "estimate" => run::estimate(&mc, &config)?,
        "verify" => run::verify(&mc, &config)?,
        _ => run::sweep(&mc, &config)?,
    };
    fs::create_dir_all(&opts.out).map_err(|e| format!("cannot create {}: {e}", opts.out.display()))?;
    if opts.format != Some(Format::Csv) {
        let doc = Document::new(name, config, outcome.passed, outcome.results);
        write(&opts.out, &format!("{name}.json"), &doc.to_json())?;
    }
    if let (Some(csv), true) = (&outcome.csv, opts.format != Some(Format::Json)) {
        write(&opts.out, &format!("{name}.csv"), csv)?;
    }
    Ok(outcome.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, opts) = match &cli.command {
        Command::Estimate(o) => ("estimate", o),
        Command::Verify(o) => ("verify", o),
        Command::Sweep(o) => ("sweep", o),
    };
    match execute(name, opts) {
        Ok(true) => {
            println!("{name}: pass");
            ExitCode::SUCCESS
        }
        Ok(false) => {
            println!("{name}: FAIL");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
