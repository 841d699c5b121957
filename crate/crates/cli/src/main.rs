//! `qrem`: reproducible experiments on the quantum random energy model.
//!
//! Exit status: 0 when everything converged, 1 on a compute error, 2 on an
//! invalid config or command line, 3 when some computation did not converge
//! (outputs are still written).

mod config;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;

use config::{locate, Command, ExperimentConfig, ValidationError};

#[derive(Debug, Parser)]
#[command(name = "qrem", version, about = "Quantum random energy model experiments")]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// JSON experiment config; omitted fields take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (default: the config's `out`, else `qrem-<command>`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master seed, overriding the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads, overriding the config; 0 means all cores.
    #[arg(long)]
    threads: Option<usize>,
}

enum Failure {
    Invalid(String),
    Compute(anyhow::Error),
}

fn load(cli: &Cli) -> std::result::Result<ExperimentConfig, Failure> {
    let (mut config, source, origin) = match &cli.config {
        Some(path) => {
            let origin = path.display().to_string();
            let source = std::fs::read_to_string(path)
                .map_err(|e| Failure::Invalid(format!("cannot read {origin}: {e}")))?;
            let config: ExperimentConfig = serde_json::from_str(&source)
                .map_err(|e| Failure::Invalid(format!("invalid configuration:\n  {origin}:{}: {e}", e.line())))?;
            if config.command != cli.command {
                return Err(Failure::Invalid(format!(
                    "invalid configuration:\n  {origin}:{}: command is \"{}\" but \"{}\" was requested",
                    locate(&source, "command", "command"),
                    config.command.name(),
                    cli.command.name()
                )));
            }
            (config, source, origin)
        }
        None => (ExperimentConfig::new(cli.command), String::new(), "<defaults>".to_string()),
    };
    if let Some(seed) = cli.seed {
        config.master_seed = seed;
    }
    if let Some(threads) = cli.threads {
        config.threads = threads;
    }
    if let Some(out) = &cli.out {
        config.out = Some(out.clone());
    }
    let config = config.materialize();
    let issues = config.validate();
    if !issues.is_empty() {
        let lines = issues
            .into_iter()
            .map(|i| (locate(&source, i.section, i.field), i))
            .collect();
        return Err(Failure::Invalid(ValidationError { origin, lines }.to_string()));
    }
    Ok(config)
}

fn execute(cli: &Cli) -> std::result::Result<bool, Failure> {
    let config = load(cli)?;
    if config.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(config.threads)
            .build_global()
            .context("configuring the thread pool")
            .map_err(Failure::Compute)?;
    }
    let out = config
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("qrem-{}", config.command.name())));
    let outcome = run::run(&config, &out).map_err(Failure::Compute)?;
    eprintln!("wrote {}", out.display());
    Ok(outcome.converged)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: some computations did not converge; see summary.json");
            ExitCode::from(3)
        }
        Err(Failure::Invalid(msg)) => {
            eprint!("{msg}");
            if !msg.ends_with('\n') {
                eprintln!();
            }
            ExitCode::from(2)
        }
        Err(Failure::Compute(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
