use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use qpsim::harness::{self, ExperimentConfig};

#[derive(Parser)]
#[command(name = "qpsim", version, about = "Ensemble runs of projective-simulation agents on the invasion game")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one ensemble and write curve.csv, curve.svg and config.resolved.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads (default: all cores). Output does not depend on it.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Run one ensemble per value of a single config key.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<String>,
        /// Each value writes into `<out>/<param>=<value>/`.
        #[arg(long, default_value = "sweep")]
        out: PathBuf,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Parse and validate a config, printing the resolved values.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

fn load(path: &Path) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    harness::parse_config(&text).with_context(|| format!("in {}", path.display()))
}

fn run_one(config: &ExperimentConfig, out: &Path, threads: Option<usize>) -> Result<()> {
    let curves = match threads {
        Some(n) => harness::run_ensemble_with_threads(config, n)?,
        None => harness::run_ensemble(config)?,
    };
    harness::write_outputs(config, &curves, out).with_context(|| format!("writing to {}", out.display()))?;
    let last = curves.agent1.rows.last().expect("trials >= 1");
    print!("{}: final mean efficiency {:.4} (std {:.4})", out.display(), last.mean, last.std);
    if let Some(second) = &curves.agent2 {
        let last2 = second.rows.last().expect("trials >= 1");
        print!(", agent 2 {:.4} (std {:.4})", last2.mean, last2.std);
    }
    println!();
    Ok(())
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { config, out, threads } => run_one(&load(&config)?, &out, threads),
        Command::Sweep { config, param, values, out, threads } => {
            let base = load(&config)?;
            for value in &values {
                let mut c = base.clone();
                c.set(&param, value, 0).with_context(|| format!("sweep value {param} = {value}"))?;
                run_one(&c, &out.join(format!("{param}={value}")), threads)?;
            }
            Ok(())
        }
        Command::Validate { config } => {
            let c = load(&config)?;
            print!("{}", c.to_config_text());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
