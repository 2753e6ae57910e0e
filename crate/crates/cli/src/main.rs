mod config;
mod output;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{Command, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] robin_core::Error),
    #[error("output error: {0}")]
    Io(String),
}

/// Robin eigenvalues, heat kernels and comparison verdicts on radial model balls.
#[derive(Debug, Parser)]
#[command(name = "robin", version)]
struct Cli {
    #[command(subcommand)]
    command: Option<Cmd>,
    /// TOML file with run settings; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(flatten)]
    run: RunConfig,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// First Robin eigenvalues of one ball.
    Eigen,
    /// Robin heat kernel centred at the origin of one ball.
    Kernel,
    /// Comparison verdicts, from a preset or a warped lhs ball against a space form.
    Compare,
    /// The full acceptance battery.
    Suite,
}

fn resolve(cli: &Cli) -> Result<config::Resolved, CliError> {
    let file = match &cli.config {
        Some(p) => RunConfig::from_toml_file(p)?,
        None => RunConfig::default(),
    };
    let mut flags = cli.run.clone();
    flags.command = cli.command.as_ref().map(|c| match c {
        Cmd::Eigen => Command::Eigen,
        Cmd::Kernel => Command::Kernel,
        Cmd::Compare => Command::Compare,
        Cmd::Suite => Command::Suite,
    });
    file.overlay(&flags).resolve()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match resolve(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match run::run(&cfg) {
        Ok(out) => {
            for f in &out.files {
                println!("wrote {}", f.display());
            }
            if let Some(reason) = out.rejected {
                eprintln!("error: hypothesis rejected: {reason}");
                ExitCode::from(2)
            } else if out.failed {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
