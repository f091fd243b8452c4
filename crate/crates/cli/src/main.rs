//! `ruelle-bf`: orbit tables, zeta grids, identity checks, diagram listings
//! and partition functions from a single JSON config.
//!
//! Exit codes: 0 success, 1 config error, 2 invalid model, 3 numerical
//! non-convergence.

mod commands;
mod config;
mod emit;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{Format, RunConfig};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Model(String),
    NonConvergent(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 1,
            CliError::Model(_) => 2,
            CliError::NonConvergent(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Model(m) | CliError::NonConvergent(m) | CliError::Io(m) => m,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "ruelle-bf", version, about = "Twisted Ruelle zeta functions from orbits and from BF diagrams")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file (default: config `output.path`, else stdout).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Worker threads for grid evaluation.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Prime orbit table with sieve digest.
    Orbits,
    /// Per-degree and assembled log ζ on a λ grid.
    Zeta,
    /// Series, determinant, partition and orbit routes on an ħ grid.
    Bridge,
    /// Connected bivalent diagrams with symmetry factors and weights.
    Diagrams,
    /// Gauge-fixed and direct partition functions on an ħ grid.
    Partition,
}

fn run(cli: &Cli) -> Result<Option<CliError>, CliError> {
    let path = cli.config.as_ref().ok_or_else(|| CliError::Config("--config <path> is required".into()))?;
    let cfg = RunConfig::load(path)?;
    let format = cli
        .format
        .or(cfg.output.as_ref().and_then(|o| o.format))
        .unwrap_or(if matches!(cli.command, Command::Bridge) { Format::Json } else { Format::Csv });
    let out = cli.out.clone().or(cfg.output.as_ref().and_then(|o| o.path.clone()));

    let job = || match cli.command {
        Command::Orbits => commands::orbits(&cfg),
        Command::Zeta => commands::zeta(&cfg),
        Command::Bridge => commands::bridge(&cfg),
        Command::Diagrams => commands::diagrams(&cfg),
        Command::Partition => commands::partition(&cfg),
    };
    let (table, status) = match cli.threads {
        Some(0) => return Err(CliError::Config("--threads must be positive".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Io(e.to_string()))?
            .install(job)?,
        None => job()?,
    };

    let mut buf = Vec::new();
    table.write(format, &mut buf)?;
    match out {
        Some(p) => std::fs::write(&p, &buf).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?,
        None => std::io::stdout().write_all(&buf).map_err(|e| CliError::Io(e.to_string()))?,
    }
    Ok(status)
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
    match run(&cli) {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(e)) | Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
