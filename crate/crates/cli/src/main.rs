use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use qds_cli::{execute, CliError, Command, Preset, RunConfig};

/// Coherent-state quantum digital signatures: analysis and simulation.
#[derive(Debug, Parser)]
#[command(name = "qds", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON run configuration; defaults are used when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed, overriding the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory, overriding the configuration.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Simulation scenario, overriding the configured strategies.
    #[arg(long, global = true, value_enum)]
    preset: Option<Preset>,
}

fn run(cli: Cli) -> Result<String, CliError> {
    let config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let config = config.with_overrides(cli.seed, cli.out, cli.preset);
    execute(cli.command, &config)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("qds: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
