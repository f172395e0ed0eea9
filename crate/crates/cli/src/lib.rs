//! Configuration and subcommands behind the `qds` binary.
//!
//! Every command is a pure function of the configuration (including its
//! seed) and writes deterministic CSV/JSON files into `output_dir`.

pub mod analyze;
pub mod config;
pub mod cost_matrix;
pub mod entropy;
pub mod error;
mod output;
pub mod simulate;

use clap::Subcommand;

pub use config::{Preset, RunConfig};
pub use error::{CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Entropy of one signature element over mean photon number and N.
    Entropy,
    /// Forging costs, gap, thresholds and security bounds for a cost matrix.
    Analyze,
    /// Monte Carlo runs of signature distribution and verification.
    Simulate,
    /// Predicted (and optionally sampled) cost matrix of the channel model.
    CostMatrix,
}

/// Runs `command` and returns a one-line summary.
pub fn execute(command: Command, config: &RunConfig) -> CliResult<String> {
    config.validate()?;
    Ok(match command {
        Command::Entropy => {
            let rows = entropy::run(config)?;
            format!("{} rows written to {}", rows.len(), config.output_dir.join("entropy.csv").display())
        }
        Command::Analyze => analyze::summary_line(&analyze::run(config)?),
        Command::Simulate => simulate::summary_line(&simulate::run(config)?),
        Command::CostMatrix => cost_matrix::summary_line(&cost_matrix::run(config)?),
    })
}
