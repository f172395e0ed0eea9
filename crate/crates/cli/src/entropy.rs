//! `entropy`: von Neumann entropy of one signature element against mean
//! photon number and alphabet size.

use qds_core::coherent::{signature_element_density, von_neumann_entropy, PhaseAlphabet};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::CliResult;
use crate::output::write_csv_rows;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyRow {
    pub n_phases: usize,
    pub mean_photons: f64,
    pub entropy_bits: f64,
    /// Entropy of all receivers' copies, `T·S`.
    pub total_entropy_bits: f64,
    pub log2_n: f64,
}

impl EntropyRow {
    pub const CSV_HEADER: [&'static str; 5] =
        ["n_phases", "mean_photons", "entropy_bits", "total_entropy_bits", "log2_n"];

    pub fn csv_row(&self) -> Vec<String> {
        vec![
            self.n_phases.to_string(),
            format!("{:e}", self.mean_photons),
            format!("{:e}", self.entropy_bits),
            format!("{:e}", self.total_entropy_bits),
            format!("{:e}", self.log2_n),
        ]
    }
}

pub fn entropy_table(config: &RunConfig) -> CliResult<Vec<EntropyRow>> {
    let e = &config.entropy;
    let grid = e.grid();
    let mut rows = Vec::with_capacity(e.n_phases.len() * grid.len());
    for &n in &e.n_phases {
        for &mu in &grid {
            let s = von_neumann_entropy(&signature_element_density(&PhaseAlphabet::from_mean_photons(n, mu)?)?);
            rows.push(EntropyRow {
                n_phases: n,
                mean_photons: mu,
                entropy_bits: s,
                total_entropy_bits: e.receivers as f64 * s,
                log2_n: (n as f64).log2(),
            });
        }
    }
    Ok(rows)
}

/// Writes `entropy.csv`.
pub fn run(config: &RunConfig) -> CliResult<Vec<EntropyRow>> {
    let rows = entropy_table(config)?;
    write_csv_rows(
        &config.output_dir.join("entropy.csv"),
        &EntropyRow::CSV_HEADER,
        rows.iter().map(|r| r.csv_row()),
    )?;
    Ok(rows)
}
