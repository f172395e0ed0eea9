//! `cost-matrix`: the channel model's predicted cost matrix, optionally with
//! a Monte Carlo estimate.

use qds_core::channel::{calibrate_to_diagonal, ideal_cost_matrix, predicted_cost_matrix, Receiver};
use qds_core::sim::{stream_rng, verification_clicks, Stage};
use qds_core::{ChannelModel, CostMatrix};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::CliResult;
use crate::output::{write_json, write_with};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloEstimate {
    pub pulses_per_entry: u64,
    pub matrix: CostMatrix,
    /// Largest `|estimate − prediction| / σ` over all entries.
    pub max_abs_z: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostMatrixReport {
    pub ideal: bool,
    /// Channel actually used, with any fitted calibration.
    pub channel: ChannelModel,
    pub predicted: CostMatrix,
    pub diagonal: f64,
    pub max_off_diagonal: f64,
    pub estimate: Option<MonteCarloEstimate>,
}

/// Clicks over emitted pulses for each `(φ, θ)`, every entry on its own
/// random stream.
pub fn estimate(config: &RunConfig, channel: &ChannelModel, predicted: &CostMatrix) -> CliResult<MonteCarloEstimate> {
    let alphabet = config.alphabet.build()?;
    let n = alphabet.n_phases();
    let pulses = config.cost_matrix.monte_carlo_pulses;
    let counts = config
        .simulation
        .execution
        .map_indices(n * n, |idx| -> CliResult<u64> {
            let (phi, theta) = (idx / n, idx % n);
            let stored = vec![alphabet.state(theta); pulses as usize];
            let declared = vec![phi; pulses as usize];
            let mut rng = stream_rng(config.master_seed, idx as u64, Stage::CharlieVerification);
            let clicks = verification_clicks(&stored, &declared, &alphabet, channel, Receiver::Charlie, &mut rng)?;
            Ok(clicks.iter().filter(|&&c| c).count() as u64)
        })
        .into_iter()
        .collect::<CliResult<Vec<u64>>>()?;
    let matrix = CostMatrix::from_fn(n, |phi, theta| counts[phi * n + theta] as f64 / pulses as f64)?;
    let max_abs_z = (0..n * n)
        .map(|idx| {
            let p = predicted.get(idx / n, idx % n);
            let sigma = (p * (1.0 - p) / pulses as f64).sqrt();
            let diff = matrix.get(idx / n, idx % n) - p;
            if sigma > 0.0 {
                (diff / sigma).abs()
            } else if diff == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        })
        .fold(0.0, f64::max);
    Ok(MonteCarloEstimate {
        pulses_per_entry: pulses,
        matrix,
        max_abs_z,
    })
}

pub fn cost_matrix(config: &RunConfig) -> CliResult<CostMatrixReport> {
    let alphabet = config.alphabet.build()?;
    let cm = &config.cost_matrix;
    let (channel, predicted) = if cm.ideal {
        (ChannelModel::ideal(), ideal_cost_matrix(&alphabet)?)
    } else {
        let channel = match cm.calibrate_diagonal {
            Some(target) => calibrate_to_diagonal(&alphabet, &config.channel, target)?,
            None => config.channel.clone(),
        };
        let predicted = predicted_cost_matrix(&alphabet, &channel)?;
        (channel, predicted)
    };
    let estimate = if cm.monte_carlo_pulses > 0 {
        Some(estimate(config, &channel, &predicted)?)
    } else {
        None
    };
    Ok(CostMatrixReport {
        ideal: cm.ideal,
        diagonal: predicted.max_diagonal(),
        max_off_diagonal: predicted.max_off_diagonal(),
        channel,
        predicted,
        estimate,
    })
}

/// Writes `cost_matrix.csv`, `cost_matrix.json` and, with an estimate,
/// `cost_matrix_estimated.csv`.
pub fn run(config: &RunConfig) -> CliResult<CostMatrixReport> {
    let report = cost_matrix(config)?;
    let dir = &config.output_dir;
    write_with(&dir.join("cost_matrix.csv"), |w| report.predicted.write_csv(w))?;
    if let Some(e) = &report.estimate {
        write_with(&dir.join("cost_matrix_estimated.csv"), |w| e.matrix.write_csv(w))?;
    }
    write_json(&dir.join("cost_matrix.json"), &report)?;
    Ok(report)
}

pub fn summary_line(r: &CostMatrixReport) -> String {
    let mut line = format!(
        "diagonal = {:.4e}, max off-diagonal = {:.4e}, calibration = {:.4}",
        r.diagonal, r.max_off_diagonal, r.channel.calibration
    );
    if let Some(e) = &r.estimate {
        line.push_str(&format!(", Monte Carlo max |z| = {:.2}", e.max_abs_z));
    }
    line
}
