//! `simulate`: seeded Monte Carlo runs of the protocol.

use qds_core::bounds::thresholds;
use qds_core::channel::{dishonest_alice_null_rate, predicted_cost_matrix, NullRateComparison};
use qds_core::coherent::gram_spectrum;
use qds_core::measurement::{expected_cost, square_root_povm};
use qds_core::sim::{
    run_experiment, run_trial_with_transcript, AliceStrategy, ExperimentSummary, FrequencyEstimate,
    ProtocolConfig, TrialOutcome,
};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::CliResult;
use crate::output::{write_csv_rows, write_json, write_with};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdSource {
    Configured,
    /// `s_a = p + g/3`, `s_v = p + 2g/3` from the channel's predicted matrix.
    Predicted,
}

/// An empirical frequency next to the analytic bound it should respect.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub empirical: FrequencyEstimate,
    pub bound: f64,
    pub respected: bool,
}

impl BoundCheck {
    fn new(empirical: FrequencyEstimate, bound: f64) -> Self {
        Self {
            empirical,
            bound,
            respected: empirical.frequency <= bound,
        }
    }
}

/// Charlie's multiport null-port rate relative to the predicted honest floor.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NullFactor {
    pub empirical_factor: Option<f64>,
    pub predicted: NullRateComparison,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub protocol: ProtocolConfig,
    pub threshold_source: ThresholdSource,
    pub summary: ExperimentSummary,
    /// Only meaningful for the scenario being simulated; the others are
    /// `None`.
    pub forging: Option<BoundCheck>,
    pub repudiation: Option<BoundCheck>,
    pub robustness: Option<BoundCheck>,
    pub null_factor: Option<NullFactor>,
}

/// Builds the protocol configuration, deriving thresholds when they are not
/// configured.
pub fn protocol_config(config: &RunConfig) -> CliResult<(ProtocolConfig, ThresholdSource)> {
    let sim = &config.simulation;
    let alphabet = config.alphabet.build()?;
    let (s_a, s_v, source) = match (sim.s_a, sim.s_v) {
        (Some(a), Some(v)) => (a, v, ThresholdSource::Configured),
        _ => {
            let matrix = predicted_cost_matrix(&alphabet, &config.channel)?;
            let spec = gram_spectrum(&alphabet)?;
            let forger = expected_cost(&square_root_povm(&spec), &matrix, &spec)?;
            let p = matrix.max_diagonal();
            let (a, v) = thresholds(p, forger - p)?;
            (a, v, ThresholdSource::Predicted)
        }
    };
    let mut protocol = ProtocolConfig::new(alphabet, config.channel.clone(), s_a, s_v);
    protocol.signature_length = sim.signature_length;
    protocol.trials = sim.trials;
    protocol.rejection_threshold = sim.rejection_threshold;
    protocol.alice = sim.alice;
    protocol.bob = sim.bob;
    protocol.master_seed = config.master_seed;
    protocol.execution = sim.execution;
    protocol.repudiation_base = sim.repudiation_base;
    protocol.validate()?;
    Ok((protocol, source))
}

pub fn simulate(config: &RunConfig) -> CliResult<(SimulationReport, Vec<TrialOutcome>)> {
    let (protocol, threshold_source) = protocol_config(config)?;
    let experiment = run_experiment(&protocol)?;
    let s = &experiment.summary;
    let a = &s.analytic;
    let forger = protocol.bob.is_forger();
    let honest = !forger && protocol.alice.is_honest();
    let null_factor = match protocol.alice {
        AliceStrategy::PhaseTamper { delta_phi, fraction } => Some(NullFactor {
            empirical_factor: (a.predicted_null_floor_charlie > 0.0)
                .then(|| s.charlie_null_rate.frequency / a.predicted_null_floor_charlie),
            predicted: dishonest_alice_null_rate(
                &protocol.channel,
                protocol.alphabet.mean_photons(),
                delta_phi,
                fraction,
            )?,
        }),
        _ => None,
    };
    let report = SimulationReport {
        forging: forger.then(|| BoundCheck::new(s.forgeries, a.eps_forging)),
        repudiation: honest.then(|| BoundCheck::new(s.repudiations, a.eps_repudiation)),
        robustness: honest.then(|| BoundCheck::new(s.robustness_failures, a.eps_robustness)),
        null_factor,
        protocol,
        threshold_source,
        summary: experiment.summary.clone(),
    };
    Ok((report, experiment.outcomes))
}

/// Writes `simulation.json`, `trials.csv` and, when requested,
/// `transcript_trial0.csv`.
pub fn run(config: &RunConfig) -> CliResult<SimulationReport> {
    let (report, outcomes) = simulate(config)?;
    let dir = &config.output_dir;
    write_json(&dir.join("simulation.json"), &report)?;
    write_csv_rows(
        &dir.join("trials.csv"),
        &TrialOutcome::CSV_HEADER,
        outcomes.iter().map(|o| o.csv_row()),
    )?;
    if config.simulation.transcript {
        let (_, transcript) = run_trial_with_transcript(&report.protocol, 0)?;
        write_with(&dir.join("transcript_trial0.csv"), |w| transcript.write_csv(w))?;
    }
    Ok(report)
}

pub fn summary_line(r: &SimulationReport) -> String {
    let s = &r.summary;
    let mut line = format!(
        "trials = {}, L = {}, forgeries = {}, repudiations = {}, robustness failures = {}, aborts = {}",
        s.trials,
        s.signature_length,
        s.forgeries.count,
        s.repudiations.count,
        s.robustness_failures.count,
        s.multiport_aborts.count
    );
    if let Some(f) = &r.null_factor {
        let shown = |v: Option<f64>| v.map_or("n/a".to_string(), |x| format!("{x:.3}"));
        line.push_str(&format!(
            ", null-port factor = {} (predicted {})",
            shown(f.empirical_factor),
            shown(f.predicted.factor_over_honest)
        ));
    }
    line
}

