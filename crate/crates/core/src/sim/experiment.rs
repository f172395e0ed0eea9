//! Repeated independent protocol trials and their summary statistics.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::bounds::{forging_bound, multiport_robustness_bound, repudiation_bound, robustness_bound};
use crate::channel::{predicted_cost_matrix, Receiver};
use crate::coherent::gram_spectrum;
use crate::error::Result;
use crate::measurement::{expected_cost, square_root_povm};
use crate::sim::protocol::{
    accepts, generate_private_key, run_distribution, verification_clicks, GuessSampler, Transcript,
    ProtocolConfig,
};
use crate::sim::rng::{stream_rng, Stage};
use crate::sim::strategy::BobStrategy;

/// Two-sided 95% normal quantile used for Wilson intervals.
pub const WILSON_Z: f64 = 1.959_963_984_540_054;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencyEstimate {
    pub count: u64,
    pub total: u64,
    pub frequency: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl FrequencyEstimate {
    pub fn new(count: u64, total: u64) -> Self {
        let (ci_low, ci_high) = wilson_interval(count, total, WILSON_Z);
        Self {
            count,
            total,
            frequency: if total == 0 { 0.0 } else { count as f64 / total as f64 },
            ci_low,
            ci_high,
        }
    }

    /// Binomial standard error of the frequency.
    pub fn std_error(&self) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        (self.frequency * (1.0 - self.frequency) / self.total as f64).sqrt()
    }
}

/// Wilson score interval for `successes` out of `n`.
pub fn wilson_interval(successes: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n_f = n as f64;
    let p = successes as f64 / n_f;
    let z2 = z * z;
    let denom = 1.0 + z2 / n_f;
    let centre = (p + z2 / (2.0 * n_f)) / denom;
    let half = z * (p * (1.0 - p) / n_f + z2 / (4.0 * n_f * n_f)).sqrt() / denom;
    let lo = if successes == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if successes == n { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub trial: u64,
    pub bob_null_clicks: u64,
    pub charlie_null_clicks: u64,
    pub bob_aborted: bool,
    pub charlie_aborted: bool,
    /// Bob's verification clicks against Alice's key; zero when Bob forges.
    pub bob_signal_clicks: u64,
    /// Charlie's verification clicks against the declarations he receives.
    pub charlie_signal_clicks: u64,
    /// Pulses where only Bob's (only Charlie's) verification detector clicked.
    pub only_bob: u64,
    pub only_charlie: u64,
    pub bob_accepts: bool,
    pub charlie_accepts: bool,
    /// Honest run: Bob accepts Alice's message and Charlie rejects it.
    pub repudiation: bool,
    /// Forging run: Charlie accepts the forger's declarations.
    pub forged: bool,
}

impl TrialOutcome {
    pub const CSV_HEADER: [&'static str; 13] = [
        "trial",
        "bob_null_clicks",
        "charlie_null_clicks",
        "bob_aborted",
        "charlie_aborted",
        "bob_signal_clicks",
        "charlie_signal_clicks",
        "only_bob",
        "only_charlie",
        "bob_accepts",
        "charlie_accepts",
        "repudiation",
        "forged",
    ];

    pub fn csv_row(&self) -> Vec<String> {
        let b = |v: bool| u8::from(v).to_string();
        vec![
            self.trial.to_string(),
            self.bob_null_clicks.to_string(),
            self.charlie_null_clicks.to_string(),
            b(self.bob_aborted),
            b(self.charlie_aborted),
            self.bob_signal_clicks.to_string(),
            self.charlie_signal_clicks.to_string(),
            self.only_bob.to_string(),
            self.only_charlie.to_string(),
            b(self.bob_accepts),
            b(self.charlie_accepts),
            b(self.repudiation),
            b(self.forged),
        ]
    }
}

/// Runs trial `trial` of `config` with its own random streams.
pub fn run_trial(config: &ProtocolConfig, trial: u64) -> Result<TrialOutcome> {
    run_trial_with_transcript(config, trial).map(|(outcome, _)| outcome)
}

/// [`run_trial`] that also returns the per-pulse record, with declarations
/// and verification clicks filled in.
pub fn run_trial_with_transcript(config: &ProtocolConfig, trial: u64) -> Result<(TrialOutcome, Transcript)> {
    let seed = config.master_seed;
    let alphabet = &config.alphabet;
    let length = config.signature_length;
    let key = generate_private_key(&mut stream_rng(seed, trial, Stage::PrivateKey), alphabet, length);
    let mut forger_rng = stream_rng(seed, trial, Stage::Forger);
    let mut transcript = run_distribution(
        config,
        &key,
        &mut stream_rng(seed, trial, Stage::BobNullPort),
        &mut stream_rng(seed, trial, Stage::CharlieNullPort),
        &mut forger_rng,
    )?;

    let charlie_declared: Vec<usize> = match config.bob {
        BobStrategy::Honest => key.clone(),
        BobStrategy::PassiveForger => {
            let sampler = GuessSampler::square_root(alphabet, 1.0)?;
            key.iter().map(|&t| sampler.sample(t, &mut forger_rng)).collect()
        }
        BobStrategy::ActiveForger { .. } => transcript
            .pulses
            .iter()
            .map(|p| p.forger_guess.unwrap_or(p.key_index))
            .collect(),
    };
    let charlie_clicks = verification_clicks(
        &transcript.stored(Receiver::Charlie),
        &charlie_declared,
        alphabet,
        &config.channel,
        Receiver::Charlie,
        &mut stream_rng(seed, trial, Stage::CharlieVerification),
    )?;
    let bob_clicks = if config.bob.is_forger() {
        vec![false; length]
    } else {
        verification_clicks(
            &transcript.stored(Receiver::Bob),
            &key,
            alphabet,
            &config.channel,
            Receiver::Bob,
            &mut stream_rng(seed, trial, Stage::BobVerification),
        )?
    };

    let count = |v: &[bool]| v.iter().filter(|&&c| c).count() as u64;
    let bob_signal_clicks = count(&bob_clicks);
    let charlie_signal_clicks = count(&charlie_clicks);
    let only_bob = bob_clicks.iter().zip(&charlie_clicks).filter(|(b, c)| **b && !**c).count() as u64;
    let only_charlie = bob_clicks.iter().zip(&charlie_clicks).filter(|(b, c)| !**b && **c).count() as u64;
    let bob_accepts = !config.bob.is_forger() && accepts(bob_signal_clicks as usize, config.s_a, length);
    let charlie_accepts = accepts(charlie_signal_clicks as usize, config.s_v, length);
    let aborted = transcript.bob_aborted || transcript.charlie_aborted;
    let outcome = TrialOutcome {
        trial,
        bob_null_clicks: transcript.bob_null_clicks as u64,
        charlie_null_clicks: transcript.charlie_null_clicks as u64,
        bob_aborted: transcript.bob_aborted,
        charlie_aborted: transcript.charlie_aborted,
        bob_signal_clicks,
        charlie_signal_clicks,
        only_bob,
        only_charlie,
        bob_accepts,
        charlie_accepts,
        repudiation: !config.bob.is_forger() && !aborted && bob_accepts && !charlie_accepts,
        forged: config.bob.is_forger() && !transcript.charlie_aborted && charlie_accepts,
    };
    transcript.declared = charlie_declared;
    transcript.bob_signal_clicks = bob_clicks;
    transcript.charlie_signal_clicks = charlie_clicks;
    Ok((outcome, transcript))
}

/// Analytic values the empirical frequencies are compared with.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalyticComparison {
    /// `3 (s_v − s_a)`, the gap the thresholds were built from.
    pub implied_gap: f64,
    pub eps_forging: f64,
    pub eps_robustness: f64,
    pub eps_repudiation: f64,
    pub eps_robustness_multiport: f64,
    /// Verification click probability for a matching declaration.
    pub predicted_diagonal: f64,
    /// Square-root-measurement forging cost against the modelled matrix.
    pub predicted_forger_cost: f64,
    pub predicted_null_floor_bob: f64,
    pub predicted_null_floor_charlie: f64,
    pub applied_rejection_bob: f64,
    pub applied_rejection_charlie: f64,
}

impl AnalyticComparison {
    pub fn for_config(config: &ProtocolConfig) -> Result<Self> {
        let l = config.signature_length as f64;
        let gap = 3.0 * (config.s_v - config.s_a);
        let matrix = predicted_cost_matrix(&config.alphabet, &config.channel)?;
        let spec = gram_spectrum(&config.alphabet)?;
        let povm = square_root_povm(&spec);
        let multiport = if config.rejection_threshold > 0.0 {
            multiport_robustness_bound(config.rejection_threshold, l)?.reported()
        } else {
            1.0
        };
        Ok(Self {
            implied_gap: gap,
            eps_forging: forging_bound(gap, l)?.reported(),
            eps_robustness: robustness_bound(gap, l)?.reported(),
            eps_repudiation: repudiation_bound(config.repudiation_base, config.s_v - config.s_a, l)?
                .reported(),
            eps_robustness_multiport: multiport,
            predicted_diagonal: matrix.get(0, 0),
            predicted_forger_cost: expected_cost(&povm, &matrix, &spec)?,
            predicted_null_floor_bob: config.honest_null_floor(Receiver::Bob),
            predicted_null_floor_charlie: config.honest_null_floor(Receiver::Charlie),
            applied_rejection_bob: config.applied_rejection_threshold(Receiver::Bob),
            applied_rejection_charlie: config.applied_rejection_threshold(Receiver::Charlie),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub trials: u64,
    pub signature_length: u64,
    pub master_seed: u64,
    /// Bob rejects an honest message at `s_a`.
    pub robustness_failures: FrequencyEstimate,
    pub repudiations: FrequencyEstimate,
    pub forgeries: FrequencyEstimate,
    pub multiport_aborts: FrequencyEstimate,
    /// Per-pulse rates pooled over all trials.
    pub bob_null_rate: FrequencyEstimate,
    pub charlie_null_rate: FrequencyEstimate,
    pub bob_signal_rate: FrequencyEstimate,
    pub charlie_signal_rate: FrequencyEstimate,
    pub only_bob_rate: FrequencyEstimate,
    pub only_charlie_rate: FrequencyEstimate,
    pub analytic: AnalyticComparison,
}

impl ExperimentSummary {
    /// `P(only Bob) − P(only Charlie)` in units of its standard error.
    pub fn asymmetry_sigma(&self) -> f64 {
        let d = self.only_bob_rate.count as f64 - self.only_charlie_rate.count as f64;
        let var = (self.only_bob_rate.count + self.only_charlie_rate.count) as f64;
        if var == 0.0 {
            0.0
        } else {
            d / var.sqrt()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Experiment {
    pub summary: ExperimentSummary,
    pub outcomes: Vec<TrialOutcome>,
}

impl Experiment {
    pub fn write_trials_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(TrialOutcome::CSV_HEADER)?;
        for o in &self.outcomes {
            wtr.write_record(o.csv_row())?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Runs `config.trials` independent trials and aggregates them.
pub fn run_experiment(config: &ProtocolConfig) -> Result<Experiment> {
    config.validate()?;
    let analytic = AnalyticComparison::for_config(config)?;
    let outcomes = config
        .execution
        .map_indices(config.trials, |t| run_trial(config, t as u64))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(Experiment {
        summary: summarise(config, &outcomes, analytic),
        outcomes,
    })
}

fn summarise(config: &ProtocolConfig, outcomes: &[TrialOutcome], analytic: AnalyticComparison) -> ExperimentSummary {
    let m = outcomes.len() as u64;
    let pulses = m * config.signature_length as u64;
    let sum = |f: fn(&TrialOutcome) -> u64| outcomes.iter().map(f).sum::<u64>();
    let tally = |f: fn(&TrialOutcome) -> bool| outcomes.iter().filter(|o| f(o)).count() as u64;
    let honest_bob = !config.bob.is_forger();
    let forging_trials = if honest_bob { 0 } else { m };
    ExperimentSummary {
        trials: m,
        signature_length: config.signature_length as u64,
        master_seed: config.master_seed,
        robustness_failures: FrequencyEstimate::new(
            if honest_bob { tally(|o| !o.bob_accepts) } else { 0 },
            if honest_bob { m } else { 0 },
        ),
        repudiations: FrequencyEstimate::new(tally(|o| o.repudiation), if honest_bob { m } else { 0 }),
        forgeries: FrequencyEstimate::new(tally(|o| o.forged), forging_trials),
        multiport_aborts: FrequencyEstimate::new(tally(|o| o.bob_aborted || o.charlie_aborted), m),
        bob_null_rate: FrequencyEstimate::new(sum(|o| o.bob_null_clicks), pulses),
        charlie_null_rate: FrequencyEstimate::new(sum(|o| o.charlie_null_clicks), pulses),
        bob_signal_rate: FrequencyEstimate::new(sum(|o| o.bob_signal_clicks), if honest_bob { pulses } else { 0 }),
        charlie_signal_rate: FrequencyEstimate::new(sum(|o| o.charlie_signal_clicks), pulses),
        only_bob_rate: FrequencyEstimate::new(sum(|o| o.only_bob), pulses),
        only_charlie_rate: FrequencyEstimate::new(sum(|o| o.only_charlie), pulses),
        analytic,
    }
}
