//! One run of the three-party protocol: key generation, distribution through
//! the multiport, forging and verification.

use std::io::Write;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bounds::REPUDIATION_BASE_IDEAL;
use crate::channel::{multiport_mean_photons, ChannelModel, Receiver};
use crate::coherent::{
    beamsplitter_mix, gram_spectrum, multiport_map, ComplexAmplitude, PhaseAlphabet,
    SpectralDecomposition,
};
use crate::error::{invalid, QdsError, Result};
use crate::measurement::{outcome_table, square_root_povm, Povm, AMPLIFICATION_FACTOR};
use crate::parallel::Execution;
use crate::sim::strategy::{AliceStrategy, BobStrategy};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    pub alphabet: PhaseAlphabet,
    pub signature_length: usize,
    pub channel: ChannelModel,
    /// Bob's authentication threshold.
    pub s_a: f64,
    /// Charlie's verification threshold for forwarded messages.
    pub s_v: f64,
    /// Allowed multiport null-click fraction above the predicted honest floor.
    pub rejection_threshold: f64,
    pub alice: AliceStrategy,
    pub bob: BobStrategy,
    pub trials: usize,
    pub master_seed: u64,
    pub execution: Execution,
    /// Base `d` used for the analytic repudiation bound.
    pub repudiation_base: f64,
}

impl ProtocolConfig {
    pub fn new(alphabet: PhaseAlphabet, channel: ChannelModel, s_a: f64, s_v: f64) -> Self {
        Self {
            alphabet,
            signature_length: 10_000,
            channel,
            s_a,
            s_v,
            rejection_threshold: 1e-3,
            alice: AliceStrategy::Honest,
            bob: BobStrategy::Honest,
            trials: 1,
            master_seed: 0,
            execution: Execution::default(),
            repudiation_base: REPUDIATION_BASE_IDEAL,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.signature_length < 1 {
            return Err(invalid("signature_length", "must be ≥ 1"));
        }
        if self.trials < 1 {
            return Err(invalid("trials", "must be ≥ 1"));
        }
        if !(0.0 < self.s_a && self.s_a < self.s_v && self.s_v < 1.0) {
            return Err(invalid(
                "thresholds",
                format!("need 0 < s_a < s_v < 1, got s_a = {}, s_v = {}", self.s_a, self.s_v),
            ));
        }
        if !(self.rejection_threshold.is_finite() && self.rejection_threshold >= 0.0) {
            return Err(invalid("rejection_threshold", "must be ≥ 0"));
        }
        if !(0.0..1.0).contains(&self.repudiation_base) {
            return Err(invalid("repudiation_base", "must lie in [0, 1)"));
        }
        self.channel.validate()?;
        self.alice.validate()?;
        self.bob.validate()?;
        if self.bob.is_forger() && !self.alice.is_honest() {
            return Err(invalid(
                "strategies",
                "forging strategies are simulated against an honest Alice only",
            ));
        }
        Ok(())
    }

    /// Predicted honest null-port click probability at `receiver`.
    pub fn honest_null_floor(&self, receiver: Receiver) -> f64 {
        let a = self.alphabet.state(0);
        let ports = multiport_mean_photons(a, a, self.channel.visibility);
        let mu = match receiver {
            Receiver::Bob => ports.bob_null,
            Receiver::Charlie => ports.charlie_null,
        };
        self.channel.multiport_port_click_probability(mu, receiver)
    }

    /// Null-click fraction above which `receiver` aborts.
    pub fn applied_rejection_threshold(&self, receiver: Receiver) -> f64 {
        self.rejection_threshold + self.honest_null_floor(receiver)
    }
}

/// Draws `L` key indices uniformly from the alphabet.
pub fn generate_private_key<R: Rng + ?Sized>(
    rng: &mut R,
    alphabet: &PhaseAlphabet,
    length: usize,
) -> Vec<usize> {
    let n = alphabet.n_phases();
    (0..length).map(|_| rng.random_range(0..n)).collect()
}

/// Samples `P(φ | θ)` for a fixed measurement.
#[derive(Clone, Debug)]
pub struct GuessSampler {
    rows: Vec<WeightedIndex<f64>>,
}

impl GuessSampler {
    pub fn new(povm: &Povm, spec: &SpectralDecomposition) -> Result<Self> {
        let rows = outcome_table(povm, spec)?
            .into_iter()
            .map(|row| {
                WeightedIndex::new(row)
                    .map_err(|e| invalid("outcome distribution", e.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { rows })
    }

    /// Square-root measurement on the alphabet scaled by `amplitude_factor`.
    pub fn square_root(alphabet: &PhaseAlphabet, amplitude_factor: f64) -> Result<Self> {
        let spec = gram_spectrum(&alphabet.scaled(amplitude_factor)?)?;
        Self::new(&square_root_povm(&spec), &spec)
    }

    pub fn sample<R: Rng + ?Sized>(&self, theta: usize, rng: &mut R) -> usize {
        self.rows[theta].sample(rng)
    }
}

/// Declared phases of a forger who measures each stored state `|v_θ⟩` with `povm`.
pub fn passive_forge<R: Rng + ?Sized>(
    bob_states: &[usize],
    povm: &Povm,
    spec: &SpectralDecomposition,
    rng: &mut R,
) -> Result<Vec<usize>> {
    let n = spec.dim();
    if let Some(&bad) = bob_states.iter().find(|&&k| k >= n) {
        return Err(QdsError::IndexOutOfRange { index: bad, len: n });
    }
    let sampler = GuessSampler::new(povm, spec)?;
    Ok(bob_states.iter().map(|&t| sampler.sample(t, rng)).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseRecord {
    pub key_index: usize,
    pub bob_input: ComplexAmplitude,
    pub charlie_input: ComplexAmplitude,
    pub bob_null_click: bool,
    pub charlie_null_click: bool,
    /// Signal amplitude each receiver keeps for later verification.
    pub bob_stored: ComplexAmplitude,
    pub charlie_stored: ComplexAmplitude,
    /// Phase index an active forger measured during distribution.
    pub forger_guess: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub pulses: Vec<PulseRecord>,
    pub bob_null_clicks: usize,
    pub charlie_null_clicks: usize,
    pub bob_aborted: bool,
    pub charlie_aborted: bool,
    /// Declared phases and per-pulse verification clicks, once verified.
    pub declared: Vec<usize>,
    pub bob_signal_clicks: Vec<bool>,
    pub charlie_signal_clicks: Vec<bool>,
}

impl Transcript {
    pub fn len(&self) -> usize {
        self.pulses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pulses.is_empty()
    }

    pub fn key(&self) -> Vec<usize> {
        self.pulses.iter().map(|p| p.key_index).collect()
    }

    pub fn stored(&self, receiver: Receiver) -> Vec<ComplexAmplitude> {
        self.pulses
            .iter()
            .map(|p| match receiver {
                Receiver::Bob => p.bob_stored,
                Receiver::Charlie => p.charlie_stored,
            })
            .collect()
    }

    pub const CSV_HEADER: [&'static str; 11] = [
        "pulse",
        "key_index",
        "bob_input_phase",
        "charlie_input_phase",
        "bob_input_mean_photons",
        "charlie_input_mean_photons",
        "bob_null_click",
        "charlie_null_click",
        "declared_index",
        "bob_signal_click",
        "charlie_signal_click",
    ];

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(Self::CSV_HEADER)?;
        let opt_bool = |v: Option<&bool>| v.map(|b| u8::from(*b).to_string()).unwrap_or_default();
        for (k, p) in self.pulses.iter().enumerate() {
            wtr.write_record([
                k.to_string(),
                p.key_index.to_string(),
                format!("{:e}", p.bob_input.phase()),
                format!("{:e}", p.charlie_input.phase()),
                format!("{:e}", p.bob_input.mean_photons()),
                format!("{:e}", p.charlie_input.mean_photons()),
                u8::from(p.bob_null_click).to_string(),
                u8::from(p.charlie_null_click).to_string(),
                self.declared.get(k).map(|d| d.to_string()).unwrap_or_default(),
                opt_bool(self.bob_signal_clicks.get(k)),
                opt_bool(self.charlie_signal_clicks.get(k)),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Bernoulli draw; one uniform per call regardless of `p`.
fn click<R: Rng + ?Sized>(rng: &mut R, p: f64) -> bool {
    rng.random::<f64>() < p
}

/// Sends every key pulse through the multiport according to the configured
/// strategies and samples both multiport null-port detectors.
pub fn run_distribution<R: Rng + ?Sized>(
    config: &ProtocolConfig,
    key: &[usize],
    bob_rng: &mut R,
    charlie_rng: &mut R,
    forger_rng: &mut R,
) -> Result<Transcript> {
    let alphabet = &config.alphabet;
    let channel = &config.channel;
    let n = alphabet.n_phases();
    if let Some(&bad) = key.iter().find(|&&k| k >= n) {
        return Err(QdsError::IndexOutOfRange { index: bad, len: n });
    }
    let active_sampler = match config.bob {
        BobStrategy::ActiveForger { .. } => Some(GuessSampler::square_root(alphabet, AMPLIFICATION_FACTOR)?),
        _ => None,
    };
    let half = std::f64::consts::FRAC_1_SQRT_2;
    let mut pulses = Vec::with_capacity(key.len());
    let (mut bob_null_clicks, mut charlie_null_clicks) = (0usize, 0usize);
    for (k, &theta) in key.iter().enumerate() {
        let (a, b) = config.alice.inputs(alphabet, k, theta);
        let record = match (config.bob, &active_sampler) {
            (BobStrategy::ActiveForger { amplitude_scale }, Some(sampler)) => {
                let guess = sampler.sample(theta, forger_rng);
                let response = ComplexAmplitude::from_polar(
                    amplitude_scale * alphabet.amplitude() * half,
                    alphabet.phase(guess),
                );
                let charlie_keep = b * half;
                let (_, charlie_stored) = beamsplitter_mix(response, charlie_keep);
                let mu = crate::channel::mixed_null_mean_photons(
                    response,
                    charlie_keep,
                    channel.visibility,
                );
                let charlie_null_click =
                    click(charlie_rng, channel.multiport_port_click_probability(mu, Receiver::Charlie));
                PulseRecord {
                    key_index: theta,
                    bob_input: a,
                    charlie_input: b,
                    bob_null_click: false,
                    charlie_null_click,
                    bob_stored: ComplexAmplitude::from_polar(
                        (a.mean_photons() + 0.5 * b.mean_photons()).sqrt(),
                        alphabet.phase(theta),
                    ),
                    charlie_stored,
                    forger_guess: Some(guess),
                }
            }
            _ => {
                let out = multiport_map(a, b);
                let ports = multiport_mean_photons(a, b, channel.visibility);
                let bob_null_click =
                    click(bob_rng, channel.multiport_port_click_probability(ports.bob_null, Receiver::Bob));
                let charlie_null_click = click(
                    charlie_rng,
                    channel.multiport_port_click_probability(ports.charlie_null, Receiver::Charlie),
                );
                PulseRecord {
                    key_index: theta,
                    bob_input: a,
                    charlie_input: b,
                    bob_null_click,
                    charlie_null_click,
                    bob_stored: out.bob_signal,
                    charlie_stored: out.charlie_signal,
                    forger_guess: None,
                }
            }
        };
        bob_null_clicks += usize::from(record.bob_null_click);
        charlie_null_clicks += usize::from(record.charlie_null_click);
        pulses.push(record);
    }
    let l = key.len() as f64;
    let bob_aborted = !config.bob.is_forger()
        && bob_null_clicks as f64 > config.applied_rejection_threshold(Receiver::Bob) * l;
    let charlie_aborted =
        charlie_null_clicks as f64 > config.applied_rejection_threshold(Receiver::Charlie) * l;
    Ok(Transcript {
        pulses,
        bob_null_clicks,
        charlie_null_clicks,
        bob_aborted,
        charlie_aborted,
        ..Transcript::default()
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationOutcome {
    pub accept: bool,
    pub click_count: usize,
}

/// Per-pulse verification clicks for stored amplitudes tested against the
/// declared phases.
pub fn verification_clicks<R: Rng + ?Sized>(
    stored: &[ComplexAmplitude],
    declared: &[usize],
    alphabet: &PhaseAlphabet,
    channel: &ChannelModel,
    receiver: Receiver,
    rng: &mut R,
) -> Result<Vec<bool>> {
    if stored.len() != declared.len() {
        return Err(QdsError::DimensionMismatch {
            expected: stored.len(),
            found: declared.len(),
        });
    }
    let n = alphabet.n_phases();
    if let Some(&bad) = declared.iter().find(|&&k| k >= n) {
        return Err(QdsError::IndexOutOfRange { index: bad, len: n });
    }
    Ok(stored
        .iter()
        .zip(declared)
        .map(|(&s, &phi)| {
            let p = channel.verification_click_probability(s, alphabet.state(phi), receiver);
            click(rng, p)
        })
        .collect())
}

/// Accepts iff the number of verification clicks is below `threshold · L`.
#[allow(clippy::too_many_arguments)]
pub fn run_verification<R: Rng + ?Sized>(
    stored: &[ComplexAmplitude],
    declared: &[usize],
    threshold: f64,
    alphabet: &PhaseAlphabet,
    channel: &ChannelModel,
    receiver: Receiver,
    rng: &mut R,
) -> Result<VerificationOutcome> {
    let clicks = verification_clicks(stored, declared, alphabet, channel, receiver, rng)?;
    let click_count = clicks.iter().filter(|&&c| c).count();
    Ok(VerificationOutcome {
        accept: accepts(click_count, threshold, stored.len()),
        click_count,
    })
}

pub fn accepts(click_count: usize, threshold: f64, length: usize) -> bool {
    (click_count as f64) < threshold * length as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::rng::{stream_rng, Stage};

    fn alphabet() -> PhaseAlphabet {
        PhaseAlphabet::from_mean_photons(8, 0.16).unwrap()
    }

    #[test]
    fn key_is_reproducible() {
        let a = generate_private_key(&mut stream_rng(1, 0, Stage::PrivateKey), &alphabet(), 64);
        let b = generate_private_key(&mut stream_rng(1, 0, Stage::PrivateKey), &alphabet(), 64);
        assert_eq!(a, b);
        assert!(a.iter().all(|&k| k < 8));
    }

    #[test]
    fn orthogonal_forger_is_always_right() {
        let bright = PhaseAlphabet::from_mean_photons(4, 60.0).unwrap();
        let spec = gram_spectrum(&bright).unwrap();
        let povm = square_root_povm(&spec);
        let states = vec![0, 1, 2, 3, 3, 2, 1, 0];
        let declared = passive_forge(&states, &povm, &spec, &mut stream_rng(5, 0, Stage::Forger)).unwrap();
        assert_eq!(declared, states);
    }

    #[test]
    fn verification_edge_cases() {
        let a = alphabet();
        let stored = vec![a.state(0); 10];
        let mut rng = stream_rng(2, 0, Stage::CharlieVerification);
        let out = run_verification(&stored, &[4; 10], 1.0 + 1e-9, &a, &ChannelModel::default(), Receiver::Charlie, &mut rng)
            .unwrap();
        assert!(out.accept);
        assert!(run_verification(&stored, &[0; 9], 0.5, &a, &ChannelModel::default(), Receiver::Charlie, &mut rng).is_err());
    }

    #[test]
    fn honest_distribution_stores_alphabet_states() {
        let config = ProtocolConfig::new(alphabet(), ChannelModel::default(), 0.01, 0.02);
        let key = vec![0, 3, 7, 5];
        let mut rngs = [1u64, 2, 3].map(|t| stream_rng(9, t, Stage::BobNullPort));
        let [r1, r2, r3] = &mut rngs;
        let t = run_distribution(&config, &key, r1, r2, r3).unwrap();
        for (p, &k) in t.pulses.iter().zip(&key) {
            let s = alphabet().state(k);
            assert!((p.bob_stored - s).magnitude() < 1e-15);
            assert!((p.charlie_stored - s).magnitude() < 1e-15);
        }
    }

    #[test]
    fn forging_against_dishonest_alice_is_rejected() {
        let mut config = ProtocolConfig::new(alphabet(), ChannelModel::default(), 0.01, 0.02);
        config.bob = BobStrategy::PassiveForger;
        config.alice = AliceStrategy::BlockedInput { receiver: Receiver::Bob };
        assert!(config.validate().is_err());
        config.alice = AliceStrategy::Honest;
        assert!(config.validate().is_ok());
        config.s_v = config.s_a;
        assert!(config.validate().is_err());
    }
}
