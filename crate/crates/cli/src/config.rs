//! The run configuration file.
//!
//! A single JSON document. Every field has a default, so `{}` is a valid
//! configuration; unknown keys are rejected.

use std::path::{Path, PathBuf};

use clap::ValueEnum;
use qds_core::channel::Receiver;
use qds_core::coherent::PhaseAlphabet;
use qds_core::reference::{REFERENCE_MEAN_PHOTONS, REFERENCE_N_PHASES};
use qds_core::sim::{AliceStrategy, BobStrategy};
use qds_core::{ChannelModel, Execution};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub master_seed: u64,
    pub output_dir: PathBuf,
    pub alphabet: AlphabetConfig,
    pub channel: ChannelModel,
    pub entropy: EntropyConfig,
    pub analysis: AnalysisConfig,
    pub simulation: SimulationConfig,
    pub cost_matrix: CostMatrixConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            master_seed: 0,
            output_dir: PathBuf::from("qds-out"),
            alphabet: AlphabetConfig::default(),
            channel: ChannelModel::default(),
            entropy: EntropyConfig::default(),
            analysis: AnalysisConfig::default(),
            simulation: SimulationConfig::default(),
            cost_matrix: CostMatrixConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AlphabetConfig {
    pub n_phases: usize,
    pub mean_photons: f64,
}

impl Default for AlphabetConfig {
    fn default() -> Self {
        Self {
            n_phases: REFERENCE_N_PHASES,
            mean_photons: REFERENCE_MEAN_PHOTONS,
        }
    }
}

impl AlphabetConfig {
    pub fn build(&self) -> CliResult<PhaseAlphabet> {
        Ok(PhaseAlphabet::from_mean_photons(self.n_phases, self.mean_photons)?)
    }
}

/// Entropy sweep: every `n_phases` against `points` evenly spaced mean photon
/// numbers in `[0, mean_photons_max]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EntropyConfig {
    pub n_phases: Vec<usize>,
    pub mean_photons_max: f64,
    pub points: usize,
    pub receivers: u32,
}

impl Default for EntropyConfig {
    fn default() -> Self {
        Self {
            n_phases: vec![2, 4, 8, 16, 32],
            mean_photons_max: 50.0,
            points: 201,
            receivers: 2,
        }
    }
}

impl EntropyConfig {
    pub fn grid(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![0.0];
        }
        (0..self.points)
            .map(|i| self.mean_photons_max * i as f64 / (self.points - 1) as f64)
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LengthGrid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Default for LengthGrid {
    fn default() -> Self {
        Self {
            start: 1e5,
            stop: 1e10,
            count: 51,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    /// Headerless CSV cost matrix; `None` uses the bundled measurement.
    pub cost_matrix_path: Option<PathBuf>,
    /// First rows of circulant bounding matrices. When both are absent the
    /// bundled matrix uses its published rows and any other matrix uses
    /// rows derived by the orbit rule.
    pub lower_row: Option<Vec<f64>>,
    pub upper_row: Option<Vec<f64>>,
    /// Signature length of the single-point report.
    pub signature_length: f64,
    pub lengths: LengthGrid,
    pub rejection_threshold: f64,
    pub hoeffding_slack: Option<f64>,
    pub repudiation_base: f64,
    pub receivers: u32,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            cost_matrix_path: None,
            lower_row: None,
            upper_row: None,
            signature_length: 1e8,
            lengths: LengthGrid::default(),
            rejection_threshold: 1e-7,
            hoeffding_slack: None,
            repudiation_base: 0.5,
            receivers: 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationConfig {
    pub signature_length: usize,
    pub trials: usize,
    /// Thresholds; when absent they are derived from the channel model's
    /// predicted cost matrix.
    pub s_a: Option<f64>,
    pub s_v: Option<f64>,
    pub rejection_threshold: f64,
    pub alice: AliceStrategy,
    pub bob: BobStrategy,
    pub execution: Execution,
    pub repudiation_base: f64,
    /// Also write the per-pulse transcript of trial 0.
    pub transcript: bool,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            signature_length: 10_000,
            trials: 100,
            s_a: None,
            s_v: None,
            rejection_threshold: 1e-3,
            alice: AliceStrategy::Honest,
            bob: BobStrategy::Honest,
            execution: Execution::Parallel,
            repudiation_base: 0.5,
            transcript: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CostMatrixConfig {
    /// Fit the channel calibration so the diagonal equals this value.
    pub calibrate_diagonal: Option<f64>,
    /// Ignore the channel and emit the lossless, perfect-visibility matrix.
    pub ideal: bool,
    /// Pulses per `(φ, θ)` pair for the Monte Carlo estimate; 0 disables it.
    pub monte_carlo_pulses: u64,
}

impl Default for CostMatrixConfig {
    fn default() -> Self {
        Self {
            calibrate_diagonal: Some(3.89e-3),
            ideal: false,
            monte_carlo_pulses: 0,
        }
    }
}

/// Named simulation scenarios selectable with `--preset`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    Honest,
    PassiveForger,
    TamperPi4,
    TamperPi2,
    TamperPi,
    BlockedInput,
}

/// Fraction of tampered pulses in the tamper presets: two in every sixteen.
pub const TAMPER_FRACTION: f64 = 2.0 / 16.0;

/// Extra loss in front of Bob's detectors in the blocked-input preset,
/// a factor of four in power.
pub const BLOCKED_INPUT_BOB_LOSS_DB: f64 = 6.020_599_913_279_624;

impl Preset {
    pub fn apply(self, config: &mut RunConfig) {
        use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
        let sim = &mut config.simulation;
        sim.bob = BobStrategy::Honest;
        sim.alice = AliceStrategy::Honest;
        let tamper = |delta_phi| AliceStrategy::PhaseTamper {
            delta_phi,
            fraction: TAMPER_FRACTION,
        };
        match self {
            Preset::Honest => {}
            Preset::PassiveForger => sim.bob = BobStrategy::PassiveForger,
            Preset::TamperPi4 => sim.alice = tamper(FRAC_PI_4),
            Preset::TamperPi2 => sim.alice = tamper(FRAC_PI_2),
            Preset::TamperPi => sim.alice = tamper(PI),
            Preset::BlockedInput => {
                sim.alice = AliceStrategy::BlockedInput {
                    receiver: Receiver::Charlie,
                };
                config.channel.bob_extra_loss_db = BLOCKED_INPUT_BOB_LOSS_DB;
            }
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> CliResult<Self> {
        let config: Self = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    /// Applies command-line overrides in the order preset, seed, output directory.
    pub fn with_overrides(mut self, seed: Option<u64>, out: Option<PathBuf>, preset: Option<Preset>) -> Self {
        if let Some(p) = preset {
            p.apply(&mut self);
        }
        if let Some(s) = seed {
            self.master_seed = s;
        }
        if let Some(o) = out {
            self.output_dir = o;
        }
        self
    }

    pub fn validate(&self) -> CliResult<()> {
        let bad = |msg: String| Err(CliError::Config(msg));
        self.alphabet.build()?;
        self.channel.validate()?;

        let e = &self.entropy;
        if e.n_phases.is_empty() || e.n_phases.iter().any(|&n| n < 2) {
            return bad("entropy.n_phases must be non-empty with every N ≥ 2".into());
        }
        if !(e.mean_photons_max.is_finite() && e.mean_photons_max >= 0.0) || e.points == 0 {
            return bad("entropy grid needs mean_photons_max ≥ 0 and points ≥ 1".into());
        }

        let a = &self.analysis;
        qds_core::bounds::log_grid(a.lengths.start, a.lengths.stop, a.lengths.count)?;
        if a.lower_row.is_some() != a.upper_row.is_some() {
            return bad("analysis.lower_row and analysis.upper_row must be given together".into());
        }
        if !(a.signature_length.is_finite() && a.signature_length >= 1.0) {
            return bad(format!("analysis.signature_length {} must be ≥ 1", a.signature_length));
        }
        if !(0.0..1.0).contains(&a.rejection_threshold) {
            return bad(format!("analysis.rejection_threshold {} must lie in [0, 1)", a.rejection_threshold));
        }
        if !(0.0..1.0).contains(&a.repudiation_base) {
            return bad(format!("analysis.repudiation_base {} must lie in [0, 1)", a.repudiation_base));
        }
        if a.receivers == 0 {
            return bad("analysis.receivers must be ≥ 1".into());
        }

        let s = &self.simulation;
        if s.s_a.is_some() != s.s_v.is_some() {
            return bad("simulation.s_a and simulation.s_v must be given together".into());
        }
        if let (Some(s_a), Some(s_v)) = (s.s_a, s.s_v) {
            if !(0.0 < s_a && s_a < s_v && s_v < 1.0) {
                return bad(format!("infeasible thresholds: need 0 < s_a < s_v < 1, got {s_a}, {s_v}"));
            }
        }
        if s.signature_length == 0 || s.trials == 0 {
            return bad("simulation.signature_length and simulation.trials must be ≥ 1".into());
        }
        s.alice.validate()?;
        s.bob.validate()?;
        if s.bob.is_forger() && !s.alice.is_honest() {
            return bad("forging strategies are simulated against an honest Alice only".into());
        }

        if let Some(d) = self.cost_matrix.calibrate_diagonal {
            if !(d > 0.0 && d < 1.0) {
                return bad(format!("cost_matrix.calibrate_diagonal {d} must lie in (0, 1)"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_default() {
        assert_eq!(RunConfig::from_json("{}").unwrap(), RunConfig::default());
    }

    #[test]
    fn defaults_match_experiment() {
        let c = RunConfig::default();
        assert_eq!(c.alphabet.n_phases, 8);
        assert_eq!(c.alphabet.mean_photons, 0.16);
        assert_eq!(c.channel.clock_hz, 1e8);
        assert_eq!(c.channel.visibility, 0.98);
        assert_eq!(c.channel.multiport_loss_db, 7.5);
        assert_eq!(c.channel.receiver_loss_db, 7.1);
        assert_eq!(c.channel.dark_cps, 320.0);
        assert_eq!(c.channel.gate_s, 2e-9);
        assert_eq!(c.channel.det_efficiency, 0.42);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(matches!(RunConfig::from_json(r#"{"seed": 1}"#), Err(CliError::Config(_))));
        assert!(RunConfig::from_json(r#"{"channel": {"visiblity": 0.9}}"#).is_err());
    }

    #[test]
    fn strategies_parse() {
        let c = RunConfig::from_json(
            r#"{"simulation": {"alice": {"kind": "phase_tamper", "delta_phi": 1.0, "fraction": 0.5},
                               "execution": "sequential"}}"#,
        )
        .unwrap();
        assert_eq!(c.simulation.alice, AliceStrategy::PhaseTamper { delta_phi: 1.0, fraction: 0.5 });
        assert_eq!(c.simulation.execution, Execution::Sequential);
    }

    #[test]
    fn infeasible_thresholds_rejected() {
        let text = r#"{"simulation": {"s_a": 0.01, "s_v": 0.005}}"#;
        assert!(matches!(RunConfig::from_json(text), Err(CliError::Config(_))));
    }

    #[test]
    fn forger_needs_honest_alice() {
        let mut c = RunConfig::default().with_overrides(None, None, Some(Preset::PassiveForger));
        c.simulation.alice = AliceStrategy::BlockedInput { receiver: Receiver::Bob };
        assert!(c.validate().is_err());
    }

    #[test]
    fn round_trip_is_idempotent() {
        let c = RunConfig::default().with_overrides(Some(9), Some("x".into()), Some(Preset::TamperPi2));
        let once = c.to_json();
        let parsed = RunConfig::from_json(&once).unwrap();
        assert_eq!(parsed, c);
        assert_eq!(parsed.to_json(), once);
    }

    #[test]
    fn presets_set_strategies() {
        let c = RunConfig::default().with_overrides(None, None, Some(Preset::BlockedInput));
        assert!(matches!(c.simulation.alice, AliceStrategy::BlockedInput { .. }));
        assert!((c.channel.bob_extra_loss_db - 10.0 * 4f64.log10()).abs() < 1e-12);
        let c = RunConfig::default().with_overrides(None, None, Some(Preset::TamperPi));
        assert_eq!(
            c.simulation.alice,
            AliceStrategy::PhaseTamper { delta_phi: std::f64::consts::PI, fraction: 0.125 }
        );
    }
}
