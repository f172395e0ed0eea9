//! Losses, visibility, detector efficiency and dark counts, turned into
//! per-pulse click probabilities and predicted cost matrices.
//!
//! Detection is Poissonian: a port carrying mean photon number `μ` clicks with
//! probability `1 − exp(−η μ)`, combined with an independent dark click.
//! Imperfect interference is modelled by a visibility `V` that scales the
//! interference term of every 50:50 mix.

use serde::{Deserialize, Serialize};

use crate::coherent::{ComplexAmplitude, MultiportOutputs, PhaseAlphabet};
use crate::cost::CostMatrix;
use crate::error::{invalid, Result};

/// Which receiver a detector belongs to; Bob may carry extra detection loss.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Receiver {
    Bob,
    Charlie,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelModel {
    pub clock_hz: f64,
    pub dark_cps: f64,
    pub gate_s: f64,
    pub det_efficiency: f64,
    pub visibility: f64,
    pub multiport_loss_db: f64,
    pub receiver_loss_db: f64,
    /// Global multiplicative factor on the verification-port mean photon number.
    pub calibration: f64,
    /// Additional loss in front of Bob's detectors only.
    pub bob_extra_loss_db: f64,
}

impl Default for ChannelModel {
    fn default() -> Self {
        Self {
            clock_hz: 1e8,
            dark_cps: 320.0,
            gate_s: 2e-9,
            det_efficiency: 0.42,
            visibility: 0.98,
            multiport_loss_db: 7.5,
            receiver_loss_db: 7.1,
            calibration: 1.0,
            bob_extra_loss_db: 0.0,
        }
    }
}

fn db_to_transmission(db: f64) -> f64 {
    10f64.powf(-db / 10.0)
}

fn click_probability(mean_photons: f64, p_dark: f64) -> f64 {
    let p_signal = -(-mean_photons.max(0.0)).exp_m1();
    p_signal + p_dark - p_signal * p_dark
}

impl ChannelModel {
    /// Lossless, unit-efficiency, perfect-visibility, dark-free detection.
    pub fn ideal() -> Self {
        Self {
            dark_cps: 0.0,
            det_efficiency: 1.0,
            visibility: 1.0,
            multiport_loss_db: 0.0,
            receiver_loss_db: 0.0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(invalid(name, format!("{v} must be finite and > 0")))
            }
        };
        let nonnegative = |name, v: f64| {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(invalid(name, format!("{v} must be finite and ≥ 0")))
            }
        };
        let unit = |name, v: f64| {
            if v.is_finite() && (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(invalid(name, format!("{v} must lie in [0, 1]")))
            }
        };
        positive("clock_hz", self.clock_hz)?;
        positive("gate_s", self.gate_s)?;
        positive("calibration", self.calibration)?;
        nonnegative("dark_cps", self.dark_cps)?;
        nonnegative("multiport_loss_db", self.multiport_loss_db)?;
        nonnegative("receiver_loss_db", self.receiver_loss_db)?;
        nonnegative("bob_extra_loss_db", self.bob_extra_loss_db)?;
        unit("det_efficiency", self.det_efficiency)?;
        unit("visibility", self.visibility)?;
        unit("dark probability per gate", self.dark_probability_per_gate())?;
        Ok(())
    }

    /// Efficiency from Alice's output to a verification detector.
    pub fn total_efficiency(&self) -> f64 {
        self.det_efficiency * db_to_transmission(self.multiport_loss_db + self.receiver_loss_db)
    }

    /// Efficiency from Alice's output to a multiport null-port detector.
    pub fn multiport_efficiency(&self) -> f64 {
        self.det_efficiency * db_to_transmission(self.multiport_loss_db)
    }

    pub fn receiver_transmission(&self, receiver: Receiver) -> f64 {
        match receiver {
            Receiver::Bob => db_to_transmission(self.bob_extra_loss_db),
            Receiver::Charlie => 1.0,
        }
    }

    /// Dark click probability within one detection gate, `R_dark·ΔT`.
    pub fn dark_probability_per_gate(&self) -> f64 {
        self.dark_cps * self.gate_s
    }

    /// Dark click probability over a full clock period, `R_dark/ν`.
    pub fn dark_probability_per_clock(&self) -> f64 {
        self.dark_cps / self.clock_hz
    }

    /// Verification-port click probability for a stored amplitude tested
    /// against a locally prepared reference amplitude.
    pub fn verification_click_probability(
        &self,
        stored: ComplexAmplitude,
        reference: ComplexAmplitude,
        receiver: Receiver,
    ) -> f64 {
        let mu = mixed_null_mean_photons(
            stored * std::f64::consts::FRAC_1_SQRT_2,
            reference * std::f64::consts::FRAC_1_SQRT_2,
            self.visibility,
        );
        let eta = self.calibration * self.total_efficiency() * self.receiver_transmission(receiver);
        click_probability(eta * mu, self.dark_probability_per_gate())
    }

    /// Click probability at a multiport output port carrying `mean_photons`
    /// (already including visibility effects).
    pub fn multiport_port_click_probability(&self, mean_photons: f64, receiver: Receiver) -> f64 {
        let eta = self.multiport_efficiency() * self.receiver_transmission(receiver);
        click_probability(eta * mean_photons, self.dark_probability_per_gate())
    }

    /// Click probabilities of the four multiport output ports for the given
    /// per-receiver inputs.
    pub fn multiport_click_probabilities(
        &self,
        alice_to_bob: ComplexAmplitude,
        alice_to_charlie: ComplexAmplitude,
    ) -> PortProbabilities {
        let ports = multiport_mean_photons(alice_to_bob, alice_to_charlie, self.visibility);
        PortProbabilities {
            bob_null: self.multiport_port_click_probability(ports.bob_null, Receiver::Bob),
            bob_signal: self.multiport_port_click_probability(ports.bob_signal, Receiver::Bob),
            charlie_null: self.multiport_port_click_probability(ports.charlie_null, Receiver::Charlie),
            charlie_signal: self
                .multiport_port_click_probability(ports.charlie_signal, Receiver::Charlie),
        }
    }
}

/// Mean photon numbers (or click probabilities) at the four multiport ports.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PortProbabilities {
    pub bob_null: f64,
    pub bob_signal: f64,
    pub charlie_null: f64,
    pub charlie_signal: f64,
}

/// Null-port mean photon number of a 50:50 mix of `x` and `y` with fringe
/// visibility `V`: `(|x|² + |y|²)/2 − V·Re(x̄ y)`. At `V = 1` this is
/// `|(x − y)/√2|²`.
pub fn mixed_null_mean_photons(x: ComplexAmplitude, y: ComplexAmplitude, visibility: f64) -> f64 {
    let cross = (x.value().conj() * y.value()).re;
    (0.5 * (x.mean_photons() + y.mean_photons()) - visibility * cross).max(0.0)
}

/// Signal-port companion of [`mixed_null_mean_photons`].
pub fn mixed_signal_mean_photons(x: ComplexAmplitude, y: ComplexAmplitude, visibility: f64) -> f64 {
    let cross = (x.value().conj() * y.value()).re;
    (0.5 * (x.mean_photons() + y.mean_photons()) + visibility * cross).max(0.0)
}

/// Port intensities of the comparison multiport with imperfect visibility.
/// Reduces to the squared moduli of [`crate::coherent::multiport_map`] at `V = 1`.
pub fn multiport_mean_photons(
    alice_to_bob: ComplexAmplitude,
    alice_to_charlie: ComplexAmplitude,
    visibility: f64,
) -> PortProbabilities {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let (a, b) = (alice_to_bob * h, alice_to_charlie * h);
    PortProbabilities {
        bob_null: mixed_null_mean_photons(b, a, visibility),
        bob_signal: mixed_signal_mean_photons(b, a, visibility),
        charlie_null: mixed_null_mean_photons(a, b, visibility),
        charlie_signal: mixed_signal_mean_photons(a, b, visibility),
    }
}

impl From<MultiportOutputs> for PortProbabilities {
    fn from(o: MultiportOutputs) -> Self {
        Self {
            bob_null: o.bob_null.mean_photons(),
            bob_signal: o.bob_signal.mean_photons(),
            charlie_null: o.charlie_null.mean_photons(),
            charlie_signal: o.charlie_signal.mean_photons(),
        }
    }
}

fn check_mean_photons(mean_photons: f64) -> Result<()> {
    if mean_photons.is_finite() && mean_photons >= 0.0 {
        Ok(())
    } else {
        Err(invalid("mean_photons", format!("{mean_photons} must be finite and ≥ 0")))
    }
}

/// `1 − exp(−|α|² sin²((φ − θ)/2))`.
pub fn ideal_click_probability(phi: f64, theta: f64, mean_photons: f64) -> Result<f64> {
    check_mean_photons(mean_photons)?;
    let s = (0.5 * (phi - theta)).sin();
    Ok(-(-mean_photons * s * s).exp_m1())
}

/// `1 − (1 − p_click)(1 − p_dark)` with
/// `p_click = 1 − exp(−k η μ (1 − V cos(φ − θ))/2)`.
pub fn signal_null_click_probability(
    phi: f64,
    theta: f64,
    mean_photons: f64,
    model: &ChannelModel,
) -> Result<f64> {
    check_mean_photons(mean_photons)?;
    model.validate()?;
    Ok(verification_probability(phi - theta, mean_photons, model))
}

fn verification_probability(delta: f64, mean_photons: f64, model: &ChannelModel) -> f64 {
    let mu = 0.5 * mean_photons * (1.0 - model.visibility * delta.cos());
    let eta = model.calibration * model.total_efficiency();
    click_probability(eta * mu.max(0.0), model.dark_probability_per_gate())
}

/// Evaluates `f(offset)` once per orbit `{d, N − d}`, so the result is exactly
/// circulant and symmetric.
fn symmetric_circulant(n: usize, f: impl Fn(f64) -> f64) -> Result<CostMatrix> {
    let row: Vec<f64> = (0..n)
        .map(|d| {
            let d = d.min(n - d);
            f(std::f64::consts::TAU * d as f64 / n as f64)
        })
        .collect();
    CostMatrix::circulant(&row)
}

pub fn predicted_cost_matrix(alphabet: &PhaseAlphabet, model: &ChannelModel) -> Result<CostMatrix> {
    model.validate()?;
    let mu = alphabet.mean_photons();
    symmetric_circulant(alphabet.n_phases(), |delta| verification_probability(delta, mu, model))
}

pub fn ideal_cost_matrix(alphabet: &PhaseAlphabet) -> Result<CostMatrix> {
    let mu = alphabet.mean_photons();
    symmetric_circulant(alphabet.n_phases(), |delta| {
        let s = (0.5 * delta).sin();
        -(-mu * s * s).exp_m1()
    })
}

/// Returns `model` with `calibration` chosen so that the predicted diagonal
/// equals `target_diagonal`.
pub fn calibrate_to_diagonal(
    alphabet: &PhaseAlphabet,
    model: &ChannelModel,
    target_diagonal: f64,
) -> Result<ChannelModel> {
    model.validate()?;
    let p_dark = model.dark_probability_per_gate();
    if !(target_diagonal > p_dark && target_diagonal < 1.0) {
        return Err(invalid(
            "target_diagonal",
            format!("{target_diagonal} must lie in (p_dark = {p_dark:e}, 1)"),
        ));
    }
    let base = model.total_efficiency() * 0.5 * alphabet.mean_photons() * (1.0 - model.visibility);
    if base <= 0.0 {
        return Err(invalid(
            "model",
            "the diagonal carries no signal photons (zero efficiency, amplitude or unit visibility)",
        ));
    }
    let required = -((1.0 - target_diagonal) / (1.0 - p_dark)).ln();
    Ok(ChannelModel {
        calibration: required / base,
        ..model.clone()
    })
}

/// Fraction of time-gated counts caused by dark counts, `½ ν R_dark ΔT / R_gated`.
pub fn dark_fraction(model: &ChannelModel, gated_rate_cps: f64) -> Result<f64> {
    if !(gated_rate_cps.is_finite() && gated_rate_cps > 0.0) {
        return Err(invalid("gated_rate_cps", format!("{gated_rate_cps} must be > 0")));
    }
    Ok(0.5 * model.clock_hz * model.dark_cps * model.gate_s / gated_rate_cps)
}

/// Minimum (null-port) count rate implied by visibility `V` and maximum rate:
/// `I_min = I_max (1 − V)/(1 + V)`.
pub fn null_rate_from_visibility(signal_rate: f64, visibility: f64) -> Result<f64> {
    if !(visibility.is_finite() && (0.0..=1.0).contains(&visibility)) {
        return Err(invalid("visibility", format!("{visibility} must lie in [0, 1]")));
    }
    if !(signal_rate.is_finite() && signal_rate >= 0.0) {
        return Err(invalid("signal_rate", format!("{signal_rate} must be ≥ 0")));
    }
    Ok(signal_rate * (1.0 - visibility) / (1.0 + visibility))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NullRateComparison {
    /// Mean null-port click rate with tampering, counts per second.
    pub rate_cps: f64,
    pub honest_rate_cps: f64,
    /// `rate / honest_rate`; `None` when the honest floor is exactly zero.
    pub factor_over_honest: Option<f64>,
}

/// Multiport null-port click rate when a fraction of Alice's pulses carries an
/// extra phase `delta_phi` on one arm.
pub fn dishonest_alice_null_rate(
    model: &ChannelModel,
    mean_photons: f64,
    delta_phi: f64,
    tamper_fraction: f64,
) -> Result<NullRateComparison> {
    model.validate()?;
    check_mean_photons(mean_photons)?;
    if !(tamper_fraction.is_finite() && (0.0..=1.0).contains(&tamper_fraction)) {
        return Err(invalid("tamper_fraction", format!("{tamper_fraction} must lie in [0, 1]")));
    }
    let alpha = ComplexAmplitude::real(mean_photons.sqrt());
    let null_probability = |delta: f64| {
        let ports = multiport_mean_photons(alpha, alpha.rotate(delta), model.visibility);
        model.multiport_port_click_probability(ports.charlie_null, Receiver::Charlie)
    };
    let honest = null_probability(0.0);
    let tampered = null_probability(delta_phi);
    let mixed = (1.0 - tamper_fraction) * honest + tamper_fraction * tampered;
    let rate_cps = mixed * model.clock_hz;
    let honest_rate_cps = honest * model.clock_hz;
    let factor_over_honest = (honest_rate_cps > 0.0).then(|| rate_cps / honest_rate_cps);
    Ok(NullRateComparison {
        rate_cps,
        honest_rate_cps,
        factor_over_honest,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    #[test]
    fn ideal_click_values() {
        assert_eq!(ideal_click_probability(1.3, 1.3, 0.16).unwrap(), 0.0);
        assert_abs_diff_eq!(
            ideal_click_probability(PI, 0.0, 0.16).unwrap(),
            1.0 - (-0.16f64).exp(),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(ideal_click_probability(PI, 0.0, 0.16).unwrap(), 0.1479, epsilon = 1e-4);
        assert_abs_diff_eq!(ideal_click_probability(FRAC_PI_2, 0.0, 0.16).unwrap(), 0.0769, epsilon = 1e-4);
        assert!(ideal_click_probability(0.0, 1.0, -0.1).is_err());
    }

    #[test]
    fn ideal_limit_matches_ideal_formula() {
        let m = ChannelModel::ideal();
        for (phi, theta) in [(0.0, 0.0), (PI, 0.0), (0.3, 2.0), (FRAC_PI_4, -1.0)] {
            let a = signal_null_click_probability(phi, theta, 0.16, &m).unwrap();
            let b = ideal_click_probability(phi, theta, 0.16).unwrap();
            assert_abs_diff_eq!(a, b, epsilon = 1e-15);
        }
    }

    #[test]
    fn dark_floor() {
        let m = ChannelModel::default();
        let p = signal_null_click_probability(0.0, 0.0, 0.0, &m).unwrap();
        assert_abs_diff_eq!(p, 6.4e-7, epsilon = 1e-18);
        assert_abs_diff_eq!(m.dark_probability_per_clock(), 3.2e-6, epsilon = 1e-18);
    }

    #[test]
    fn calibrated_diagonal_hits_target() {
        let alphabet = PhaseAlphabet::from_mean_photons(8, 0.16).unwrap();
        let m = calibrate_to_diagonal(&alphabet, &ChannelModel::default(), 3.89e-3).unwrap();
        let c = predicted_cost_matrix(&alphabet, &m).unwrap();
        for d in c.diagonal() {
            assert_abs_diff_eq!(d, 3.89e-3, epsilon = 1e-12);
        }
        assert!(m.calibration > 1.0);
        assert!(c.is_circulant_symmetric(0.0));
    }

    #[test]
    fn calibration_rejects_unreachable_targets() {
        let alphabet = PhaseAlphabet::from_mean_photons(8, 0.16).unwrap();
        assert!(calibrate_to_diagonal(&alphabet, &ChannelModel::default(), 1e-8).is_err());
        assert!(calibrate_to_diagonal(&alphabet, &ChannelModel::ideal(), 1e-3).is_err());
    }

    #[test]
    fn ideal_matrix_is_limit_of_model() {
        let alphabet = PhaseAlphabet::from_mean_photons(8, 0.16).unwrap();
        let a = predicted_cost_matrix(&alphabet, &ChannelModel::ideal()).unwrap();
        let b = ideal_cost_matrix(&alphabet).unwrap();
        for (x, y) in a.entries().iter().zip(b.entries()) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-12);
        }
    }

    #[test]
    fn dark_fraction_values() {
        let m = ChannelModel::default();
        assert_abs_diff_eq!(dark_fraction(&m, 1e6).unwrap(), 3.2e-5, epsilon = 1e-18);
        let no_dark = ChannelModel { dark_cps: 0.0, ..m.clone() };
        assert_eq!(dark_fraction(&no_dark, 1e6).unwrap(), 0.0);
        let long_gate = ChannelModel { gate_s: 4e-9, ..m.clone() };
        assert_abs_diff_eq!(dark_fraction(&long_gate, 1e6).unwrap(), 6.4e-5, epsilon = 1e-18);
        assert!(dark_fraction(&m, 0.0).is_err());
    }

    #[test]
    fn visibility_null_rate() {
        assert_eq!(null_rate_from_visibility(1e6, 1.0).unwrap(), 0.0);
        assert_abs_diff_eq!(null_rate_from_visibility(1e6, 0.98).unwrap(), 1.0101e4, epsilon = 0.1);
        assert_eq!(null_rate_from_visibility(1e6, 0.0).unwrap(), 1e6);
        assert!(null_rate_from_visibility(1e6, 1.1).is_err());
    }

    #[test]
    fn tamper_factors() {
        let m = ChannelModel::default();
        let r0 = dishonest_alice_null_rate(&m, 0.16, 0.0, 2.0 / 16.0).unwrap();
        assert_abs_diff_eq!(r0.factor_over_honest.unwrap(), 1.0, epsilon = 1e-12);
        let f: Vec<f64> = [FRAC_PI_4, FRAC_PI_2, PI]
            .iter()
            .map(|&d| {
                dishonest_alice_null_rate(&m, 0.16, d, 2.0 / 16.0)
                    .unwrap()
                    .factor_over_honest
                    .unwrap()
            })
            .collect();
        assert!(f[0] > 1.0 && f[0] < f[1] && f[1] < f[2], "{f:?}");
    }

    #[test]
    fn tamper_zero_floor_is_flagged() {
        let m = ChannelModel::ideal();
        let r = dishonest_alice_null_rate(&m, 0.16, PI, 1.0).unwrap();
        assert!(r.rate_cps > 0.0);
        assert_eq!(r.honest_rate_cps, 0.0);
        assert!(r.factor_over_honest.is_none());
        assert!(dishonest_alice_null_rate(&m, 0.16, PI, 1.5).is_err());
    }

    #[test]
    fn multiport_intensities_match_amplitudes_at_unit_visibility() {
        use crate::coherent::multiport_map;
        let a = ComplexAmplitude::new(0.3, -0.1);
        let b = ComplexAmplitude::new(-0.2, 0.25);
        let exact: PortProbabilities = multiport_map(a, b).into();
        let model = multiport_mean_photons(a, b, 1.0);
        assert_abs_diff_eq!(exact.bob_null, model.bob_null, epsilon = 1e-15);
        assert_abs_diff_eq!(exact.bob_signal, model.bob_signal, epsilon = 1e-15);
        assert_abs_diff_eq!(exact.charlie_null, model.charlie_null, epsilon = 1e-15);
        assert_abs_diff_eq!(exact.charlie_signal, model.charlie_signal, epsilon = 1e-15);
    }

    #[test]
    fn verification_reduces_to_cost_formula() {
        let m = ChannelModel {
            calibration: 40.0,
            ..ChannelModel::default()
        };
        let alphabet = PhaseAlphabet::from_mean_photons(8, 0.16).unwrap();
        for phi in 0..8 {
            for theta in 0..8 {
                let p = m.verification_click_probability(
                    alphabet.state(theta),
                    alphabet.state(phi),
                    Receiver::Charlie,
                );
                let q = signal_null_click_probability(alphabet.phase(phi), alphabet.phase(theta), 0.16, &m)
                    .unwrap();
                assert_abs_diff_eq!(p, q, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn validation_rejects_bad_fields() {
        for bad in [
            ChannelModel { visibility: 1.2, ..Default::default() },
            ChannelModel { det_efficiency: -0.1, ..Default::default() },
            ChannelModel { clock_hz: 0.0, ..Default::default() },
            ChannelModel { multiport_loss_db: -1.0, ..Default::default() },
            ChannelModel { calibration: 0.0, ..Default::default() },
        ] {
            assert!(bad.validate().is_err());
        }
    }
}
