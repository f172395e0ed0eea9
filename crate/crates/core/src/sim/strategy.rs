//! Party behaviours available to the simulator.

use serde::{Deserialize, Serialize};

use crate::channel::Receiver;
use crate::coherent::{ComplexAmplitude, PhaseAlphabet};
use crate::error::{invalid, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AliceStrategy {
    #[default]
    Honest,
    /// Adds `delta_phi` to Charlie's copy on an evenly spread `fraction` of pulses.
    PhaseTamper { delta_phi: f64, fraction: f64 },
    /// Sends each receiver the key phase shifted by its own offset.
    TwoStateRepudiator { bob_offset: f64, charlie_offset: f64 },
    /// Sends vacuum to one receiver.
    BlockedInput { receiver: Receiver },
}

impl AliceStrategy {
    pub fn validate(&self) -> Result<()> {
        match *self {
            AliceStrategy::PhaseTamper { delta_phi, fraction } => {
                if !delta_phi.is_finite() {
                    return Err(invalid("delta_phi", "must be finite"));
                }
                if !(fraction.is_finite() && (0.0..=1.0).contains(&fraction)) {
                    return Err(invalid("fraction", format!("{fraction} must lie in [0, 1]")));
                }
            }
            AliceStrategy::TwoStateRepudiator {
                bob_offset,
                charlie_offset,
            } => {
                if !(bob_offset.is_finite() && charlie_offset.is_finite()) {
                    return Err(invalid("offset", "must be finite"));
                }
            }
            AliceStrategy::Honest | AliceStrategy::BlockedInput { .. } => {}
        }
        Ok(())
    }

    pub fn is_honest(&self) -> bool {
        matches!(self, AliceStrategy::Honest)
    }

    /// Amplitudes Alice sends to `(Bob, Charlie)` for pulse `pulse` with key index `key`.
    pub fn inputs(
        &self,
        alphabet: &PhaseAlphabet,
        pulse: usize,
        key: usize,
    ) -> (ComplexAmplitude, ComplexAmplitude) {
        let honest = alphabet.state(key);
        match *self {
            AliceStrategy::Honest => (honest, honest),
            AliceStrategy::PhaseTamper { delta_phi, fraction } => {
                if is_tampered(pulse, fraction) {
                    (honest, honest.rotate(delta_phi))
                } else {
                    (honest, honest)
                }
            }
            AliceStrategy::TwoStateRepudiator {
                bob_offset,
                charlie_offset,
            } => (honest.rotate(bob_offset), honest.rotate(charlie_offset)),
            AliceStrategy::BlockedInput { receiver } => match receiver {
                Receiver::Bob => (ComplexAmplitude::VACUUM, honest),
                Receiver::Charlie => (honest, ComplexAmplitude::VACUUM),
            },
        }
    }
}

/// Pulse `k` is tampered when `⌊(k+1) f⌋ > ⌊k f⌋`, which spreads exactly
/// `⌊L f⌋` tampered pulses evenly over the first `L`.
pub fn is_tampered(pulse: usize, fraction: f64) -> bool {
    let k = pulse as f64;
    ((k + 1.0) * fraction).floor() > (k * fraction).floor()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BobStrategy {
    #[default]
    Honest,
    /// Measures his stored copy with the square-root measurement and declares
    /// the outcomes to Charlie.
    PassiveForger,
    /// Keeps his whole copy plus the half forwarded by Charlie (amplitude
    /// `√(3/2)·α`), measures it, and forwards to Charlie a coherent state of
    /// amplitude `amplitude_scale · α/√2` at the measured phase.
    ActiveForger { amplitude_scale: f64 },
}

impl BobStrategy {
    pub fn validate(&self) -> Result<()> {
        if let BobStrategy::ActiveForger { amplitude_scale } = *self {
            if !(amplitude_scale.is_finite() && amplitude_scale >= 0.0) {
                return Err(invalid("amplitude_scale", format!("{amplitude_scale} must be ≥ 0")));
            }
        }
        Ok(())
    }

    pub fn is_forger(&self) -> bool {
        !matches!(self, BobStrategy::Honest)
    }
}
