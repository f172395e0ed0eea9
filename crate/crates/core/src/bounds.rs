//! Analytic security quantities: thresholds, Hoeffding-type failure bounds and
//! the supporting information-theoretic checks.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::coherent::{gram_spectrum, signature_element_density, von_neumann_entropy, PhaseAlphabet};
use crate::error::{invalid, Result};

/// Multiport asymmetry base for ideal devices.
pub const REPUDIATION_BASE_IDEAL: f64 = 0.5;
/// Worst case for the measured differential loss.
pub const REPUDIATION_BASE_DIFFERENTIAL_LOSS: f64 = 0.8;
/// A thousand-fold different loss in the two multiport arms.
pub const REPUDIATION_BASE_THOUSANDFOLD: f64 = 1000.0 / 1001.0;

/// A bound value together with its clamped, reportable form.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundValue {
    pub raw: f64,
    /// The raw value exceeds 1 (or a precondition makes the bound meaningless).
    pub vacuous: bool,
}

impl BoundValue {
    pub fn new(raw: f64) -> Self {
        Self {
            raw,
            vacuous: raw >= 1.0 || raw.is_nan(),
        }
    }

    fn vacuous(raw: f64) -> Self {
        Self { raw, vacuous: true }
    }

    /// `min(raw, 1)`.
    pub fn reported(&self) -> f64 {
        self.raw.min(1.0)
    }
}

fn check_gap(g: f64) -> Result<()> {
    if g.is_finite() && g > 0.0 {
        Ok(())
    } else {
        Err(invalid("g", format!("gap {g} must be > 0")))
    }
}

fn check_length(length: f64) -> Result<()> {
    if length.is_finite() && length >= 0.0 {
        Ok(())
    } else {
        Err(invalid("L", format!("{length} must be ≥ 0")))
    }
}

/// `s_a = p + g/3`, `s_v = p + 2g/3`.
pub fn thresholds(p_original: f64, g: f64) -> Result<(f64, f64)> {
    check_gap(g)?;
    if !(p_original >= 0.0 && p_original + g < 1.0) {
        return Err(invalid(
            "p_original",
            format!("need 0 ≤ p_original and p_original + g < 1, got {p_original} + {g}"),
        ));
    }
    Ok((p_original + g / 3.0, p_original + 2.0 * g / 3.0))
}

/// `2 exp(−(2/9) g² L)`.
pub fn forging_bound(g: f64, length: f64) -> Result<BoundValue> {
    check_gap(g)?;
    check_length(length)?;
    Ok(BoundValue::new(2.0 * (-2.0 / 9.0 * g * g * length).exp()))
}

/// `exp(−(2/9) g² L) + exp(−(4/9) g² L)`.
pub fn robustness_bound(g: f64, length: f64) -> Result<BoundValue> {
    check_gap(g)?;
    check_length(length)?;
    let x = g * g * length;
    Ok(BoundValue::new((-2.0 / 9.0 * x).exp() + (-4.0 / 9.0 * x).exp()))
}

/// Signature length at which the forging bound reaches 1: `9 ln 2 / (2 g²)`.
pub fn nontrivial_length(g: f64) -> Result<f64> {
    check_gap(g)?;
    Ok(9.0 * LN_2 / (2.0 * g * g))
}

/// `d^{(s_v − s_a) L}`; vacuous for `d ≥ 1`.
pub fn repudiation_bound(d: f64, gap_fraction: f64, length: f64) -> Result<BoundValue> {
    if !(d.is_finite() && d >= 0.0) {
        return Err(invalid("d", format!("{d} must be ≥ 0")));
    }
    if !(gap_fraction.is_finite() && gap_fraction > 0.0) {
        return Err(invalid("gap_fraction", format!("{gap_fraction} must be > 0")));
    }
    check_length(length)?;
    if d >= 1.0 {
        return Ok(BoundValue::vacuous(1.0));
    }
    Ok(BoundValue::new(d.powf(gap_fraction * length)))
}

/// Trace-distance budget of an active attack that passes the multiport check
/// with rejection threshold `r` and Hoeffding slack `ε`:
/// `δ = (1 − 2e^{−2ε²L}) √(r + ε) + 2e^{−2ε²L}`.
pub fn active_delta(r: f64, eps: f64, length: f64) -> Result<f64> {
    if !(r.is_finite() && r >= 0.0) {
        return Err(invalid("r", format!("{r} must be ≥ 0")));
    }
    if !(eps.is_finite() && eps > 0.0) {
        return Err(invalid("eps", format!("{eps} must be > 0")));
    }
    if r + eps > 1.0 {
        return Err(invalid("r + eps", format!("{} exceeds 1", r + eps)));
    }
    check_length(length)?;
    let tail = (2.0 * (-2.0 * eps * eps * length).exp()).min(1.0);
    Ok((1.0 - tail) * (r + eps).sqrt() + tail)
}

/// Forging and robustness bounds for an active forger whose gap is degraded
/// by `δ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ActiveBounds {
    pub effective_gap: f64,
    pub forging: BoundValue,
    pub robustness: BoundValue,
}

/// `2 exp(−(2/9)(g_amp − δ)² L)` and its robustness companion; both are
/// flagged vacuous when `δ ≥ g_amp`.
pub fn active_forging_bound(g_amplified: f64, delta: f64, length: f64) -> Result<ActiveBounds> {
    check_length(length)?;
    if !(delta.is_finite() && delta >= 0.0) {
        return Err(invalid("delta", format!("{delta} must be ≥ 0")));
    }
    if !g_amplified.is_finite() {
        return Err(invalid("g_amplified", "must be finite"));
    }
    let effective_gap = g_amplified - delta;
    if effective_gap <= 0.0 {
        return Ok(ActiveBounds {
            effective_gap,
            forging: BoundValue::vacuous(2.0),
            robustness: BoundValue::vacuous(2.0),
        });
    }
    Ok(ActiveBounds {
        effective_gap,
        forging: forging_bound(effective_gap, length)?,
        robustness: robustness_bound(effective_gap, length)?,
    })
}

/// `exp(−2 r² L)`: an honest run trips the multiport rejection threshold.
pub fn multiport_robustness_bound(r: f64, length: f64) -> Result<BoundValue> {
    if !(r.is_finite() && r > 0.0) {
        return Err(invalid("r", format!("{r} must be > 0")));
    }
    check_length(length)?;
    Ok(BoundValue::new((-2.0 * r * r * length).exp()))
}

/// `√(1 − F)`.
pub fn trace_distance_from_fidelity(expected_fidelity: f64) -> Result<f64> {
    if !(expected_fidelity.is_finite() && (0.0..=1.0).contains(&expected_fidelity)) {
        return Err(invalid("fidelity", format!("{expected_fidelity} must lie in [0, 1]")));
    }
    Ok((1.0 - expected_fidelity).sqrt())
}

/// `2 exp(−2 t² L)`.
pub fn hoeffding_tail(t: f64, length: f64) -> BoundValue {
    BoundValue::new(2.0 * (-2.0 * t * t * length).exp())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InfoBalance {
    pub key_bits: f64,
    pub accessible_bits: f64,
    pub ratio: f64,
    /// Accessible information is at least half the key length.
    pub flagged: bool,
}

/// Private-key bits `L log₂ N` against the Holevo-limited information
/// `L T S(ρ)` available to `T` receivers.
pub fn info_balance(alphabet: &PhaseAlphabet, receivers: u32, length: f64) -> Result<InfoBalance> {
    if receivers < 1 {
        return Err(invalid("T", "need at least one receiver"));
    }
    check_length(length)?;
    let s = von_neumann_entropy(&signature_element_density(alphabet)?);
    let key_bits = length * (alphabet.n_phases() as f64).log2();
    let accessible_bits = length * receivers as f64 * s;
    let ratio = if key_bits > 0.0 { accessible_bits / key_bits } else { 0.0 };
    Ok(InfoBalance {
        key_bits,
        accessible_bits,
        ratio,
        flagged: ratio >= 0.5,
    })
}

/// Optimal unambiguous-discrimination success probability for the symmetric
/// alphabet, `N · min_k λ_k`.
pub fn usd_probability(alphabet: &PhaseAlphabet) -> Result<f64> {
    let spec = gram_spectrum(alphabet)?;
    Ok((spec.dim() as f64 * spec.min_eigenvalue()).clamp(0.0, 1.0))
}

/// Inputs that fix a security report apart from the signature length.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SecurityParameters {
    pub p_original: f64,
    pub p_forgery: f64,
    pub p_forgery_amplified: f64,
    pub rejection_threshold: f64,
    /// Hoeffding slack for `δ`; `None` uses `r/2`.
    pub hoeffding_slack: Option<f64>,
    pub repudiation_base: f64,
    pub receivers: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SecurityReport {
    pub signature_length: f64,
    pub p_original: f64,
    pub p_forgery: f64,
    pub g: f64,
    pub s_a: f64,
    pub s_v: f64,
    pub p_forgery_amplified: f64,
    pub g_amplified: f64,
    pub delta: f64,
    pub rejection_threshold: f64,
    pub hoeffding_slack: f64,
    pub repudiation_base: f64,
    pub nontrivial_length: f64,
    pub eps_forging: BoundValue,
    pub eps_repudiation: BoundValue,
    pub eps_robustness: BoundValue,
    pub eps_robustness_multiport: BoundValue,
    pub eps_active_forging: BoundValue,
    pub eps_active_robustness: BoundValue,
    pub entropy_per_copy: f64,
    pub info_ratio: f64,
    pub usd_probability: f64,
}

impl SecurityReport {
    pub fn build(alphabet: &PhaseAlphabet, params: &SecurityParameters, length: f64) -> Result<Self> {
        let g = params.p_forgery - params.p_original;
        let (s_a, s_v) = thresholds(params.p_original, g)?;
        let g_amplified = params.p_forgery_amplified - params.p_original;
        let r = params.rejection_threshold;
        let eps = params.hoeffding_slack.unwrap_or(r / 2.0);
        let delta = active_delta(r, eps, length)?;
        let active = active_forging_bound(g_amplified, delta, length)?;
        let rho = signature_element_density(alphabet)?;
        let info = info_balance(alphabet, params.receivers, length.max(1.0))?;
        Ok(Self {
            signature_length: length,
            p_original: params.p_original,
            p_forgery: params.p_forgery,
            g,
            s_a,
            s_v,
            p_forgery_amplified: params.p_forgery_amplified,
            g_amplified,
            delta,
            rejection_threshold: r,
            hoeffding_slack: eps,
            repudiation_base: params.repudiation_base,
            nontrivial_length: nontrivial_length(g)?,
            eps_forging: forging_bound(g, length)?,
            eps_repudiation: repudiation_bound(params.repudiation_base, s_v - s_a, length)?,
            eps_robustness: robustness_bound(g, length)?,
            eps_robustness_multiport: multiport_robustness_bound(r, length)?,
            eps_active_forging: active.forging,
            eps_active_robustness: active.robustness,
            entropy_per_copy: von_neumann_entropy(&rho),
            info_ratio: info.ratio,
            usd_probability: usd_probability(alphabet)?,
        })
    }

    pub const CSV_HEADER: [&'static str; 22] = [
        "signature_length",
        "p_original",
        "p_forgery",
        "g",
        "s_a",
        "s_v",
        "p_forgery_amplified",
        "g_amplified",
        "delta",
        "rejection_threshold",
        "hoeffding_slack",
        "repudiation_base",
        "nontrivial_length",
        "eps_forging",
        "eps_repudiation",
        "eps_robustness",
        "eps_robustness_multiport",
        "eps_active_forging",
        "eps_active_robustness",
        "entropy_per_copy",
        "info_ratio",
        "usd_probability",
    ];

    /// Flat row matching [`Self::CSV_HEADER`]; bound columns carry reported values.
    pub fn csv_row(&self) -> Vec<String> {
        [
            self.signature_length,
            self.p_original,
            self.p_forgery,
            self.g,
            self.s_a,
            self.s_v,
            self.p_forgery_amplified,
            self.g_amplified,
            self.delta,
            self.rejection_threshold,
            self.hoeffding_slack,
            self.repudiation_base,
            self.nontrivial_length,
            self.eps_forging.reported(),
            self.eps_repudiation.reported(),
            self.eps_robustness.reported(),
            self.eps_robustness_multiport.reported(),
            self.eps_active_forging.reported(),
            self.eps_active_robustness.reported(),
            self.entropy_per_copy,
            self.info_ratio,
            self.usd_probability,
        ]
        .iter()
        .map(|v| format!("{v:e}"))
        .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub signature_length: f64,
    pub eps_forging: f64,
    pub eps_repudiation: f64,
    pub eps_robustness: f64,
    pub eps_active: f64,
}

impl SweepRow {
    pub const CSV_HEADER: [&'static str; 5] =
        ["L", "eps_forging", "eps_repudiation", "eps_robustness", "eps_active"];

    pub fn csv_row(&self) -> Vec<String> {
        [
            self.signature_length,
            self.eps_forging,
            self.eps_repudiation,
            self.eps_robustness,
            self.eps_active,
        ]
        .iter()
        .map(|v| format!("{v:e}"))
        .collect()
    }
}

/// Reported bound values over a grid of signature lengths.
pub fn length_sweep(
    alphabet: &PhaseAlphabet,
    params: &SecurityParameters,
    lengths: &[f64],
) -> Result<Vec<SweepRow>> {
    lengths
        .iter()
        .map(|&l| {
            let r = SecurityReport::build(alphabet, params, l)?;
            Ok(SweepRow {
                signature_length: l,
                eps_forging: r.eps_forging.reported(),
                eps_repudiation: r.eps_repudiation.reported(),
                eps_robustness: r.eps_robustness.reported(),
                eps_active: r.eps_active_forging.reported(),
            })
        })
        .collect()
}

/// `count` lengths spaced evenly in `log10` between `start` and `stop`.
pub fn log_grid(start: f64, stop: f64, count: usize) -> Result<Vec<f64>> {
    if !(start > 0.0 && stop >= start && count >= 1) {
        return Err(invalid("grid", format!("need 0 < {start} ≤ {stop} and count ≥ 1")));
    }
    if count == 1 {
        return Ok(vec![start]);
    }
    let (a, b) = (start.log10(), stop.log10());
    Ok((0..count)
        .map(|i| 10f64.powf(a + (b - a) * i as f64 / (count - 1) as f64))
        .collect())
}
