//! Minimum-cost measurement on a symmetric coherent alphabet.
//!
//! For circulant symmetric cost matrices the square-root measurement is
//! optimal; optimality is not assumed but certified numerically with the four
//! Helstrom conditions on the risk operators.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coherent::{gram_spectrum, PhaseAlphabet, SpectralDecomposition};
use crate::cost::CostMatrix;
use crate::error::{QdsError, Result};
use crate::linalg::{self, CMatrix, CVector};

/// Relative threshold below which Gram eigenvalues are treated as zero.
pub const PSEUDO_INVERSE_THRESHOLD: f64 = 1e-12;

/// Default tolerance for the Helstrom conditions.
pub const HELSTROM_TOLERANCE: f64 = 1e-9;

/// Amplitude gain available to an active forger who keeps both his own copy
/// and the half forwarded to him inside the multiport.
pub const AMPLIFICATION_FACTOR: f64 = 1.224_744_871_391_589; // sqrt(3/2)

#[derive(Clone, Debug)]
pub struct Povm {
    elements: Vec<CMatrix>,
}

impl Povm {
    pub fn new(elements: Vec<CMatrix>) -> Result<Self> {
        let dim = elements.first().map(|e| e.nrows()).unwrap_or(0);
        for e in &elements {
            if e.nrows() != dim || e.ncols() != dim {
                return Err(QdsError::DimensionMismatch {
                    expected: dim,
                    found: e.nrows().max(e.ncols()),
                });
            }
        }
        Ok(Self { elements })
    }

    pub fn n_outcomes(&self) -> usize {
        self.elements.len()
    }

    pub fn dim(&self) -> usize {
        self.elements.first().map(|e| e.nrows()).unwrap_or(0)
    }

    pub fn elements(&self) -> &[CMatrix] {
        &self.elements
    }

    pub fn sum(&self) -> CMatrix {
        let n = self.dim();
        self.elements.iter().fold(CMatrix::zeros(n, n), |acc, e| acc + e)
    }

    /// Smallest eigenvalue over all elements.
    pub fn min_eigenvalue(&self) -> f64 {
        self.elements
            .iter()
            .filter_map(|e| linalg::hermitian_eigenvalues(e).first().copied())
            .fold(f64::INFINITY, f64::min)
    }
}

/// `Π_i = Φ^{−1/2}|v_i⟩⟨v_i|Φ^{−1/2}`. In the standard basis
/// `Φ^{−1/2}|v_i⟩` is column `i` of the Fourier matrix restricted to the
/// support of `Φ`.
pub fn square_root_povm(spec: &SpectralDecomposition) -> Povm {
    let n = spec.dim();
    let root = spec.frame_inverse_sqrt(PSEUDO_INVERSE_THRESHOLD) * spec.state_matrix();
    let elements = (0..n)
        .map(|i| {
            let w: CVector = root.column(i).into_owned();
            linalg::outer(&w, &w)
        })
        .collect();
    Povm { elements }
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(QdsError::DimensionMismatch { expected, found })
    }
}

/// `W_i = (1/N) Σ_j C_{ij} |v_j⟩⟨v_j|`.
pub fn risk_operators(cost: &CostMatrix, spec: &SpectralDecomposition) -> Result<Vec<CMatrix>> {
    let n = spec.dim();
    check_dim(n, cost.n())?;
    let states = spec.state_matrix();
    let projectors: Vec<CMatrix> = (0..n)
        .map(|j| {
            let v: CVector = states.column(j).into_owned();
            linalg::outer(&v, &v)
        })
        .collect();
    Ok((0..n)
        .map(|i| {
            projectors
                .iter()
                .enumerate()
                .fold(CMatrix::zeros(n, n), |acc, (j, p)| acc + p.scale(cost.get(i, j)))
                .unscale(n as f64)
        })
        .collect())
}

/// `Tr(Π_φ |v_θ⟩⟨v_θ|)` for every outcome `φ`.
pub fn outcome_distribution(
    povm: &Povm,
    theta_index: usize,
    spec: &SpectralDecomposition,
) -> Result<Vec<f64>> {
    let n = spec.dim();
    check_dim(n, povm.dim())?;
    if theta_index >= n {
        return Err(QdsError::IndexOutOfRange {
            index: theta_index,
            len: n,
        });
    }
    let v: CVector = spec.state_matrix().column(theta_index).into_owned();
    Ok(povm
        .elements()
        .iter()
        .map(|p| v.dotc(&(p * &v)).re.max(0.0))
        .collect())
}

/// Full conditional table `P(φ | θ)`, indexed `[θ][φ]`.
pub fn outcome_table(povm: &Povm, spec: &SpectralDecomposition) -> Result<Vec<Vec<f64>>> {
    (0..spec.dim())
        .map(|theta| outcome_distribution(povm, theta, spec))
        .collect()
}

/// `(1/N) Σ_{φ,θ} Tr(Π_φ |v_θ⟩⟨v_θ|) c_{φ,θ}`.
pub fn expected_cost(povm: &Povm, cost: &CostMatrix, spec: &SpectralDecomposition) -> Result<f64> {
    let n = spec.dim();
    check_dim(n, cost.n())?;
    check_dim(n, povm.n_outcomes())?;
    let table = outcome_table(povm, spec)?;
    let mut total = 0.0;
    for (theta, row) in table.iter().enumerate() {
        for (phi, p) in row.iter().enumerate() {
            total += p * cost.get(phi, theta);
        }
    }
    Ok(total / n as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HelstromReport {
    /// `‖Σ Π_i W_i − Σ W_i Π_i‖`.
    pub criterion1_residual: f64,
    /// `‖Γ − Γ†‖`.
    pub criterion2_residual: f64,
    /// `max_i ‖Π_i (W_i − Γ)‖`.
    pub criterion3_residual: f64,
    /// Smallest eigenvalue of any `W_i − Γ`.
    pub criterion4_min_eigenvalue: f64,
    pub tolerance: f64,
    pub satisfied: bool,
}

/// Evaluates the four Helstrom optimality conditions for `povm`.
pub fn helstrom_verify(
    povm: &Povm,
    cost: &CostMatrix,
    spec: &SpectralDecomposition,
    tol: f64,
) -> Result<HelstromReport> {
    let n = spec.dim();
    check_dim(n, povm.n_outcomes())?;
    check_dim(n, povm.dim())?;
    let w = risk_operators(cost, spec)?;
    let mut gamma = CMatrix::zeros(n, n);
    let mut gamma_right = CMatrix::zeros(n, n);
    for (p, wi) in povm.elements().iter().zip(&w) {
        gamma += p * wi;
        gamma_right += wi * p;
    }
    let criterion1_residual = linalg::spectral_norm(&(&gamma - &gamma_right));
    let criterion2_residual = linalg::hermiticity_residual(&gamma);
    let mut criterion3_residual: f64 = 0.0;
    let mut criterion4_min_eigenvalue = f64::INFINITY;
    for (p, wi) in povm.elements().iter().zip(&w) {
        let diff = wi - &gamma;
        criterion3_residual = criterion3_residual.max(linalg::spectral_norm(&(p * &diff)));
        if let Some(&min) = linalg::hermitian_eigenvalues(&diff).first() {
            criterion4_min_eigenvalue = criterion4_min_eigenvalue.min(min);
        }
    }
    let satisfied = criterion1_residual < tol
        && criterion2_residual < tol
        && criterion3_residual < tol
        && criterion4_min_eigenvalue > -tol;
    Ok(HelstromReport {
        criterion1_residual,
        criterion2_residual,
        criterion3_residual,
        criterion4_min_eigenvalue,
        tolerance: tol,
        satisfied,
    })
}

/// Closest circulant symmetric matrices below and above `cost`: every entry is
/// replaced by the minimum (maximum) over its orbit `{(i, j) : (j − i) mod N ∈ {d, N − d}}`.
pub fn bounding_circulant_matrices(cost: &CostMatrix) -> Result<(CostMatrix, CostMatrix)> {
    let n = cost.n();
    let mut lo = vec![f64::INFINITY; n];
    let mut hi = vec![f64::NEG_INFINITY; n];
    for phi in 0..n {
        for theta in 0..n {
            let d = (theta + n - phi) % n;
            let orbit = d.min(n - d);
            let v = cost.get(phi, theta);
            lo[orbit] = lo[orbit].min(v);
            hi[orbit] = hi[orbit].max(v);
        }
    }
    let lower: Vec<f64> = (0..n).map(|d| lo[d.min(n - d)]).collect();
    let upper: Vec<f64> = (0..n).map(|d| hi[d.min(n - d)]).collect();
    Ok((CostMatrix::circulant(&lower)?, CostMatrix::circulant(&upper)?))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundSource {
    /// Computed from the cost matrix with the orbit rule.
    Derived,
    /// Supplied alongside the cost matrix.
    Published,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundingPair {
    pub lower: CostMatrix,
    pub upper: CostMatrix,
    pub source: BoundSource,
}

impl BoundingPair {
    pub fn derived(cost: &CostMatrix) -> Result<Self> {
        let (lower, upper) = bounding_circulant_matrices(cost)?;
        Ok(Self {
            lower,
            upper,
            source: BoundSource::Derived,
        })
    }

    pub fn published(lower_row: &[f64], upper_row: &[f64]) -> Result<Self> {
        if lower_row.len() != upper_row.len() {
            return Err(QdsError::DimensionMismatch {
                expected: lower_row.len(),
                found: upper_row.len(),
            });
        }
        let lower = CostMatrix::circulant(lower_row)?;
        let upper = CostMatrix::circulant(upper_row)?;
        for m in [&lower, &upper] {
            if !m.is_circulant_symmetric(0.0) {
                return Err(QdsError::MalformedCostMatrix(
                    "bounding rows must satisfy row[d] = row[N - d]".into(),
                ));
            }
        }
        Ok(Self {
            lower,
            upper,
            source: BoundSource::Published,
        })
    }

    /// Entries where `lower ≤ cost ≤ upper` fails, as `(φ, θ)` pairs.
    pub fn dominance_violations(&self, cost: &CostMatrix) -> Vec<(usize, usize)> {
        let n = cost.n();
        let mut out = Vec::new();
        for phi in 0..n {
            for theta in 0..n {
                let c = cost.get(phi, theta);
                if self.lower.get(phi, theta) > c || self.upper.get(phi, theta) < c {
                    out.push((phi, theta));
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ForgingAnalysis {
    pub p_forgery_lower: f64,
    pub p_forgery_upper: f64,
    /// Square-root measurement cost against the raw (non-circulant) matrix.
    pub p_forgery_raw: f64,
    pub cost_matrix_lower: CostMatrix,
    pub cost_matrix_upper: CostMatrix,
    pub bounds_source: BoundSource,
    /// Largest diagonal element of the raw matrix (worst case).
    pub p_original: f64,
    pub p_original_mean: f64,
    pub g_lower: f64,
    pub g_upper: f64,
    pub amplified: bool,
    /// Mean photon number of the states the forger measures.
    pub measured_mean_photons: f64,
    pub helstrom_lower: HelstromReport,
    pub helstrom_upper: HelstromReport,
    /// Both bounding costs are certified optimal by the Helstrom conditions.
    pub certified: bool,
}

/// Forging analysis with bounding matrices derived from `cost`.
pub fn passive_forgery_analysis(
    cost: &CostMatrix,
    alphabet: &PhaseAlphabet,
    amplified: bool,
) -> Result<ForgingAnalysis> {
    let bounds = BoundingPair::derived(cost)?;
    passive_forgery_analysis_with_bounds(cost, &bounds, alphabet, amplified)
}

pub fn passive_forgery_analysis_with_bounds(
    cost: &CostMatrix,
    bounds: &BoundingPair,
    alphabet: &PhaseAlphabet,
    amplified: bool,
) -> Result<ForgingAnalysis> {
    check_dim(alphabet.n_phases(), cost.n())?;
    check_dim(cost.n(), bounds.lower.n())?;
    check_dim(cost.n(), bounds.upper.n())?;
    let measured = if amplified {
        alphabet.scaled(AMPLIFICATION_FACTOR)?
    } else {
        *alphabet
    };
    let spec = gram_spectrum(&measured)?;
    let povm = square_root_povm(&spec);
    let p_forgery_lower = expected_cost(&povm, &bounds.lower, &spec)?;
    let p_forgery_upper = expected_cost(&povm, &bounds.upper, &spec)?;
    let p_forgery_raw = expected_cost(&povm, cost, &spec)?;
    let helstrom_lower = helstrom_verify(&povm, &bounds.lower, &spec, HELSTROM_TOLERANCE)?;
    let helstrom_upper = helstrom_verify(&povm, &bounds.upper, &spec, HELSTROM_TOLERANCE)?;
    let p_original = cost.max_diagonal();
    Ok(ForgingAnalysis {
        p_forgery_lower,
        p_forgery_upper,
        p_forgery_raw,
        cost_matrix_lower: bounds.lower.clone(),
        cost_matrix_upper: bounds.upper.clone(),
        bounds_source: bounds.source,
        p_original,
        p_original_mean: cost.mean_diagonal(),
        g_lower: p_forgery_lower - p_original,
        g_upper: p_forgery_upper - p_original,
        amplified,
        measured_mean_photons: measured.mean_photons(),
        helstrom_lower,
        helstrom_upper,
        certified: helstrom_lower.satisfied && helstrom_upper.satisfied,
    })
}

/// `A ∘ B` with `B_{lm} = ĉ_{(m − l) mod N}`, `ĉ` the forward DFT of `c`.
/// Equal to `Σ_i c_i U^i A U^{−i}`.
pub fn shift_weighted_sum(a: &CMatrix, weights: &[f64]) -> CMatrix {
    let n = a.nrows();
    let c: Vec<Complex64> = weights.iter().map(|&w| Complex64::new(w, 0.0)).collect();
    let hat = linalg::dft(&c);
    CMatrix::from_fn(n, n, |l, m| a[(l, m)] * hat[(m + n - l) % n])
}
