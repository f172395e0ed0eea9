//! Symmetric coherent-state alphabets and the linear algebra on their span.
//!
//! The `N` states `|α e^{2πik/N}⟩` span an `N`-dimensional space. All exact
//! computations happen in the orthonormal "standard basis" of that span,
//! in which the phase-shift symmetry `U` and the frame operator
//! `Φ = Σ_k |v_k⟩⟨v_k|` are both diagonal.

use std::f64::consts::{SQRT_2, TAU};
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, QdsError, Result};
use crate::linalg::{self, CMatrix, CVector};

/// Round-off band below zero inside which Gram eigenvalues are clamped.
pub const EIGENVALUE_CLAMP: f64 = 1e-12;

/// Tolerance used when validating density matrices.
pub const DENSITY_TOLERANCE: f64 = 1e-10;

/// Complex field amplitude of a coherent state; `|α|²` is the mean photon
/// number per pulse.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ComplexAmplitude {
    pub re: f64,
    pub im: f64,
}

impl ComplexAmplitude {
    pub const VACUUM: Self = Self { re: 0.0, im: 0.0 };

    pub fn new(re: f64, im: f64) -> Self {
        Self { re, im }
    }

    pub fn real(re: f64) -> Self {
        Self { re, im: 0.0 }
    }

    pub fn from_polar(magnitude: f64, phase: f64) -> Self {
        Complex64::from_polar(magnitude, phase).into()
    }

    pub fn value(self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }

    pub fn mean_photons(self) -> f64 {
        self.re * self.re + self.im * self.im
    }

    pub fn magnitude(self) -> f64 {
        self.value().norm()
    }

    pub fn phase(self) -> f64 {
        self.im.atan2(self.re)
    }

    pub fn conj(self) -> Self {
        Self::new(self.re, -self.im)
    }

    pub fn rotate(self, phase: f64) -> Self {
        (self.value() * Complex64::from_polar(1.0, phase)).into()
    }

    pub fn is_finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

impl From<Complex64> for ComplexAmplitude {
    fn from(c: Complex64) -> Self {
        Self::new(c.re, c.im)
    }
}

impl Add for ComplexAmplitude {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.re + rhs.re, self.im + rhs.im)
    }
}

impl Sub for ComplexAmplitude {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.re - rhs.re, self.im - rhs.im)
    }
}

impl Neg for ComplexAmplitude {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.re, -self.im)
    }
}

impl Mul<f64> for ComplexAmplitude {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        Self::new(self.re * rhs, self.im * rhs)
    }
}

/// `⟨a|b⟩ = exp(-(|a|² + |b|²)/2 + ā b)`.
pub fn overlap(a: ComplexAmplitude, b: ComplexAmplitude) -> Complex64 {
    let exponent = -0.5 * (a.mean_photons() + b.mean_photons()) + a.value().conj() * b.value();
    exponent.exp()
}

/// 50:50 beamsplitter acting on coherent inputs; returns `(null, signal)` =
/// `((a − b)/√2, (a + b)/√2)`.
pub fn beamsplitter_mix(
    a: ComplexAmplitude,
    b: ComplexAmplitude,
) -> (ComplexAmplitude, ComplexAmplitude) {
    ((a - b) * (1.0 / SQRT_2), (a + b) * (1.0 / SQRT_2))
}

/// Output amplitudes of the two-receiver comparison multiport.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiportOutputs {
    pub bob_null: ComplexAmplitude,
    pub bob_signal: ComplexAmplitude,
    pub charlie_null: ComplexAmplitude,
    pub charlie_signal: ComplexAmplitude,
}

impl MultiportOutputs {
    pub fn total_mean_photons(&self) -> f64 {
        self.bob_null.mean_photons()
            + self.bob_signal.mean_photons()
            + self.charlie_null.mean_photons()
            + self.charlie_signal.mean_photons()
    }
}

/// Each receiver splits his copy 50:50, keeps one half and forwards the other;
/// the kept half is then mixed with the half received from the other side.
pub fn multiport_map(
    alice_to_bob: ComplexAmplitude,
    alice_to_charlie: ComplexAmplitude,
) -> MultiportOutputs {
    let (bob_forward, bob_keep) = split_half(alice_to_bob);
    let (charlie_forward, charlie_keep) = split_half(alice_to_charlie);
    let (charlie_null, charlie_signal) = beamsplitter_mix(bob_forward, charlie_keep);
    let (bob_null, bob_signal) = beamsplitter_mix(charlie_forward, bob_keep);
    MultiportOutputs {
        bob_null,
        bob_signal,
        charlie_null,
        charlie_signal,
    }
}

fn split_half(a: ComplexAmplitude) -> (ComplexAmplitude, ComplexAmplitude) {
    let half = a * (1.0 / SQRT_2);
    (half, half)
}

/// The alphabet `{|α e^{2πp/N}⟩ : p = 0..N-1}` with real amplitude `α ≥ 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseAlphabet {
    n_phases: usize,
    amplitude: f64,
}

impl PhaseAlphabet {
    pub fn new(n_phases: usize, amplitude: f64) -> Result<Self> {
        if n_phases < 2 {
            return Err(QdsError::TooFewPhases(n_phases));
        }
        if !(amplitude.is_finite() && amplitude >= 0.0) {
            return Err(invalid("amplitude", format!("{amplitude} must be finite and ≥ 0")));
        }
        Ok(Self {
            n_phases,
            amplitude,
        })
    }

    pub fn from_mean_photons(n_phases: usize, mean_photons: f64) -> Result<Self> {
        if !(mean_photons.is_finite() && mean_photons >= 0.0) {
            return Err(invalid("mean_photons", format!("{mean_photons} must be finite and ≥ 0")));
        }
        Self::new(n_phases, mean_photons.sqrt())
    }

    pub fn n_phases(&self) -> usize {
        self.n_phases
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn mean_photons(&self) -> f64 {
        self.amplitude * self.amplitude
    }

    /// Same phases, amplitude multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.n_phases, self.amplitude * factor)
    }

    pub fn phase(&self, index: usize) -> f64 {
        TAU * (index % self.n_phases) as f64 / self.n_phases as f64
    }

    pub fn phases(&self) -> Vec<f64> {
        (0..self.n_phases).map(|p| self.phase(p)).collect()
    }

    pub fn state(&self, index: usize) -> ComplexAmplitude {
        ComplexAmplitude::from_polar(self.amplitude, self.phase(index))
    }
}

/// Spectrum of the (circulant) Gram matrix together with the unitary Fourier
/// matrix linking alphabet coordinates to the standard basis.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    basis_change: CMatrix,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `λ_0 … λ_{N-1}`, the diagonal of `Φ` in the standard basis.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Unitary `F_{lk} = exp(2πi kl/N)/√N`; `|v_k⟩ = diag(√λ) F e_k`.
    pub fn basis_change(&self) -> &CMatrix {
        &self.basis_change
    }

    /// Columns are the standard-basis coordinates of `|v_0⟩ … |v_{N-1}⟩`.
    pub fn state_matrix(&self) -> CMatrix {
        let n = self.dim();
        CMatrix::from_fn(n, n, |l, k| {
            self.basis_change[(l, k)] * Complex64::new(self.eigenvalues[l].sqrt(), 0.0)
        })
    }

    /// `Φ = Σ_k |v_k⟩⟨v_k| = diag(λ)`.
    pub fn frame_operator(&self) -> CMatrix {
        diag_real(&self.eigenvalues)
    }

    /// Pseudo-inverse square root of `Φ`; eigenvalues below
    /// `threshold · max λ` are treated as zero.
    pub fn frame_inverse_sqrt(&self, relative_threshold: f64) -> CMatrix {
        let cutoff = relative_threshold * self.max_eigenvalue();
        let d: Vec<f64> = self
            .eigenvalues
            .iter()
            .map(|&l| if l > cutoff { 1.0 / l.sqrt() } else { 0.0 })
            .collect();
        diag_real(&d)
    }

    /// Projector onto the support of `Φ` at the same threshold.
    pub fn support_projector(&self, relative_threshold: f64) -> CMatrix {
        let cutoff = relative_threshold * self.max_eigenvalue();
        let d: Vec<f64> = self
            .eigenvalues
            .iter()
            .map(|&l| if l > cutoff { 1.0 } else { 0.0 })
            .collect();
        diag_real(&d)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues.iter().copied().fold(0.0, f64::max)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

fn diag_real(d: &[f64]) -> CMatrix {
    CMatrix::from_diagonal(&CVector::from_iterator(
        d.len(),
        d.iter().map(|&x| Complex64::new(x, 0.0)),
    ))
}

/// Gram spectrum of the alphabet: the forward DFT of the first Gram row.
pub fn gram_spectrum(alphabet: &PhaseAlphabet) -> Result<SpectralDecomposition> {
    let n = alphabet.n_phases();
    if n < 2 {
        return Err(QdsError::TooFewPhases(n));
    }
    let v0 = alphabet.state(0);
    let row: Vec<Complex64> = (0..n).map(|m| overlap(v0, alphabet.state(m))).collect();
    let spectrum = linalg::dft(&row);
    let mut eigenvalues = Vec::with_capacity(n);
    for (index, value) in spectrum.iter().enumerate() {
        let lambda = value.re;
        if lambda < -EIGENVALUE_CLAMP {
            return Err(QdsError::NegativeEigenvalue {
                index,
                value: lambda,
            });
        }
        eigenvalues.push(lambda.max(0.0));
    }
    let scale = 1.0 / (n as f64).sqrt();
    let basis_change = CMatrix::from_fn(n, n, |l, k| {
        linalg::root_of_unity((k * l) as i64, n) * scale
    });
    Ok(SpectralDecomposition {
        eigenvalues,
        basis_change,
    })
}

/// Standard-basis coordinates of `|v_k⟩`: `(1/√N) Σ_l exp(2πi kl/N) √λ_l |b_l⟩`.
pub fn state_coordinates(k: usize, spec: &SpectralDecomposition) -> Result<CVector> {
    let n = spec.dim();
    if k >= n {
        return Err(QdsError::IndexOutOfRange { index: k, len: n });
    }
    Ok(spec.state_matrix().column(k).into_owned())
}

/// Phase-shift unitary `U = diag(exp(2πi l/N))` with `|v_k⟩ = U^k |v_0⟩`.
pub fn shift_unitary(n: usize) -> CMatrix {
    CMatrix::from_diagonal(&CVector::from_iterator(
        n,
        (0..n).map(|l| linalg::root_of_unity(l as i64, n)),
    ))
}

/// Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    matrix: CMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(QdsError::DimensionMismatch {
                expected: matrix.nrows(),
                found: matrix.ncols(),
            });
        }
        let herm = linalg::hermiticity_residual(&matrix);
        if herm > DENSITY_TOLERANCE {
            return Err(QdsError::InvalidDensity(format!("Hermiticity residual {herm:e}")));
        }
        let tr = linalg::trace(&matrix);
        if (tr.re - 1.0).abs() > DENSITY_TOLERANCE || tr.im.abs() > DENSITY_TOLERANCE {
            return Err(QdsError::InvalidDensity(format!("trace {tr}")));
        }
        let min = linalg::hermitian_eigenvalues(&matrix)
            .first()
            .copied()
            .unwrap_or(0.0);
        if min < -DENSITY_TOLERANCE {
            return Err(QdsError::InvalidDensity(format!("eigenvalue {min:e} < 0")));
        }
        Ok(Self {
            matrix: linalg::hermitian_part(&matrix),
        })
    }

    /// `|ψ⟩⟨ψ|` for a normalised vector.
    pub fn pure(state: &CVector) -> Result<Self> {
        let norm = state.norm();
        if norm == 0.0 {
            return Err(QdsError::InvalidDensity("zero vector".into()));
        }
        let psi = state.unscale(norm);
        Self::new(linalg::outer(&psi, &psi))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::hermitian_eigenvalues(&self.matrix)
    }
}

/// `ρ_Single = (1/N) Σ_k |v_k⟩⟨v_k| = diag(λ/N)` in the standard basis.
pub fn signature_element_density(alphabet: &PhaseAlphabet) -> Result<DensityMatrix> {
    let spec = gram_spectrum(alphabet)?;
    let n = spec.dim() as f64;
    let d: Vec<f64> = spec.eigenvalues().iter().map(|l| l / n).collect();
    DensityMatrix::new(diag_real(&d))
}

/// Von Neumann entropy in bits, with `0 · log 0 = 0`.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    entropy_bits(&rho.eigenvalues())
}

/// Shannon entropy (bits) of a spectrum; tiny negative round-off is ignored.
pub fn entropy_bits(spectrum: &[f64]) -> f64 {
    spectrum
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum::<f64>()
        .max(0.0)
}

/// `½‖a − b‖₁`.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(QdsError::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    let diff = a.matrix() - b.matrix();
    let sum: f64 = linalg::hermitian_eigenvalues(&diff).iter().map(|x| x.abs()).sum();
    Ok((0.5 * sum).clamp(0.0, 1.0))
}
