//! Truncated Fock-space reference implementation.
//!
//! Works directly with photon-number amplitudes and never uses the alphabet's
//! Fourier basis, so it is independent of the library's exact span algebra.

#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;

pub const CUTOFF: usize = 40;

pub type FockMatrix = DMatrix<Complex64>;

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// `e^{−|α|²/2} αⁿ/√(n!)` for `n = 0..=cutoff`.
pub fn coherent(alpha: Complex64, cutoff: usize) -> Vec<Complex64> {
    let norm = (-0.5 * alpha.norm_sqr()).exp();
    let mut out = Vec::with_capacity(cutoff + 1);
    let mut power = Complex64::new(1.0, 0.0);
    for n in 0..=cutoff {
        out.push(power * (norm / factorial(n).sqrt()));
        power *= alpha;
    }
    out
}

pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn projector(v: &[Complex64]) -> FockMatrix {
    let n = v.len();
    FockMatrix::from_fn(n, n, |r, c| v[r] * v[c].conj())
}

pub fn alphabet_states(n_phases: usize, mean_photons: f64, cutoff: usize) -> Vec<Vec<Complex64>> {
    let a = mean_photons.sqrt();
    (0..n_phases)
        .map(|k| {
            let phase = std::f64::consts::TAU * k as f64 / n_phases as f64;
            coherent(Complex64::from_polar(a, phase), cutoff)
        })
        .collect()
}

/// `(1/N) Σ_k |α_k⟩⟨α_k|` in the truncated Fock basis.
pub fn element_density(n_phases: usize, mean_photons: f64, cutoff: usize) -> FockMatrix {
    let states = alphabet_states(n_phases, mean_photons, cutoff);
    let dim = cutoff + 1;
    states
        .iter()
        .fold(FockMatrix::zeros(dim, dim), |acc, s| acc + projector(s))
        .unscale(n_phases as f64)
}

/// Eigenvalues of a Hermitian matrix, descending.
pub fn eigenvalues_desc(m: &FockMatrix) -> Vec<f64> {
    let h = (m + m.adjoint()).scale(0.5);
    let mut v: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

pub fn entropy_bits(m: &FockMatrix) -> f64 {
    eigenvalues_desc(m)
        .into_iter()
        .filter(|&p| p > 1e-300)
        .map(|p| -p * p.log2())
        .sum()
}

/// Square-root measurement outcome table `P(φ | θ)` built from the Gram
/// matrix of the Fock vectors: `|μ_i⟩ = Σ_j (G^{−1/2})_{ji} |α_j⟩`.
pub fn square_root_outcomes(n_phases: usize, mean_photons: f64, cutoff: usize) -> Vec<Vec<f64>> {
    let states = alphabet_states(n_phases, mean_photons, cutoff);
    let gram = FockMatrix::from_fn(n_phases, n_phases, |j, k| inner(&states[j], &states[k]));
    let eig = gram.clone().symmetric_eigen();
    let max = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
    let inv_sqrt = FockMatrix::from_fn(n_phases, n_phases, |r, c| {
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, &l) in eig.eigenvalues.iter().enumerate() {
            if l > 1e-12 * max {
                acc += eig.eigenvectors[(r, k)] * eig.eigenvectors[(c, k)].conj() / l.sqrt();
            }
        }
        acc
    });
    // ⟨μ_φ|α_θ⟩ = Σ_j conj(G^{-1/2}_{jφ}) G_{jθ}
    let amplitudes = inv_sqrt.adjoint() * &gram;
    (0..n_phases)
        .map(|theta| (0..n_phases).map(|phi| amplitudes[(phi, theta)].norm_sqr()).collect())
        .collect()
}

/// Probability that the null output of a 50:50 beamsplitter stays dark for
/// coherent inputs `a` and `b`, computed by expanding the two-mode Fock state
/// under `a† → (s† + d†)/√2`, `b† → (s† − d†)/√2`.
pub fn null_port_vacuum_probability(a: Complex64, b: Complex64, cutoff: usize) -> f64 {
    let ca = coherent(a, cutoff);
    let cb = coherent(b, cutoff);
    let max_total = 2 * cutoff;
    // out[p][q]: amplitude of |p⟩_signal |q⟩_null
    let mut out = vec![vec![Complex64::new(0.0, 0.0); max_total + 1]; max_total + 1];
    let fact: Vec<f64> = (0..=max_total).map(factorial).collect();
    let binom = |n: usize, k: usize| fact[n] / (fact[k] * fact[n - k]);
    for n in 0..=cutoff {
        for k in 0..=cutoff {
            let weight = ca[n] * cb[k];
            if weight.norm() < 1e-30 {
                continue;
            }
            let scale = 1.0 / (2f64.powf((n + k) as f64 / 2.0) * (fact[n] * fact[k]).sqrt());
            for i in 0..=n {
                for j in 0..=k {
                    // (s†+d†)^n: s†^i d†^{n-i};  (s†-d†)^k: s†^j (-d†)^{k-j}
                    let p = i + j;
                    let q = (n - i) + (k - j);
                    let sign = if (k - j) % 2 == 0 { 1.0 } else { -1.0 };
                    let coeff = binom(n, i) * binom(k, j) * sign * scale
                        * (fact[p] * fact[q]).sqrt();
                    out[p][q] += weight * coeff;
                }
            }
        }
    }
    (0..=max_total).map(|p| out[p][0].norm_sqr()).sum()
}
