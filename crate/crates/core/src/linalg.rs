//! Small dense complex linear-algebra helpers on top of `nalgebra`.
//!
//! Every matrix in this crate is at most a few tens of rows, so all routines
//! favour clarity over blocking or in-place tricks.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rustfft::FftPlanner;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Eigen-decomposition of a Hermitian matrix.
///
/// The input is symmetrised as `(m + m†)/2` first so round-off asymmetry does
/// not leak into the eigenvalues. Eigenvalues are returned in ascending order
/// with the matching eigenvectors as columns.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let h = hermitian_part(m);
    let eig = h.symmetric_eigen();
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let mut v: Vec<f64> = hermitian_part(m).symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Spectral (operator 2-) norm, via the largest eigenvalue of `m† m`.
pub fn spectral_norm(m: &CMatrix) -> f64 {
    let gram = m.adjoint() * m;
    hermitian_eigenvalues(&gram)
        .last()
        .copied()
        .unwrap_or(0.0)
        .max(0.0)
        .sqrt()
}

pub fn hermiticity_residual(m: &CMatrix) -> f64 {
    spectral_norm(&(m - m.adjoint()))
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

/// Forward DFT, `X_k = Σ_m x_m exp(-2πi k m / N)`.
pub fn dft(input: &[Complex64]) -> Vec<Complex64> {
    let mut buf = input.to_vec();
    if buf.is_empty() {
        return buf;
    }
    let fft = FftPlanner::<f64>::new().plan_fft_forward(buf.len());
    fft.process(&mut buf);
    buf
}

/// `U^power A U^{-power}` for the phase-shift unitary `U = diag(exp(2πi l/N))`.
///
/// Equivalent to the Hadamard product `A ∘ |ω⟩⟨ω|` with `ω_l = exp(2πi l·power/N)`.
pub fn shift_conjugate(a: &CMatrix, power: i64) -> CMatrix {
    let n = a.nrows();
    CMatrix::from_fn(n, n, |l, m| {
        let diff = (l as i64 - m as i64) * power;
        a[(l, m)] * root_of_unity(diff, n)
    })
}

/// `exp(2πi k / n)` with `k` reduced modulo `n` first to keep the angle small.
pub fn root_of_unity(k: i64, n: usize) -> Complex64 {
    let n_i = n as i64;
    let r = k.rem_euclid(n_i);
    Complex64::from_polar(1.0, std::f64::consts::TAU * r as f64 / n as f64)
}

pub fn outer(a: &CVector, b: &CVector) -> CMatrix {
    a * b.adjoint()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn dft_of_delta_is_flat() {
        let mut x = vec![Complex64::new(0.0, 0.0); 8];
        x[0] = Complex64::new(1.0, 0.0);
        for v in dft(&x) {
            assert_abs_diff_eq!(v.re, 1.0, epsilon = 1e-15);
            assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn dft_sign_convention() {
        // x_m = exp(2πi m / N) concentrates at k = 1 under the forward transform
        let n = 8;
        let x: Vec<_> = (0..n).map(|m| root_of_unity(m as i64, n)).collect();
        let y = dft(&x);
        assert_abs_diff_eq!(y[1].re, n as f64, epsilon = 1e-12);
        for (k, v) in y.iter().enumerate().filter(|(k, _)| *k != 1) {
            assert!(v.norm() < 1e-12, "k = {k}");
        }
    }

    #[test]
    fn spectral_norm_of_diagonal() {
        let m = CMatrix::from_diagonal(&CVector::from_vec(vec![
            Complex64::new(-3.0, 0.0),
            Complex64::new(0.0, 2.0),
        ]));
        assert_abs_diff_eq!(spectral_norm(&m), 3.0, epsilon = 1e-12);
    }

    #[test]
    fn eigenvalues_sorted_ascending() {
        let m = CMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(2.0, 0.0),
                Complex64::new(0.0, 1.0),
                Complex64::new(0.0, -1.0),
                Complex64::new(2.0, 0.0),
            ],
        );
        let (vals, vecs) = hermitian_eigen(&m);
        assert_abs_diff_eq!(vals[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(vals[1], 3.0, epsilon = 1e-12);
        let v = vecs.column(1).into_owned();
        let mv = &m * &v;
        assert!((mv - v.scale(3.0)).norm() < 1e-12);
    }
}
