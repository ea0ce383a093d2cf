use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;

/// Dense Fourier differentiation matrix on `n` equispaced points of `[0, 2 pi)`.
/// The Nyquist mode is annihilated.
pub fn spectral_derivative_matrix(n: usize) -> DMatrix<f64> {
    assert!(
        n >= 2 && n % 2 == 0,
        "spectral grid needs an even number of points"
    );
    DMatrix::from_fn(n, n, |j, k| {
        if j == k {
            0.0
        } else {
            let d = j as f64 - k as f64;
            let sign = if (j + k) % 2 == 0 { 1.0 } else { -1.0 };
            0.5 * sign / (d * PI / n as f64).tan()
        }
    })
}

/// `sum_k c_k D^k` as a dense matrix (Horner).
pub(crate) fn poly_matrix(coeffs: &[f64], d: &DMatrix<f64>) -> DMatrix<f64> {
    let n = d.nrows();
    let mut acc = DMatrix::zeros(n, n);
    for c in coeffs.iter().rev() {
        acc = d * acc;
        for i in 0..n {
            acc[(i, i)] += c;
        }
    }
    acc
}

pub(crate) fn apply_poly(coeffs: &[f64], d: &DMatrix<f64>, v: &DVector<f64>) -> DVector<f64> {
    let mut acc = DVector::zeros(v.len());
    for c in coeffs.iter().rev() {
        acc = d * acc + v * *c;
    }
    acc
}

/// Real trigonometric polynomial `sum_m a_m cos(m x) + b_m sin(m x)`, `m = 1..=M`.
#[derive(Clone, Debug, PartialEq)]
pub struct TestFunction {
    pub coeffs: Vec<(f64, f64)>,
}

impl TestFunction {
    pub fn random<R: Rng>(rng: &mut R, modes: usize) -> Self {
        TestFunction {
            coeffs: (0..modes)
                .map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect(),
        }
    }

    pub fn sample(&self, n: usize) -> DVector<f64> {
        let dx = 2.0 * PI / n as f64;
        DVector::from_fn(n, |j, _| {
            let x = j as f64 * dx;
            self.coeffs
                .iter()
                .enumerate()
                .map(|(i, (a, b))| {
                    let m = (i + 1) as f64;
                    a * (m * x).cos() + b * (m * x).sin()
                })
                .sum()
        })
    }

    /// Complex amplitude `u_m` with `f = sum Re(u_m e^{i m x})`.
    pub fn amplitude(&self, m: usize) -> Complex64 {
        let (a, b) = self.coeffs[m - 1];
        Complex64::new(a, -b)
    }

    pub fn modes(&self) -> usize {
        self.coeffs.len()
    }

    /// L2 norm over one period.
    pub fn norm(&self) -> f64 {
        (PI * self.coeffs.iter().map(|(a, b)| a * a + b * b).sum::<f64>()).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn differentiates_low_modes_exactly() {
        let n = 64;
        let d = spectral_derivative_matrix(n);
        let f = TestFunction::random(&mut ChaCha8Rng::seed_from_u64(1), 8);
        let df = &d * f.sample(n);
        let dx = 2.0 * PI / n as f64;
        for j in 0..n {
            let x = j as f64 * dx;
            let exact: f64 = f
                .coeffs
                .iter()
                .enumerate()
                .map(|(i, (a, b))| {
                    let m = (i + 1) as f64;
                    m * (-a * (m * x).sin() + b * (m * x).cos())
                })
                .sum();
            assert!((df[j] - exact).abs() < 1e-11);
        }
        let d2 = poly_matrix(&[0.0, 0.0, 1.0], &d);
        let v = f.sample(n);
        assert!((&d2 * &v - apply_poly(&[0.0, 0.0, 1.0], &d, &v)).amax() < 1e-10);
    }

    #[test]
    fn norm_matches_quadrature() {
        let f = TestFunction::random(&mut ChaCha8Rng::seed_from_u64(2), 8);
        let n = 128;
        let q = f.sample(n).norm_squared() * 2.0 * PI / n as f64;
        assert!((q.sqrt() - f.norm()).abs() < 1e-12);
    }
}
