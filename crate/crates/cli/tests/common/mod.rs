//! Brute-force references for the acceptance suite. Nothing here goes
//! through the FFT engine.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;

pub type Matrix = Vec<Vec<Complex64>>;

pub fn dft_matrix(size: usize) -> Matrix {
    (0..size)
        .map(|r| {
            (0..size)
                .map(|c| Complex64::from_polar(1.0, -2.0 * PI * ((r * c) % size) as f64 / size as f64))
                .collect()
        })
        .collect()
}

pub fn idft_matrix(size: usize) -> Matrix {
    dft_matrix(size)
        .into_iter()
        .map(|row| row.into_iter().map(|v| v.conj() / size as f64).collect())
        .collect()
}

pub fn matmul(a: &Matrix, b: &Matrix) -> Matrix {
    let n = a.len();
    (0..n)
        .map(|r| (0..n).map(|c| (0..n).map(|k| a[r][k] * b[k][c]).sum()).collect())
        .collect()
}

pub fn apply(m: &Matrix, v: &[Complex64]) -> Vec<Complex64> {
    m.iter()
        .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

/// `F diag(mask) F^-1` with the mask keeping the first half of the time
/// samples (`keep_first`) or the second.
pub fn projection(size: usize, keep_first: bool) -> Matrix {
    let half = size / 2;
    let mut masked = idft_matrix(size);
    for (i, row) in masked.iter_mut().enumerate() {
        if (i < half) != keep_first {
            row.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        }
    }
    matmul(&dft_matrix(size), &masked)
}

pub fn real(x: &[f64]) -> Vec<Complex64> {
    x.iter().map(|&v| Complex64::new(v, 0.0)).collect()
}

pub fn gaussian_block<R: Rng>(rng: &mut R, len: usize) -> Vec<f64> {
    // Box-Muller keeps this independent of the library's noise source.
    (0..len)
        .map(|_| {
            let u: f64 = rng.random_range(f64::EPSILON..1.0);
            let v: f64 = rng.random();
            (-2.0 * u.ln()).sqrt() * (2.0 * PI * v).cos()
        })
        .collect()
}

pub fn gaussian_bins<R: Rng>(rng: &mut R, len: usize) -> Vec<Complex64> {
    let re = gaussian_block(rng, len);
    let im = gaussian_block(rng, len);
    re.into_iter().zip(im).map(|(a, b)| Complex64::new(a, b)).collect()
}

pub fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// `y[t] = sum_m h[m] x[t - m]`, zero history before `t = 0`.
pub fn direct_convolution(x: &[f64], h: &[f64]) -> Vec<f64> {
    (0..x.len())
        .map(|t| (0..h.len().min(t + 1)).map(|m| h[m] * x[t - m]).sum())
        .collect()
}
