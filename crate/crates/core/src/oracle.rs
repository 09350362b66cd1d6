//! Dense-matrix and brute-force reference computations for tests. Nothing
//! here touches the FFT engine.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::dsp::Spectrum;

pub struct DenseMatrix {
    pub size: usize,
    pub data: Vec<Complex64>,
}

impl DenseMatrix {
    pub fn dft(size: usize) -> Self {
        let mut data = Vec::with_capacity(size * size);
        for r in 0..size {
            for c in 0..size {
                let angle = -2.0 * PI * ((r * c) % size) as f64 / size as f64;
                data.push(Complex64::from_polar(1.0, angle));
            }
        }
        Self { size, data }
    }

    pub fn idft(size: usize) -> Self {
        let mut m = Self::dft(size);
        for v in &mut m.data {
            *v = v.conj() / size as f64;
        }
        m
    }

    pub fn diagonal(values: &[Complex64]) -> Self {
        let size = values.len();
        let mut data = vec![Complex64::new(0.0, 0.0); size * size];
        for (i, v) in values.iter().enumerate() {
            data[i * size + i] = *v;
        }
        Self { size, data }
    }

    pub fn mul(&self, other: &DenseMatrix) -> DenseMatrix {
        let n = self.size;
        let mut data = vec![Complex64::new(0.0, 0.0); n * n];
        for r in 0..n {
            for c in 0..n {
                data[r * n + c] = (0..n).map(|k| self.data[r * n + k] * other.data[k * n + c]).sum();
            }
        }
        DenseMatrix { size: n, data }
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        let n = self.size;
        (0..n)
            .map(|r| (0..n).map(|c| self.data[r * n + c] * v[c]).sum())
            .collect()
    }
}

pub fn dense_dft(v: &[Complex64]) -> Vec<Complex64> {
    DenseMatrix::dft(v.len()).apply(v)
}

pub fn dense_idft(v: &[Complex64]) -> Vec<Complex64> {
    DenseMatrix::idft(v.len()).apply(v)
}

/// `F diag(mask) F^-1`; `keep_first` selects the gradient constraint
/// (identity on the first half) versus the output constraint.
pub fn dense_projection(n: usize, keep_first: bool) -> DenseMatrix {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let mask: Vec<Complex64> = (0..2 * n)
        .map(|i| if (i < n) == keep_first { one } else { zero })
        .collect();
    DenseMatrix::dft(2 * n)
        .mul(&DenseMatrix::diagonal(&mask))
        .mul(&DenseMatrix::idft(2 * n))
}

pub fn random_block<R: Rng>(rng: &mut R, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.sample(StandardNormal)).collect()
}

pub fn random_spectrum<R: Rng>(rng: &mut R, len: usize) -> Spectrum {
    Spectrum::from_bins(
        (0..len)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect(),
    )
}

pub fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Plain `y[t] = sum_m h[m] x[t - m]` with zero history before `t = 0`.
pub fn direct_convolution(x: &[f64], h: &[f64]) -> Vec<f64> {
    (0..x.len())
        .map(|t| {
            h.iter()
                .enumerate()
                .filter(|(m, _)| *m <= t)
                .map(|(m, hm)| hm * x[t - m])
                .sum()
        })
        .collect()
}
