//! Spectra, the 2N-point transform engine, and the constraint projections
//! shared by the adaptive filter.
//!
//! Convention: the forward transform is the unnormalized DFT, the inverse
//! carries the `1/2N` factor. Spectra always store all `2N` bins.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{check_len, AecError, Result};

/// Relative tolerance used when checking conjugate symmetry.
pub const HERMITIAN_TOLERANCE: f64 = 1e-10;

/// A full `2N`-bin complex spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    bins: Vec<Complex64>,
}

impl Spectrum {
    pub fn zeros(len: usize) -> Self {
        Self {
            bins: vec![Complex64::new(0.0, 0.0); len],
        }
    }

    pub fn from_bins(bins: Vec<Complex64>) -> Self {
        Self { bins }
    }

    pub fn bins(&self) -> &[Complex64] {
        &self.bins
    }

    pub fn bins_mut(&mut self) -> &mut [Complex64] {
        &mut self.bins
    }

    pub fn into_bins(self) -> Vec<Complex64> {
        self.bins
    }

    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    /// Instantaneous per-bin squared magnitudes (no smoothing, no floor).
    pub fn power(&self) -> PowerSpectrum {
        PowerSpectrum::from_powers(self.bins.iter().map(|c| c.norm_sqr()).collect())
    }

    /// Largest violation of `bin[2N-k] == conj(bin[k])`, including the
    /// imaginary parts of the DC and Nyquist bins.
    pub fn hermitian_deviation(&self) -> f64 {
        let len = self.bins.len();
        if len == 0 {
            return 0.0;
        }
        let mut dev = self.bins[0].im.abs();
        if len.is_multiple_of(2) {
            dev = dev.max(self.bins[len / 2].im.abs());
        }
        for k in 1..len.div_ceil(2) {
            dev = dev.max((self.bins[len - k] - self.bins[k].conj()).norm());
        }
        dev
    }

    fn max_magnitude(&self) -> f64 {
        self.bins.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

/// Per-bin non-negative powers, e.g. the diagonal of the far-end
/// normalization matrix or smoothed `|Y_k|^2` / `|E_k|^2` estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSpectrum {
    powers: Vec<f64>,
}

impl PowerSpectrum {
    pub fn filled(len: usize, value: f64) -> Self {
        Self {
            powers: vec![value; len],
        }
    }

    pub fn from_powers(powers: Vec<f64>) -> Self {
        Self { powers }
    }

    pub fn powers(&self) -> &[f64] {
        &self.powers
    }

    pub fn len(&self) -> usize {
        self.powers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.powers.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.powers.iter().sum()
    }

    /// One smoothing step against instantaneous powers `inst`, which must
    /// yield exactly `self.len()` values.
    pub(crate) fn smooth_with(&mut self, inst: impl Iterator<Item = f64>, s: PowerSmoothing) {
        for (p, x) in self.powers.iter_mut().zip(inst) {
            *p = (s.lambda * *p + (1.0 - s.lambda) * x).max(s.floor);
        }
    }
}

/// Exponential smoothing factor and regularization floor for power
/// estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerSmoothing {
    /// Weight of the previous estimate, in `(0, 1)`.
    pub lambda: f64,
    /// Lower bound applied after every update; must be positive.
    pub floor: f64,
}

impl Default for PowerSmoothing {
    fn default() -> Self {
        Self {
            lambda: 0.9,
            floor: 1e-6,
        }
    }
}

impl PowerSmoothing {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda < 1.0) {
            return Err(AecError::config(format!(
                "power smoothing factor {} must lie in (0, 1)",
                self.lambda
            )));
        }
        if !(self.floor > 0.0 && self.floor.is_finite()) {
            return Err(AecError::config(format!("power floor {} must be positive", self.floor)));
        }
        Ok(())
    }
}

/// `p <- lambda * p + (1 - lambda) * |spec_k|^2`, floored, bin by bin.
pub fn update_power(acc: &mut PowerSpectrum, spec: &Spectrum, smoothing: PowerSmoothing) -> Result<()> {
    check_len(acc.len(), spec.len())?;
    acc.smooth_with(spec.bins.iter().map(|c| c.norm_sqr()), smoothing);
    Ok(())
}

/// `K` spectra of equal length: filter weights, gradients, or the far-end
/// history. Partition 0 is the most recent block.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionedSpectra {
    parts: Vec<Spectrum>,
}

impl PartitionedSpectra {
    pub fn zeros(partitions: usize, bins: usize) -> Self {
        Self {
            parts: vec![Spectrum::zeros(bins); partitions],
        }
    }

    pub fn from_partitions(parts: Vec<Spectrum>) -> Self {
        Self { parts }
    }

    pub fn partitions(&self) -> &[Spectrum] {
        &self.parts
    }

    pub fn partitions_mut(&mut self) -> &mut [Spectrum] {
        &mut self.parts
    }

    pub fn partition(&self, k: usize) -> &Spectrum {
        &self.parts[k]
    }

    /// Number of partitions `K`.
    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// Bins per partition (`2N`).
    pub fn bin_len(&self) -> usize {
        self.parts.first().map_or(0, Spectrum::len)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Spectrum> {
        self.parts.iter()
    }

    /// Ages every partition by one slot and installs `newest` as partition 0.
    /// The oldest partition is dropped.
    pub(crate) fn push_newest(&mut self, newest: Spectrum) {
        self.parts.rotate_right(1);
        self.parts[0] = newest;
    }

    pub(crate) fn clear(&mut self) {
        for p in &mut self.parts {
            p.bins.fill(Complex64::new(0.0, 0.0));
        }
    }
}

/// Transform engine for one block size `N` (transform length `2N`).
#[derive(Clone)]
pub struct Fourier {
    block_size: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Fourier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Fourier").field("block_size", &self.block_size).finish()
    }
}

impl Fourier {
    pub fn new(block_size: usize) -> Result<Self> {
        if block_size == 0 || !block_size.is_power_of_two() {
            return Err(AecError::config(format!(
                "block size {block_size} must be a power of two"
            )));
        }
        let mut planner = FftPlanner::new();
        Ok(Self {
            block_size,
            forward: planner.plan_fft_forward(2 * block_size),
            inverse: planner.plan_fft_inverse(2 * block_size),
        })
    }

    /// Block size `N`.
    pub fn block_size(&self) -> usize {
        self.block_size
    }

    /// Transform length `2N`.
    pub fn len(&self) -> usize {
        2 * self.block_size
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Unnormalized DFT of a real `2N`-sample block.
    pub fn forward(&self, block: &[f64]) -> Result<Spectrum> {
        check_len(self.len(), block.len())?;
        Ok(self.forward_real(block))
    }

    /// Inverse DFT (with `1/2N`) of a conjugate-symmetric spectrum.
    pub fn inverse(&self, spec: &Spectrum) -> Result<Vec<f64>> {
        check_len(self.len(), spec.len())?;
        let tolerance = HERMITIAN_TOLERANCE * spec.max_magnitude();
        let deviation = spec.hermitian_deviation();
        if deviation > tolerance {
            return Err(AecError::NotHermitian { deviation, tolerance });
        }
        Ok(self.inverse_real(spec))
    }

    /// Output constraint: zero the first `N` time-domain samples.
    pub fn constrain_output(&self, spec: &Spectrum) -> Result<Spectrum> {
        check_len(self.len(), spec.len())?;
        Ok(self.project(spec, Half::First))
    }

    /// Gradient constraint: zero the last `N` time-domain samples.
    pub fn constrain_gradient(&self, spec: &Spectrum) -> Result<Spectrum> {
        check_len(self.len(), spec.len())?;
        Ok(self.project(spec, Half::Last))
    }

    pub(crate) fn forward_real(&self, block: &[f64]) -> Spectrum {
        let mut buf: Vec<Complex64> = block.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.forward.process(&mut buf);
        Spectrum { bins: buf }
    }

    /// Inverse transform keeping only the real part; no symmetry check.
    pub(crate) fn inverse_real(&self, spec: &Spectrum) -> Vec<f64> {
        let mut buf = spec.bins.clone();
        self.inverse.process(&mut buf);
        let scale = 1.0 / self.len() as f64;
        buf.iter().map(|c| c.re * scale).collect()
    }

    fn project(&self, spec: &Spectrum, zeroed: Half) -> Spectrum {
        let n = self.block_size;
        let mut buf = spec.bins.clone();
        self.inverse.process(&mut buf);
        let scale = 1.0 / self.len() as f64;
        let (keep, drop) = match zeroed {
            Half::First => (n..2 * n, 0..n),
            Half::Last => (0..n, n..2 * n),
        };
        buf[drop].fill(Complex64::new(0.0, 0.0));
        for c in &mut buf[keep] {
            *c *= scale;
        }
        self.forward.process(&mut buf);
        Spectrum { bins: buf }
    }
}

#[derive(Clone, Copy)]
enum Half {
    First,
    Last,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{dense_dft, dense_idft, dense_projection, max_abs_diff, random_block, random_spectrum};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn approx(a: &[Complex64], b: &[Complex64], tol: f64) {
        let d = max_abs_diff(a, b);
        assert!(d <= tol, "max deviation {d:e} > {tol:e}");
    }

    #[test]
    fn rejects_non_power_of_two() {
        assert!(Fourier::new(0).is_err());
        assert!(Fourier::new(6).is_err());
        assert!(Fourier::new(4).is_ok());
    }

    #[test]
    fn forward_of_zero_and_impulse() {
        let f = Fourier::new(4).unwrap();
        let zero = f.forward(&[0.0; 8]).unwrap();
        assert!(zero.bins().iter().all(|c| c.norm() == 0.0));

        let mut delta = [0.0; 8];
        delta[0] = 1.0;
        let spec = f.forward(&delta).unwrap();
        approx(spec.bins(), &[Complex64::new(1.0, 0.0); 8], 1e-15);
    }

    #[test]
    fn forward_rejects_wrong_length() {
        let f = Fourier::new(4).unwrap();
        assert!(matches!(
            f.forward(&[0.0; 7]),
            Err(AecError::SizeMismatch { expected: 8, actual: 7 })
        ));
        assert!(f.constrain_output(&Spectrum::zeros(4)).is_err());
    }

    #[test]
    fn forward_matches_dense_dft() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in [4, 8] {
            let f = Fourier::new(n).unwrap();
            let block = random_block(&mut rng, 2 * n);
            let expected = dense_dft(&block.iter().map(|&x| Complex64::new(x, 0.0)).collect::<Vec<_>>());
            approx(f.forward(&block).unwrap().bins(), &expected, 1e-10);
        }
    }

    #[test]
    fn inverse_of_all_ones_is_unit_impulse() {
        let f = Fourier::new(4).unwrap();
        let out = f
            .inverse(&Spectrum::from_bins(vec![Complex64::new(1.0, 0.0); 8]))
            .unwrap();
        assert!((out[0] - 1.0).abs() < 1e-15);
        assert!(out[1..].iter().all(|x| x.abs() < 1e-15));
    }

    #[test]
    fn inverse_matches_dense_idft_on_hermitian_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let f = Fourier::new(4).unwrap();
        // A Hermitian spectrum is the DFT of a real block.
        let block = random_block(&mut rng, 8);
        let spec = Spectrum::from_bins(dense_dft(
            &block.iter().map(|&x| Complex64::new(x, 0.0)).collect::<Vec<_>>(),
        ));
        let expected = dense_idft(spec.bins());
        let got = f.inverse(&spec).unwrap();
        for (g, e) in got.iter().zip(&expected) {
            assert!((g - e.re).abs() < 1e-10);
            assert!(e.im.abs() < 1e-10);
        }
    }

    #[test]
    fn inverse_rejects_non_hermitian() {
        let f = Fourier::new(4).unwrap();
        let mut bins = vec![Complex64::new(0.0, 0.0); 8];
        bins[1] = Complex64::new(1.0, 1.0);
        let err = f.inverse(&Spectrum::from_bins(bins)).unwrap_err();
        assert!(matches!(err, AecError::NotHermitian { .. }));
    }

    #[test]
    fn projections_match_dense_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [4, 8] {
            let f = Fourier::new(n).unwrap();
            let g1 = dense_projection(n, false);
            let g2 = dense_projection(n, true);
            for _ in 0..20 {
                let s = random_spectrum(&mut rng, 2 * n);
                approx(f.constrain_output(&s).unwrap().bins(), &g1.apply(s.bins()), 1e-10);
                approx(f.constrain_gradient(&s).unwrap().bins(), &g2.apply(s.bins()), 1e-10);
            }
        }
    }

    #[test]
    fn output_constraint_leaves_late_half_blocks_alone() {
        let f = Fourier::new(4).unwrap();
        let block = [0.0, 0.0, 0.0, 0.0, 0.3, -1.0, 0.5, 0.25];
        let s = f.forward(&block).unwrap();
        approx(f.constrain_output(&s).unwrap().bins(), s.bins(), 1e-10);
    }

    #[test]
    fn power_update_arithmetic_and_floor() {
        let s = PowerSmoothing {
            lambda: 0.9,
            floor: 1e-6,
        };
        let mut acc = PowerSpectrum::filled(1, 1.0);
        let spec = Spectrum::from_bins(vec![Complex64::new(2f64.sqrt(), 0.0)]);
        update_power(&mut acc, &spec, s).unwrap();
        assert!((acc.powers()[0] - 1.1).abs() < 1e-12);

        let zero = Spectrum::zeros(1);
        for _ in 0..500 {
            update_power(&mut acc, &zero, s).unwrap();
        }
        assert_eq!(acc.powers()[0], 1e-6);

        let c = Spectrum::from_bins(vec![Complex64::new(0.0, 3.0)]);
        for _ in 0..1000 {
            update_power(&mut acc, &c, s).unwrap();
        }
        assert!((acc.powers()[0] - 9.0).abs() < 1e-9);
        assert!(update_power(&mut acc, &Spectrum::zeros(2), s).is_err());
    }

    #[test]
    fn push_newest_ages_partitions() {
        let a = Spectrum::from_bins(vec![Complex64::new(1.0, 0.0)]);
        let b = Spectrum::from_bins(vec![Complex64::new(2.0, 0.0)]);
        let mut p = PartitionedSpectra::zeros(3, 1);
        p.push_newest(a.clone());
        p.push_newest(b.clone());
        assert_eq!(p.partition(0), &b);
        assert_eq!(p.partition(1), &a);
        assert_eq!(p.partition(2), &Spectrum::zeros(1));
    }

    proptest! {
        #[test]
        fn round_trip_and_parseval(seed in any::<u64>(), log_n in 0u32..7) {
            let n = 1usize << log_n;
            let f = Fourier::new(n).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let block = random_block(&mut rng, 2 * n);
            let spec = f.forward(&block).unwrap();
            let back = f.inverse(&spec).unwrap();
            for (a, b) in block.iter().zip(&back) {
                prop_assert!((a - b).abs() < 1e-10);
            }
            let time: f64 = block.iter().map(|x| x * x).sum();
            let freq: f64 = spec.bins().iter().map(|c| c.norm_sqr()).sum::<f64>() / (2 * n) as f64;
            prop_assert!((time - freq).abs() <= 1e-9 * time.max(1e-300));
        }

        #[test]
        fn projection_algebra(seed in any::<u64>(), log_n in 0u32..6) {
            let n = 1usize << log_n;
            let f = Fourier::new(n).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s = random_spectrum(&mut rng, 2 * n);
            let out = f.constrain_output(&s).unwrap();
            let grad = f.constrain_gradient(&s).unwrap();
            prop_assert!(max_abs_diff(f.constrain_output(&out).unwrap().bins(), out.bins()) < 1e-10);
            prop_assert!(max_abs_diff(f.constrain_gradient(&grad).unwrap().bins(), grad.bins()) < 1e-10);
            let sum: Vec<_> = out.bins().iter().zip(grad.bins()).map(|(a, b)| a + b).collect();
            prop_assert!(max_abs_diff(&sum, s.bins()) < 1e-10);
            let cross = f.constrain_gradient(&out).unwrap();
            prop_assert!(cross.bins().iter().all(|c| c.norm() < 1e-10));
        }

        #[test]
        fn power_update_respects_floor(
            p in 0.0f64..10.0, re in -5.0f64..5.0, im in -5.0f64..5.0, lambda in 0.01f64..0.99,
        ) {
            let s = PowerSmoothing { lambda, floor: 1e-6 };
            let mut acc = PowerSpectrum::filled(1, p);
            update_power(&mut acc, &Spectrum::from_bins(vec![Complex64::new(re, im)]), s).unwrap();
            prop_assert!(acc.powers()[0] >= 1e-6);
        }
    }
}
