//! The multidelay block frequency-domain adaptive filter.
//!
//! Each frame the filter consumes `N` far-end samples and models the echo
//! path as `K` partitions of `N` taps each. Partition `k` of the far-end
//! history holds the transform of the `2N`-sample window lagged `k` blocks;
//! weight partitions are kept gradient-constrained (their last `N`
//! time-domain samples are zero) so that the frequency-domain product
//! realizes a linear convolution.

use num_complex::Complex64;

use crate::dsp::{Fourier, PartitionedSpectra, PowerSmoothing, PowerSpectrum, Spectrum};
use crate::error::{check_len, AecError, Result};

/// Echo estimate for one frame.
#[derive(Debug, Clone)]
pub struct EchoEstimate {
    /// `N` time-domain samples.
    pub samples: Vec<f64>,
    /// Output-constrained prediction spectrum.
    pub spectrum: Spectrum,
    /// Per-bin `|Y_k|^2` of `spectrum`.
    pub power: PowerSpectrum,
}

/// Error signal for one frame.
#[derive(Debug, Clone)]
pub struct ErrorFrame {
    pub samples: Vec<f64>,
    /// Transform of the zero-prefixed error block.
    pub spectrum: Spectrum,
    pub power: PowerSpectrum,
}

#[derive(Debug, Clone)]
pub struct MdfFilter {
    fourier: Fourier,
    smoothing: PowerSmoothing,
    frame_index: u64,
    far_history: PartitionedSpectra,
    weights: PartitionedSpectra,
    phi_xx: PowerSpectrum,
    last_far_block: Vec<f64>,
    last_gradient: PartitionedSpectra,
}

impl MdfFilter {
    pub fn new(block_size: usize, partitions: usize, smoothing: PowerSmoothing) -> Result<Self> {
        if partitions == 0 {
            return Err(AecError::config("at least one partition is required"));
        }
        smoothing.validate()?;
        let fourier = Fourier::new(block_size)?;
        let bins = fourier.len();
        Ok(Self {
            fourier,
            smoothing,
            frame_index: 0,
            far_history: PartitionedSpectra::zeros(partitions, bins),
            weights: PartitionedSpectra::zeros(partitions, bins),
            phi_xx: PowerSpectrum::filled(bins, smoothing.floor),
            last_far_block: vec![0.0; block_size],
            last_gradient: PartitionedSpectra::zeros(partitions, bins),
        })
    }

    pub fn block_size(&self) -> usize {
        self.fourier.block_size()
    }

    pub fn partitions(&self) -> usize {
        self.weights.len()
    }

    /// Total modeled filter length `K * N`.
    pub fn filter_len(&self) -> usize {
        self.partitions() * self.block_size()
    }

    pub fn frame_index(&self) -> u64 {
        self.frame_index
    }

    pub fn fourier(&self) -> &Fourier {
        &self.fourier
    }

    pub fn far_history(&self) -> &PartitionedSpectra {
        &self.far_history
    }

    pub fn weights(&self) -> &PartitionedSpectra {
        &self.weights
    }

    pub fn phi_xx(&self) -> &PowerSpectrum {
        &self.phi_xx
    }

    pub fn last_gradient(&self) -> &PartitionedSpectra {
        &self.last_gradient
    }

    /// Zero weights, history and gradient; normalization back at the floor.
    pub fn reset(&mut self) {
        self.frame_index = 0;
        self.far_history.clear();
        self.weights.clear();
        self.last_gradient.clear();
        self.last_far_block.fill(0.0);
        self.phi_xx = PowerSpectrum::filled(self.fourier.len(), self.smoothing.floor);
    }

    /// Slides the far-end history by one block.
    ///
    /// The normalization tracks the far-end power summed over all `K`
    /// partitions, so the effective per-bin step does not grow with `K`.
    pub fn ingest_far_end(&mut self, far: &[f64]) -> Result<()> {
        let n = self.block_size();
        check_len(n, far.len())?;
        let mut window = Vec::with_capacity(2 * n);
        window.extend_from_slice(&self.last_far_block);
        window.extend_from_slice(far);
        let newest = self.fourier.forward_real(&window);
        self.far_history.push_newest(newest);
        self.last_far_block.copy_from_slice(far);

        let bins = self.fourier.len();
        let history = &self.far_history;
        let summed = (0..bins).map(|j| history.iter().map(|x| x.bins()[j].norm_sqr()).sum::<f64>());
        self.phi_xx.smooth_with(summed, self.smoothing);
        Ok(())
    }

    /// Echo estimate from the current history and weights.
    pub fn predict_echo(&self) -> EchoEstimate {
        let n = self.block_size();
        let mut acc = vec![Complex64::new(0.0, 0.0); self.fourier.len()];
        for (x, w) in self.far_history.iter().zip(self.weights.iter()) {
            for ((a, xb), wb) in acc.iter_mut().zip(x.bins()).zip(w.bins()) {
                *a += xb * wb;
            }
        }
        // Keeping only the last N samples is the output constraint; the
        // constrained spectrum is the transform of the zero-prefixed block.
        let time = self.fourier.inverse_real(&Spectrum::from_bins(acc));
        let samples = time[n..].to_vec();
        let spectrum = self.zero_prefixed_transform(&samples);
        let power = spectrum.power();
        EchoEstimate {
            samples,
            spectrum,
            power,
        }
    }

    /// `e = desired - predicted` and its zero-prefixed transform.
    pub fn form_error(&self, desired: &[f64], predicted: &[f64]) -> Result<ErrorFrame> {
        let n = self.block_size();
        check_len(n, desired.len())?;
        check_len(n, predicted.len())?;
        let samples: Vec<f64> = desired.iter().zip(predicted).map(|(d, y)| d - y).collect();
        let spectrum = self.zero_prefixed_transform(&samples);
        let power = spectrum.power();
        Ok(ErrorFrame {
            samples,
            spectrum,
            power,
        })
    }

    /// Normalized gradient `conj(X_k) * E / phi_xx` for every partition.
    pub fn compute_gradient(&mut self, error_spectrum: &Spectrum) -> Result<&PartitionedSpectra> {
        check_len(self.fourier.len(), error_spectrum.len())?;
        let e = error_spectrum.bins();
        let phi = self.phi_xx.powers();
        for (g, x) in self
            .last_gradient
            .partitions_mut()
            .iter_mut()
            .zip(self.far_history.iter())
        {
            for (j, gb) in g.bins_mut().iter_mut().enumerate() {
                *gb = x.bins()[j].conj() * e[j] / phi[j];
            }
        }
        Ok(&self.last_gradient)
    }

    /// `W_k += G2(mu * grad_k)` for every partition, then advances the frame
    /// counter. `mu` is one rate per bin, shared by all partitions.
    pub fn apply_update(&mut self, mu: &[f64]) -> Result<()> {
        check_len(self.fourier.len(), mu.len())?;
        if let Some((bin, &value)) = mu.iter().enumerate().find(|(_, m)| !(0.0..=1.0).contains(*m)) {
            return Err(AecError::RateOutOfRange { bin, value });
        }
        if mu.iter().any(|&m| m != 0.0) {
            for (w, g) in self.weights.partitions_mut().iter_mut().zip(self.last_gradient.iter()) {
                let scaled = Spectrum::from_bins(g.bins().iter().zip(mu).map(|(gb, m)| gb * m).collect());
                let step = self.fourier.constrain_gradient(&scaled)?;
                for (wb, sb) in w.bins_mut().iter_mut().zip(step.bins()) {
                    *wb += sb;
                }
            }
        }
        self.frame_index += 1;
        Ok(())
    }

    /// Time-domain taps `0..K*N`, taken from the first `N` samples of each
    /// weight partition.
    pub fn export_impulse_response(&self) -> Vec<f64> {
        let n = self.block_size();
        let mut taps = Vec::with_capacity(self.filter_len());
        for w in self.weights.iter() {
            taps.extend_from_slice(&self.fourier.inverse_real(w)[..n]);
        }
        taps
    }

    /// Replaces the weights with the given taps (zero-padded to `K * N`).
    pub fn load_impulse_response(&mut self, taps: &[f64]) -> Result<()> {
        let n = self.block_size();
        if taps.len() > self.filter_len() {
            return Err(AecError::config(format!(
                "{} taps exceed the modeled filter length {}",
                taps.len(),
                self.filter_len()
            )));
        }
        for (k, w) in self.weights.partitions_mut().iter_mut().enumerate() {
            let mut block = vec![0.0; 2 * n];
            let start = (k * n).min(taps.len());
            let end = ((k + 1) * n).min(taps.len());
            block[..end - start].copy_from_slice(&taps[start..end]);
            *w = self.fourier.forward_real(&block);
        }
        Ok(())
    }

    fn zero_prefixed_transform(&self, block: &[f64]) -> Spectrum {
        let n = self.block_size();
        let mut extended = vec![0.0; 2 * n];
        extended[n..].copy_from_slice(block);
        self.fourier.forward_real(&extended)
    }
}
