//! Learning-rate policies.
//!
//! * [`ProposedPolicy`]: closed-loop rate. Per bin
//!   `mu_k = min(eta * |Y_k|^2 / |E_k|^2, mu_max)`, where `eta` follows a
//!   multiplicative update driven by the sign agreement between the current
//!   gradient and a smoothed history of past gradients.
//! * [`NccPolicy`]: fixed rate gated by a normalized cross-correlation
//!   double-talk detector.
//! * [`fixed_rate`]: constant rate, no detection.

use crate::dsp::{PartitionedSpectra, PowerSpectrum};
use crate::error::{AecError, Result};

/// Warm-up phase that applies a fixed rate until enough active far-end
/// samples have been observed (twice the filter length by default).
#[derive(Debug, Clone, PartialEq)]
pub struct Bootstrap {
    active_samples: u64,
    span: u64,
    threshold: f64,
}

impl Bootstrap {
    pub fn new(span: u64, threshold: f64) -> Self {
        Self {
            active_samples: 0,
            span,
            threshold,
        }
    }

    /// Counts far-end samples whose magnitude exceeds the activity threshold.
    pub fn tick(&mut self, far: &[f64]) {
        if self.is_active() {
            let active = far.iter().filter(|x| x.abs() > self.threshold).count() as u64;
            self.active_samples = (self.active_samples + active).min(self.span);
        }
    }

    pub fn is_active(&self) -> bool {
        self.active_samples < self.span
    }

    pub fn active_samples(&self) -> u64 {
        self.active_samples
    }

    pub fn reset(&mut self) {
        self.active_samples = 0;
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProposedParams {
    /// Step size of the multiplicative `eta` update.
    pub rho: f64,
    /// Gradient smoothing factor.
    pub alpha: f64,
    /// Ceiling on every per-bin rate.
    pub mu_max: f64,
    /// Rate used while bootstrapping.
    pub bootstrap_mu: f64,
    pub eta_init: f64,
    pub eta_min: f64,
    pub eta_max: f64,
    /// Far-end amplitude above which a sample counts as active.
    pub activity_threshold: f64,
    /// Denominators below this leave `eta` unchanged.
    pub floor: f64,
}

impl Default for ProposedParams {
    fn default() -> Self {
        Self {
            rho: 1.0,
            alpha: 0.9,
            mu_max: 0.75,
            bootstrap_mu: 0.25,
            eta_init: 0.1,
            eta_min: 1e-4,
            eta_max: 1.0,
            activity_threshold: 1e-5,
            floor: 1e-6,
        }
    }
}

impl ProposedParams {
    pub fn validate(&self) -> Result<()> {
        let unit = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(AecError::config(format!("{name} = {v} must lie in [0, 1]")))
            }
        };
        unit("mu_max", self.mu_max)?;
        unit("bootstrap_mu", self.bootstrap_mu)?;
        unit("alpha", self.alpha)?;
        if !(self.rho >= 0.0 && self.rho.is_finite()) {
            return Err(AecError::config(format!("rho = {} must be non-negative", self.rho)));
        }
        if !(self.eta_min > 0.0 && self.eta_min <= self.eta_max && self.eta_max.is_finite()) {
            return Err(AecError::config(format!(
                "eta bounds [{}, {}] must satisfy 0 < eta_min <= eta_max",
                self.eta_min, self.eta_max
            )));
        }
        if !(self.eta_min..=self.eta_max).contains(&self.eta_init) {
            return Err(AecError::config(format!(
                "eta_init = {} outside [{}, {}]",
                self.eta_init, self.eta_min, self.eta_max
            )));
        }
        if self.floor.is_nan() || self.floor <= 0.0 || self.activity_threshold.is_nan() || self.activity_threshold < 0.0
        {
            return Err(AecError::config(
                "floor must be positive and activity threshold non-negative",
            ));
        }
        Ok(())
    }
}

/// Closed-loop gradient-adaptive learning rate.
#[derive(Debug, Clone)]
pub struct ProposedPolicy {
    params: ProposedParams,
    eta: f64,
    psi: PartitionedSpectra,
    bootstrap: Bootstrap,
}

impl ProposedPolicy {
    /// `partitions` and `bins` give the gradient shape; the bootstrap spans
    /// `2 * filter_len` active samples.
    pub fn new(params: ProposedParams, partitions: usize, bins: usize, filter_len: usize) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            params,
            eta: params.eta_init,
            psi: PartitionedSpectra::zeros(partitions, bins),
            bootstrap: Bootstrap::new(2 * filter_len as u64, params.activity_threshold),
        })
    }

    pub fn params(&self) -> &ProposedParams {
        &self.params
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn psi(&self) -> &PartitionedSpectra {
        &self.psi
    }

    pub fn bootstrap(&self) -> &Bootstrap {
        &self.bootstrap
    }

    pub fn bootstrap_active(&self) -> bool {
        self.bootstrap.is_active()
    }

    pub fn bootstrap_tick(&mut self, far: &[f64]) {
        self.bootstrap.tick(far);
    }

    pub fn reset(&mut self) {
        self.eta = self.params.eta_init;
        self.psi.clear();
        self.bootstrap.reset();
    }

    /// Per-bin rate `min(eta * |Y_k|^2 / |E_k|^2, mu_max)`, or the constant
    /// bootstrap rate while bootstrapping. Both power spectra are expected
    /// to be floored upstream.
    pub fn compute_mu(&self, echo_power: &PowerSpectrum, error_power: &PowerSpectrum) -> Vec<f64> {
        if self.bootstrap.is_active() {
            return vec![self.params.bootstrap_mu; echo_power.len()];
        }
        echo_power
            .powers()
            .iter()
            .zip(error_power.powers())
            .map(|(&y, &e)| {
                let mu = self.eta * y / e;
                // NaN (0/0) and negative inputs collapse to 0.
                if mu > 0.0 {
                    mu.min(self.params.mu_max)
                } else {
                    0.0
                }
            })
            .collect()
    }

    /// Multiplicative `eta` update followed by gradient smoothing.
    ///
    /// `echo_total` and `error_total` are the summed echo and error powers;
    /// their ratio, capped at one, weights the exponent.
    pub fn update_eta(&mut self, gradient: &PartitionedSpectra, echo_total: f64, error_total: f64) {
        let mut aligned = 0.0;
        let mut magnitude = 0.0;
        for (psi, grad) in self.psi.iter().zip(gradient.iter()) {
            for (p, g) in psi.bins().iter().zip(grad.bins()) {
                let re = (p.conj() * g).re;
                aligned += re;
                magnitude += re.abs();
            }
        }
        if magnitude >= self.params.floor {
            let ratio = if error_total > 0.0 {
                (echo_total / error_total).min(1.0)
            } else {
                1.0
            };
            let exponent = self.params.rho * ratio * aligned / magnitude;
            self.eta = (self.eta * exponent.exp()).clamp(self.params.eta_min, self.params.eta_max);
        }
        self.smooth_gradient(gradient);
    }

    /// `psi <- alpha * psi + gradient`.
    pub fn smooth_gradient(&mut self, gradient: &PartitionedSpectra) {
        let alpha = self.params.alpha;
        for (psi, grad) in self.psi.partitions_mut().iter_mut().zip(gradient.iter()) {
            for (p, g) in psi.bins_mut().iter_mut().zip(grad.bins()) {
                *p = alpha * *p + g;
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NccParams {
    /// Adaptation freezes when the statistic drops below this.
    pub threshold: f64,
    /// Rate used when no double-talk is detected.
    pub mu_on: f64,
    /// Per-frame forgetting factor of the correlation accumulators.
    pub window: f64,
    /// Frames the freeze is held after a detection.
    pub hangover_frames: u32,
    pub floor: f64,
    /// Same warm-up as the proposed policy; the statistic is meaningless
    /// while the echo estimate is still zero.
    pub bootstrap_mu: f64,
    pub activity_threshold: f64,
}

impl Default for NccParams {
    fn default() -> Self {
        Self {
            threshold: 0.35,
            mu_on: 0.25,
            window: 0.95,
            hangover_frames: 8,
            floor: 1e-6,
            bootstrap_mu: 0.25,
            activity_threshold: 1e-5,
        }
    }
}

impl NccParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.mu_on) || !(0.0..=1.0).contains(&self.bootstrap_mu) {
            return Err(AecError::config("NCC rates must lie in [0, 1]"));
        }
        if !(self.window > 0.0 && self.window < 1.0) {
            return Err(AecError::config(format!(
                "NCC window {} must lie in (0, 1)",
                self.window
            )));
        }
        if self.floor.is_nan() || self.floor <= 0.0 {
            return Err(AecError::config("NCC floor must be positive"));
        }
        Ok(())
    }
}

/// Normalized cross-correlation double-talk gate:
/// `xi = E{y*d} / sqrt(E{y^2} E{d^2} + floor)` over exponentially weighted
/// frame sums.
#[derive(Debug, Clone)]
pub struct NccPolicy {
    params: NccParams,
    cross: f64,
    echo_energy: f64,
    mic_energy: f64,
    statistic: f64,
    hold: u32,
    bootstrap: Bootstrap,
}

impl NccPolicy {
    pub fn new(params: NccParams, filter_len: usize) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            params,
            cross: 0.0,
            echo_energy: 0.0,
            mic_energy: 0.0,
            statistic: 0.0,
            hold: 0,
            bootstrap: Bootstrap::new(2 * filter_len as u64, params.activity_threshold),
        })
    }

    pub fn params(&self) -> &NccParams {
        &self.params
    }

    /// Most recent detection statistic.
    pub fn statistic(&self) -> f64 {
        self.statistic
    }

    pub fn bootstrap_active(&self) -> bool {
        self.bootstrap.is_active()
    }

    pub fn bootstrap_tick(&mut self, far: &[f64]) {
        self.bootstrap.tick(far);
    }

    /// True while adaptation is frozen by a detection or its hangover.
    pub fn frozen(&self) -> bool {
        self.hold > 0
    }

    pub fn reset(&mut self) {
        self.cross = 0.0;
        self.echo_energy = 0.0;
        self.mic_energy = 0.0;
        self.statistic = 0.0;
        self.hold = 0;
        self.bootstrap.reset();
    }

    /// Updates the statistic from this frame's echo estimate and microphone
    /// block and returns a uniform rate over `bins`.
    pub fn compute_mu(&mut self, echo: &[f64], mic: &[f64], bins: usize) -> Vec<f64> {
        let w = self.params.window;
        let (mut yd, mut yy, mut dd) = (0.0, 0.0, 0.0);
        for (y, d) in echo.iter().zip(mic) {
            yd += y * d;
            yy += y * y;
            dd += d * d;
        }
        self.cross = w * self.cross + yd;
        self.echo_energy = w * self.echo_energy + yy;
        self.mic_energy = w * self.mic_energy + dd;
        self.statistic = self.cross / (self.echo_energy * self.mic_energy + self.params.floor).sqrt();

        if self.bootstrap.is_active() {
            return vec![self.params.bootstrap_mu; bins];
        }
        if self.statistic < self.params.threshold {
            self.hold = self.params.hangover_frames + 1;
        }
        let mu = if self.hold > 0 {
            self.hold -= 1;
            0.0
        } else {
            self.params.mu_on
        };
        vec![mu; bins]
    }
}

/// A constant rate vector, e.g. the no-detection baseline.
pub fn fixed_rate(mu: f64, bins: usize) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&mu) {
        return Err(AecError::config(format!("fixed rate {mu} must lie in [0, 1]")));
    }
    Ok(vec![mu; bins])
}
