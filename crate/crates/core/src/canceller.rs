//! Frame-in/frame-out echo canceller combining the MDF filter with a
//! learning-rate policy.

use std::fmt;

use crate::dsp::{update_power, PowerSmoothing, PowerSpectrum};
use crate::error::{check_len, AecError, Result};
use crate::mdf::MdfFilter;
use crate::rate::{fixed_rate, NccParams, NccPolicy, ProposedParams, ProposedPolicy};

/// Which learning-rate policy drives adaptation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PolicyKind {
    /// Closed-loop gradient-adaptive rate.
    Proposed,
    /// Constant rate with no double-talk detection.
    Fixed(f64),
    /// Constant rate gated by the normalized cross-correlation detector.
    Ncc,
}

impl PolicyKind {
    pub fn name(&self) -> &'static str {
        match self {
            PolicyKind::Proposed => "proposed",
            PolicyKind::Fixed(_) => "fixed",
            PolicyKind::Ncc => "ncc",
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CancellerConfig {
    pub block_size: usize,
    pub partitions: usize,
    pub policy: PolicyKind,
    /// Smoothing for the far-end normalization and the echo/error powers.
    pub smoothing: PowerSmoothing,
    pub proposed: ProposedParams,
    pub ncc: NccParams,
}

impl Default for CancellerConfig {
    fn default() -> Self {
        Self {
            block_size: 64,
            partitions: 16,
            policy: PolicyKind::Proposed,
            smoothing: PowerSmoothing::default(),
            proposed: ProposedParams::default(),
            ncc: NccParams::default(),
        }
    }
}

impl CancellerConfig {
    pub fn with_policy(policy: PolicyKind) -> Self {
        Self {
            policy,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.block_size == 0 || !self.block_size.is_power_of_two() {
            return Err(AecError::config(format!(
                "block size {} must be a power of two",
                self.block_size
            )));
        }
        if self.partitions == 0 {
            return Err(AecError::config("at least one partition is required"));
        }
        self.smoothing.validate()?;
        self.proposed.validate()?;
        self.ncc.validate()?;
        if let PolicyKind::Fixed(mu) = self.policy {
            fixed_rate(mu, 0)?;
        }
        Ok(())
    }
}

/// Per-frame observability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameDiagnostics {
    /// Current `eta`; `None` for policies that do not track one.
    pub eta: Option<f64>,
    pub mu_mean: f64,
    /// Sum of squared output (error) samples.
    pub residual_energy: f64,
    /// Sum of squared echo-estimate samples.
    pub prediction_energy: f64,
    pub bootstrap_active: bool,
}

#[derive(Debug, Clone)]
enum Policy {
    Proposed(ProposedPolicy),
    Fixed(f64),
    Ncc(NccPolicy),
}

#[derive(Debug, Clone)]
pub struct EchoCanceller {
    config: CancellerConfig,
    filter: MdfFilter,
    policy: Policy,
    echo_power: PowerSpectrum,
    error_power: PowerSpectrum,
    echo_estimate: Vec<f64>,
}

impl EchoCanceller {
    pub fn new(config: CancellerConfig) -> Result<Self> {
        config.validate()?;
        let filter = MdfFilter::new(config.block_size, config.partitions, config.smoothing)?;
        let bins = filter.fourier().len();
        let policy = match config.policy {
            PolicyKind::Proposed => Policy::Proposed(ProposedPolicy::new(
                config.proposed,
                config.partitions,
                bins,
                filter.filter_len(),
            )?),
            PolicyKind::Fixed(mu) => Policy::Fixed(mu),
            PolicyKind::Ncc => Policy::Ncc(NccPolicy::new(config.ncc, filter.filter_len())?),
        };
        let floor = config.smoothing.floor;
        Ok(Self {
            echo_power: PowerSpectrum::filled(bins, floor),
            error_power: PowerSpectrum::filled(bins, floor),
            echo_estimate: vec![0.0; config.block_size],
            config,
            filter,
            policy,
        })
    }

    pub fn config(&self) -> &CancellerConfig {
        &self.config
    }

    pub fn filter(&self) -> &MdfFilter {
        &self.filter
    }

    pub fn block_size(&self) -> usize {
        self.config.block_size
    }

    /// Echo estimate subtracted in the most recent frame.
    pub fn echo_estimate(&self) -> &[f64] {
        &self.echo_estimate
    }

    /// Smoothed per-bin echo-estimate power.
    pub fn echo_power(&self) -> &PowerSpectrum {
        &self.echo_power
    }

    /// Smoothed per-bin error power.
    pub fn error_power(&self) -> &PowerSpectrum {
        &self.error_power
    }

    pub fn eta(&self) -> Option<f64> {
        match &self.policy {
            Policy::Proposed(p) => Some(p.eta()),
            _ => None,
        }
    }

    /// Processes one block of far-end and microphone samples and returns the
    /// echo-cancelled output.
    pub fn process_frame(&mut self, far: &[f64], mic: &[f64]) -> Result<(Vec<f64>, FrameDiagnostics)> {
        let n = self.config.block_size;
        check_len(n, far.len())?;
        check_len(n, mic.len())?;
        let bins = 2 * n;
        let smoothing = self.config.smoothing;

        self.filter.ingest_far_end(far)?;
        let echo = self.filter.predict_echo();
        let error = self.filter.form_error(mic, &echo.samples)?;
        update_power(&mut self.echo_power, &echo.spectrum, smoothing)?;
        update_power(&mut self.error_power, &error.spectrum, smoothing)?;

        let (mu, bootstrap_active) = match &mut self.policy {
            Policy::Proposed(p) => {
                p.bootstrap_tick(far);
                (p.compute_mu(&self.echo_power, &self.error_power), p.bootstrap_active())
            }
            Policy::Fixed(mu) => (fixed_rate(*mu, bins)?, false),
            Policy::Ncc(p) => {
                p.bootstrap_tick(far);
                let active = p.bootstrap_active();
                (p.compute_mu(&echo.samples, mic, bins), active)
            }
        };

        self.filter.compute_gradient(&error.spectrum)?;
        self.filter.apply_update(&mu)?;
        if let Policy::Proposed(p) = &mut self.policy {
            p.update_eta(
                self.filter.last_gradient(),
                self.echo_power.total(),
                self.error_power.total(),
            );
        }

        let diagnostics = FrameDiagnostics {
            eta: self.eta(),
            mu_mean: mu.iter().sum::<f64>() / bins as f64,
            residual_energy: error.samples.iter().map(|e| e * e).sum(),
            prediction_energy: echo.samples.iter().map(|y| y * y).sum(),
            bootstrap_active,
        };
        self.echo_estimate = echo.samples;
        Ok((error.samples, diagnostics))
    }

    /// Back to the freshly constructed state.
    pub fn reset(&mut self) {
        self.filter.reset();
        match &mut self.policy {
            Policy::Proposed(p) => p.reset(),
            Policy::Fixed(_) => {}
            Policy::Ncc(p) => p.reset(),
        }
        let floor = self.config.smoothing.floor;
        let bins = self.echo_power.len();
        self.echo_power = PowerSpectrum::filled(bins, floor);
        self.error_power = PowerSpectrum::filled(bins, floor);
        self.echo_estimate.fill(0.0);
    }
}
