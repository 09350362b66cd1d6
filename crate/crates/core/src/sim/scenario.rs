use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{AecError, Result};

/// RMS amplitude of the synthetic far-end and near-end noise sources.
pub const FAR_LEVEL: f64 = 0.1;

const DEFAULT_DECAY_MS: f64 = 25.0;
const IR_LEN: usize = 1024;

/// Share of the second echo path's energy that is new after the change.
pub const PATH_CHANGE_FRACTION: f64 = 0.5;

const STREAM_IR_A: u64 = 1;
const STREAM_IR_B: u64 = 2;
const STREAM_FAR: u64 = 3;
const STREAM_NEAR: u64 = 4;
const STREAM_NOISE: u64 = 5;

/// Signal source for the far end or the near-end talker.
#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    /// Stationary white Gaussian noise at [`FAR_LEVEL`].
    WhiteNoise,
    /// White noise switched off for `off_s`, then on for `on_s`, repeating.
    GatedNoise { on_s: f64, off_s: f64 },
    /// Recorded samples, truncated or zero-padded to the scenario length.
    Samples(Arc<[f64]>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub sample_rate: f64,
    pub duration_s: f64,
    /// When the echo path switches from the first response to the second;
    /// `None` keeps the first response for the whole run.
    pub path_change_at_s: Option<f64>,
    pub impulse_responses: [Vec<f64>; 2],
    /// Near-end talker power relative to the echo power, over the whole
    /// file. `-inf` disables the talker.
    pub nfr_db: f64,
    /// Background noise power relative to the echo power. `-inf` disables it.
    pub noise_db: f64,
    pub far_source: Source,
    pub near_source: Source,
    pub seed: u64,
    pub block_size: usize,
    pub partitions: usize,
}

impl ScenarioConfig {
    /// 32 s at 8 kHz, 1024-tap responses switching at 16 s, 0 dB talker
    /// bursts, background noise 20 dB below the echo. The second response
    /// keeps part of the first; see [`blend_responses`].
    pub fn nominal(seed: u64) -> Self {
        let sample_rate = 8000.0;
        let first = gen_impulse_response(derive_seed(seed, STREAM_IR_A), IR_LEN, DEFAULT_DECAY_MS, sample_rate);
        let fresh = gen_impulse_response(derive_seed(seed, STREAM_IR_B), IR_LEN, DEFAULT_DECAY_MS, sample_rate);
        let second = blend_responses(&first, &fresh, PATH_CHANGE_FRACTION);
        Self {
            sample_rate,
            duration_s: 32.0,
            path_change_at_s: Some(16.0),
            impulse_responses: [first, second],
            nfr_db: 0.0,
            noise_db: -20.0,
            far_source: Source::WhiteNoise,
            near_source: Source::GatedNoise { on_s: 1.0, off_s: 1.0 },
            seed,
            block_size: 64,
            partitions: 16,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sample_rate > 0.0 && self.sample_rate.is_finite()) {
            return Err(AecError::config(format!(
                "sample rate {} must be positive",
                self.sample_rate
            )));
        }
        if !(self.duration_s > 0.0 && self.duration_s.is_finite()) {
            return Err(AecError::config(format!(
                "duration {} must be positive",
                self.duration_s
            )));
        }
        if let Some(t) = self.path_change_at_s {
            if !(t >= 0.0 && t < self.duration_s) {
                return Err(AecError::config(format!(
                    "path change at {t} s must lie within the {} s run",
                    self.duration_s
                )));
            }
        }
        if self.block_size == 0 || !self.block_size.is_power_of_two() {
            return Err(AecError::config(format!(
                "block size {} must be a power of two",
                self.block_size
            )));
        }
        if self.partitions == 0 {
            return Err(AecError::config("at least one partition is required"));
        }
        let filter_len = self.block_size * self.partitions;
        for h in &self.impulse_responses {
            if h.is_empty() || h.len() > filter_len {
                return Err(AecError::config(format!(
                    "impulse response length {} must be in 1..={filter_len}",
                    h.len()
                )));
            }
        }
        if self.nfr_db.is_nan()
            || self.noise_db.is_nan()
            || self.nfr_db == f64::INFINITY
            || self.noise_db == f64::INFINITY
        {
            return Err(AecError::config("signal levels must be finite or -inf"));
        }
        for src in [&self.far_source, &self.near_source] {
            if let Source::GatedNoise { on_s, off_s } = src {
                if !(*on_s > 0.0 && *off_s >= 0.0) {
                    return Err(AecError::config("gated source needs a positive on-time"));
                }
            }
        }
        if self.frames() == 0 {
            return Err(AecError::config("scenario is shorter than one block"));
        }
        Ok(())
    }

    /// Whole frames covered by the run.
    pub fn frames(&self) -> usize {
        (self.duration_s * self.sample_rate).round() as usize / self.block_size
    }

    pub fn total_samples(&self) -> usize {
        self.frames() * self.block_size
    }

    pub fn path_change_sample(&self) -> Option<usize> {
        self.path_change_at_s.map(|t| (t * self.sample_rate).round() as usize)
    }

    /// The echo path in force at `sample`.
    pub fn response_at(&self, sample: usize) -> &[f64] {
        match self.path_change_sample() {
            Some(c) if sample >= c => &self.impulse_responses[1],
            _ => &self.impulse_responses[0],
        }
    }
}

/// Gaussian taps under an `exp(-t / decay)` envelope, scaled to unit energy.
pub fn gen_impulse_response(seed: u64, length: usize, decay_ms: f64, sample_rate: f64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let decay = decay_ms * sample_rate / 1000.0;
    let mut taps: Vec<f64> = (0..length)
        .map(|t| {
            let g: f64 = rng.sample(StandardNormal);
            let envelope = if decay > 0.0 {
                (-(t as f64) / decay).exp()
            } else if t == 0 {
                1.0
            } else {
                0.0
            };
            g * envelope
        })
        .collect();
    let energy: f64 = taps.iter().map(|t| t * t).sum();
    if energy > 0.0 {
        let scale = energy.sqrt().recip();
        taps.iter_mut().for_each(|t| *t *= scale);
    }
    taps
}

/// `sqrt(1 - fraction) * old + sqrt(fraction) * fresh`. With unit-energy,
/// uncorrelated inputs the result has unit energy in expectation; a
/// fraction of 1 replaces the path outright.
pub fn blend_responses(old: &[f64], fresh: &[f64], fraction: f64) -> Vec<f64> {
    let (a, b) = ((1.0 - fraction).sqrt(), fraction.sqrt());
    let len = old.len().max(fresh.len());
    let at = |v: &[f64], i: usize| v.get(i).copied().unwrap_or(0.0);
    (0..len).map(|i| a * at(old, i) + b * at(fresh, i)).collect()
}

/// Every signal of a synthesized scenario, `total_samples()` long each.
#[derive(Debug, Clone)]
pub struct Streams {
    pub far: Vec<f64>,
    /// Microphone: `echo + near`.
    pub mic: Vec<f64>,
    /// Clean echo `y`.
    pub echo: Vec<f64>,
    /// Near-end talker plus background noise `v`.
    pub near: Vec<f64>,
    /// Per sample: the near-end talker (not the noise) is active.
    pub talker_active: Vec<bool>,
}

pub fn synthesize(config: &ScenarioConfig) -> Result<Streams> {
    config.validate()?;
    let len = config.total_samples();
    let fs = config.sample_rate;

    let far = render(&config.far_source, len, fs, derive_seed(config.seed, STREAM_FAR));
    let echo = convolve_switching(&far, config);
    let echo_energy: f64 = echo.iter().map(|y| y * y).sum();

    let mut talker = render(&config.near_source, len, fs, derive_seed(config.seed, STREAM_NEAR));
    scale_to(&mut talker, echo_energy, config.nfr_db);
    let mut noise = render(&Source::WhiteNoise, len, fs, derive_seed(config.seed, STREAM_NOISE));
    scale_to(&mut noise, echo_energy, config.noise_db);

    let talker_active = talker.iter().map(|&v| v != 0.0).collect();
    let near: Vec<f64> = talker.iter().zip(&noise).map(|(a, b)| a + b).collect();
    let mic = echo.iter().zip(&near).map(|(y, v)| y + v).collect();
    Ok(Streams {
        far,
        mic,
        echo,
        near,
        talker_active,
    })
}

fn derive_seed(seed: u64, stream: u64) -> u64 {
    seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

fn render(source: &Source, len: usize, fs: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match source {
        Source::WhiteNoise => (0..len)
            .map(|_| FAR_LEVEL * rng.sample::<f64, _>(StandardNormal))
            .collect(),
        Source::GatedNoise { on_s, off_s } => {
            let period = on_s + off_s;
            (0..len)
                .map(|i| {
                    let g: f64 = rng.sample(StandardNormal);
                    let phase = (i as f64 / fs) % period;
                    if phase >= *off_s {
                        FAR_LEVEL * g
                    } else {
                        0.0
                    }
                })
                .collect()
        }
        Source::Samples(s) => {
            let mut out = vec![0.0; len];
            let n = s.len().min(len);
            out[..n].copy_from_slice(&s[..n]);
            out
        }
    }
}

/// Rescales `signal` so its energy is `reference * 10^(db/10)`.
fn scale_to(signal: &mut [f64], reference: f64, db: f64) {
    let energy: f64 = signal.iter().map(|v| v * v).sum();
    let gain = if energy > 0.0 && db.is_finite() {
        (reference * 10f64.powf(db / 10.0) / energy).sqrt()
    } else {
        0.0
    };
    signal.iter_mut().for_each(|v| *v *= gain);
}

/// `y[t] = sum_m h_t[m] x[t - m]`, where `h_t` is the response in force at `t`.
fn convolve_switching(far: &[f64], config: &ScenarioConfig) -> Vec<f64> {
    let mut echo = vec![0.0; far.len()];
    echo.par_chunks_mut(4096).enumerate().for_each(|(chunk, out)| {
        let start = chunk * 4096;
        for (i, y) in out.iter_mut().enumerate() {
            let t = start + i;
            let h = config.response_at(t);
            let taps = h.len().min(t + 1);
            *y = h[..taps].iter().zip(far[..=t].iter().rev()).map(|(a, b)| a * b).sum();
        }
    });
    echo
}
