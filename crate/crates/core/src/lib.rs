//! Streaming acoustic echo cancellation built on the multidelay block
//! frequency-domain (MDF) adaptive filter.
//!
//! The learning rate is controlled in closed loop: a per-bin rate
//! `min(eta * |Y_k|^2 / |E_k|^2, mu_max)` where the scalar `eta` is itself
//! adapted from the correlation of successive filter gradients. Two
//! comparison policies are provided (a fixed rate and a normalized
//! cross-correlation double-talk gate), together with a simulation harness
//! that synthesizes echo scenarios and measures ERLE and misalignment.
//!
//! Layering, bottom-up:
//!
//! * [`dsp`]: spectra, the transform engine and the constraint projections.
//! * [`mdf`]: the adaptive filter state and its per-frame steps.
//! * [`rate`]: learning-rate policies.
//! * [`canceller`]: the frame-in/frame-out engine.
//! * [`sim`]: scenario synthesis, metrics, sweeps and CSV output.

pub mod canceller;
pub mod dsp;
mod error;
pub mod mdf;
pub mod rate;
pub mod sim;

#[cfg(test)]
pub(crate) mod oracle;

pub use canceller::{CancellerConfig, EchoCanceller, FrameDiagnostics, PolicyKind};
pub use dsp::{Fourier, PartitionedSpectra, PowerSmoothing, PowerSpectrum, Spectrum};
pub use error::{AecError, Result};
pub use mdf::MdfFilter;
pub use rate::{NccParams, NccPolicy, ProposedParams, ProposedPolicy};
