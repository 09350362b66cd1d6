use thiserror::Error;

pub type Result<T, E = AecError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum AecError {
    #[error("size mismatch: expected {expected} samples, got {actual}")]
    SizeMismatch { expected: usize, actual: usize },

    #[error("spectrum is not Hermitian (deviation {deviation:e} exceeds {tolerance:e})")]
    NotHermitian { deviation: f64, tolerance: f64 },

    #[error("learning rate {value} at bin {bin} is outside [0, 1]")]
    RateOutOfRange { bin: usize, value: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("WAV error: {0}")]
    Wav(#[from] hound::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

impl AecError {
    /// True for failures caused by reading or writing external files.
    pub fn is_io(&self) -> bool {
        matches!(self, AecError::Io(_) | AecError::Wav(_) | AecError::Csv(_))
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        AecError::InvalidConfig(msg.into())
    }
}

pub(crate) fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(AecError::SizeMismatch { expected, actual })
    }
}
