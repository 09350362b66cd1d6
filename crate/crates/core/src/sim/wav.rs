use std::path::Path;

use crate::error::{AecError, Result};

/// Reads a mono 16-bit PCM RIFF file, scaling samples by `1/32768`.
pub fn read_wav_mono16(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let reader = hound::WavReader::open(path)?;
    let spec = reader.spec();
    if spec.channels != 1 || spec.bits_per_sample != 16 || spec.sample_format != hound::SampleFormat::Int {
        return Err(AecError::Wav(hound::Error::Unsupported));
    }
    reader
        .into_samples::<i16>()
        .map(|s| Ok(f64::from(s?) / 32768.0))
        .collect()
}
