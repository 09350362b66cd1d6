use crate::error::{check_len, AecError, Result};

pub const ERLE_FLOOR_DB: f64 = -20.0;
pub const ERLE_CEILING_DB: f64 = 100.0;
pub const MISALIGNMENT_FLOOR_DB: f64 = -100.0;
const MISALIGNMENT_CEILING_DB: f64 = 100.0;

/// `10 log10(echo_energy / residual_energy)`, clamped to
/// `[ERLE_FLOOR_DB, ERLE_CEILING_DB]`. No echo and no residual reads 0 dB.
pub fn erle_db(echo_energy: f64, residual_energy: f64) -> f64 {
    if echo_energy == 0.0 && residual_energy == 0.0 {
        return 0.0;
    }
    let db = 10.0 * (echo_energy / residual_energy).log10();
    if db.is_nan() {
        return 0.0;
    }
    db.clamp(ERLE_FLOOR_DB, ERLE_CEILING_DB)
}

/// Per-frame ERLE over a sliding window of the last `window_frames` frames
/// (current frame included), using the clean echo `echo` and the
/// canceller's estimate `estimate`.
pub fn erle_series(echo: &[f64], estimate: &[f64], block_size: usize, window_frames: usize) -> Result<Vec<f64>> {
    check_len(echo.len(), estimate.len())?;
    if block_size == 0 || window_frames == 0 {
        return Err(AecError::config("ERLE block size and window must be positive"));
    }
    let frames = echo.len() / block_size;
    let per_frame: Vec<(f64, f64)> = (0..frames)
        .map(|f| {
            let span = f * block_size..(f + 1) * block_size;
            echo[span.clone()]
                .iter()
                .zip(&estimate[span])
                .fold((0.0, 0.0), |(ey, er), (y, yh)| (ey + y * y, er + (y - yh) * (y - yh)))
        })
        .collect();
    Ok((0..frames)
        .map(|f| {
            let start = (f + 1).saturating_sub(window_frames);
            let (ey, er) = per_frame[start..=f]
                .iter()
                .fold((0.0, 0.0), |(a, b), (y, r)| (a + y, b + r));
            erle_db(ey, er)
        })
        .collect())
}

/// Normalized misalignment `10 log10(|h - h_est|^2 / |h|^2)`. The shorter
/// response is zero-padded; the result is clamped at
/// [`MISALIGNMENT_FLOOR_DB`].
pub fn misalignment_db(h_true: &[f64], estimate: &[f64]) -> f64 {
    let len = h_true.len().max(estimate.len());
    let at = |v: &[f64], i: usize| v.get(i).copied().unwrap_or(0.0);
    let (mut diff, mut norm) = (0.0, 0.0);
    for i in 0..len {
        let h = at(h_true, i);
        let d = h - at(estimate, i);
        diff += d * d;
        norm += h * h;
    }
    if diff == 0.0 {
        return MISALIGNMENT_FLOOR_DB;
    }
    (10.0 * (diff / norm).log10()).clamp(MISALIGNMENT_FLOOR_DB, MISALIGNMENT_CEILING_DB)
}
