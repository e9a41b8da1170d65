//! Windowed magnitude spectra for the frequency-domain estimators.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::fft::real_fft;

pub(crate) fn hann(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    x.iter()
        .enumerate()
        .map(|(i, v)| v * 0.5 * (1.0 - libm::cos(2.0 * PI * i as f64 / n as f64)))
        .collect()
}

/// Magnitude spectrum of the Hann-windowed frame, zero-padded by `pad`.
/// Returns the bins up to Nyquist and the bin width in Hz.
pub(crate) fn magnitude(x: &[f64], pad: usize, sample_rate: f64) -> (Vec<f64>, f64) {
    let size = x.len() * pad;
    let spec = real_fft(&hann(x), size);
    let mags = spec[..=size / 2].iter().map(|c| c.norm()).collect();
    (mags, sample_rate / size as f64)
}

/// Linear interpolation of `mags` at fractional bin `pos`; zero past the end.
pub(crate) fn interpolate(mags: &[f64], pos: f64) -> f64 {
    if pos < 0.0 {
        return 0.0;
    }
    let i = libm::floor(pos) as usize;
    if i + 1 >= mags.len() {
        return 0.0;
    }
    let frac = pos - i as f64;
    mags[i] * (1.0 - frac) + mags[i + 1] * frac
}

/// Maps a peak-to-mean ratio onto `[0, 1]`: a ratio of 1 (no peak) gives 0,
/// `saturation` or more gives 1.
pub(crate) fn peak_ratio_confidence(peak: f64, values: &[f64], saturation: f64) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mean = values.iter().map(|v| v.abs()).sum::<f64>() / values.len() as f64;
    if !(mean > 0.0) || !peak.is_finite() {
        return 0.0;
    }
    ((peak / mean - 1.0) / (saturation - 1.0)).clamp(0.0, 1.0)
}
