//! Harmonic product spectrum over the first four harmonics, evaluated in the
//! log domain on a 4x zero-padded spectrum.
//!
//! Candidate fundamentals are restricted to peaks of the magnitude spectrum.
//! Without that, a pure tone ties with its own sub-harmonics, since each of
//! them has the tone as one of its harmonics.

use alloc::vec::Vec;

use super::lag::parabolic_offset;
use super::spectrum::{interpolate, magnitude, peak_ratio_confidence};
use super::{Candidate, SearchRange};

pub const HARMONICS: usize = 4;
const PAD: usize = 4;
const FLOOR: f64 = 1e-3;
/// Spectral peaks weaker than this fraction of the strongest in-range peak
/// are not considered as fundamentals.
const FUNDAMENTAL_FRACTION: f64 = 0.1;
const SATURATION: f64 = 6.0;

/// Geometric mean of the (floored) magnitudes at the first harmonics of bin `pos`.
fn harmonic_mean(mags: &[f64], pos: f64, floor: f64) -> f64 {
    let log_sum: f64 = (1..=HARMONICS)
        .map(|h| libm::log(interpolate(mags, h as f64 * pos) + floor))
        .sum();
    libm::exp(log_sum / HARMONICS as f64)
}

pub(crate) fn estimate(x: &[f64], range: &SearchRange) -> Candidate {
    let (mags, bin_hz) = magnitude(x, PAD, range.sample_rate);
    let peak = mags.iter().copied().fold(0.0, f64::max);
    if !(peak > 0.0) {
        return Candidate::NONE;
    }
    let floor = FLOOR * peak;
    let k_lo = (libm::ceil(range.f_min / bin_hz) as usize).max(1);
    let k_hi = (libm::floor(range.f_max / bin_hz) as usize).min((mags.len() - 2) / HARMONICS);
    if k_lo >= k_hi {
        return Candidate::NONE;
    }
    let in_band_peak = mags[k_lo..=k_hi].iter().copied().fold(0.0, f64::max);

    let mut best: Option<(f64, f64)> = None;
    for k in k_lo..=k_hi {
        let is_peak = mags[k] >= mags[k - 1] && mags[k] > mags[k + 1];
        if !is_peak || mags[k] < FUNDAMENTAL_FRACTION * in_band_peak {
            continue;
        }
        let pos = k as f64 + parabolic_offset(mags[k - 1], mags[k], mags[k + 1]);
        let score = harmonic_mean(&mags, pos, floor);
        if best.is_none_or(|(_, s)| score > s) {
            best = Some((pos, score));
        }
    }
    let Some((pos, score)) = best else {
        return Candidate::NONE;
    };
    let baseline: Vec<f64> = (k_lo..=k_hi).map(|k| harmonic_mean(&mags, k as f64, floor)).collect();
    Candidate {
        f0_hz: Some(pos * bin_hz),
        confidence: peak_ratio_confidence(score, &baseline, SATURATION),
    }
}
