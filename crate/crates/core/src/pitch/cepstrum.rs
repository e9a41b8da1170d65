//! Real-cepstrum estimator: the quefrency of the strongest rahmonic.

use alloc::vec::Vec;

use super::lag::{first_strong_peak, lag_candidate, local_maxima, refine};
use super::spectrum::{hann, peak_ratio_confidence};
use super::{Candidate, SearchRange};
use crate::fft::{fft, real_fft, Complex};

/// Log-spectrum floor relative to the spectral peak (-60 dB).
const FLOOR: f64 = 1e-3;
/// Peak-to-mean ratio at which confidence saturates; a ratio of 6 maps to 0.5.
const SATURATION: f64 = 11.0;
const PEAK_RATIO: f64 = 0.8;

pub(crate) fn real_cepstrum(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let spec = real_fft(&hann(x), n);
    let peak = spec.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if !(peak > 0.0) {
        return alloc::vec![0.0; n];
    }
    let floor = FLOOR * peak;
    let mut logmag: Vec<Complex> = spec
        .iter()
        .map(|c| Complex::new(libm::log(c.norm() + floor), 0.0))
        .collect();
    fft(&mut logmag, true);
    logmag.iter().map(|c| c.re / n as f64).collect()
}

pub(crate) fn estimate(x: &[f64], range: &SearchRange) -> Candidate {
    let c = real_cepstrum(x);
    let lo = range.tau_min - 1;
    let hi = (range.tau_max + 1).min(x.len() / 2);
    let window = &c[lo..=hi];
    let peaks = local_maxima(window, lo, range);
    let Some(i) = first_strong_peak(window, &peaks, PEAK_RATIO) else {
        return Candidate::NONE;
    };
    let conf = peak_ratio_confidence(window[i], &window[1..window.len() - 1], SATURATION);
    lag_candidate(refine(window, lo, i), conf, range)
}
