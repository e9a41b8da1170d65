//! Autocorrelation estimator over a fixed analysis window.

use alloc::vec::Vec;

use super::lag::{first_strong_peak, lag_candidate, local_maxima, refine, square_prefix};
use super::{Candidate, SearchRange};
use crate::fft::cross_correlate_head;

const PEAK_RATIO: f64 = 0.9;

/// Normalized correlation between `x[0..w]` and `x[tau..tau + w]` for every
/// lag up to `tau_max + 1`, with `w = n - tau_max - 1`.
pub(crate) fn normalized_correlation(x: &[f64], range: &SearchRange) -> Vec<f64> {
    let hi = (range.tau_max + 1).min(x.len() - 1);
    let w = x.len() - hi;
    let c = cross_correlate_head(x, w);
    let p = square_prefix(x);
    let e0 = p[w];
    c.iter()
        .enumerate()
        .map(|(tau, &ct)| {
            let et = p[tau + w] - p[tau];
            let denom = libm::sqrt(e0 * et);
            if denom > 0.0 {
                ct / denom
            } else {
                0.0
            }
        })
        .collect()
}

pub(crate) fn estimate(x: &[f64], range: &SearchRange) -> Candidate {
    let r = normalized_correlation(x, range);
    let peaks = local_maxima(&r, 0, range);
    match first_strong_peak(&r, &peaks, PEAK_RATIO) {
        Some(i) => lag_candidate(refine(&r, 0, i), r[i], range),
        None => Candidate::NONE,
    }
}
