//! YIN: cumulative mean normalized difference with an absolute threshold.
//!
//! The difference function uses a fixed window `w = n - tau_max - 1`:
//! `d(tau) = sum_{j < w} (x[j] - x[j + tau])^2`, computed from one FFT
//! cross-correlation and prefix sums of squares. It is normalized as
//! `d'(0) = 1`, `d'(tau) = d(tau) * tau / sum_{j=1..tau} d(j)`.

use alloc::vec::Vec;

use super::lag::{lag_candidate, refine, square_prefix};
use super::{Candidate, SearchRange};
use crate::fft::cross_correlate_head;

/// Absolute threshold on `d'` for accepting the first dip.
pub const YIN_THRESHOLD: f64 = 0.15;

/// Cumulative mean normalized difference for lags `0..=max_lag`, using the
/// fixed window `x.len() - max_lag`.
pub fn cmnd(x: &[f64], max_lag: usize) -> Vec<f64> {
    assert!(max_lag < x.len(), "max_lag must be shorter than the frame");
    let w = x.len() - max_lag;
    let c = cross_correlate_head(x, w);
    let p = square_prefix(x);
    let e0 = p[w];
    let mut out = Vec::with_capacity(max_lag + 1);
    out.push(1.0);
    let mut running = 0.0;
    for tau in 1..=max_lag {
        let et = p[tau + w] - p[tau];
        let d = (e0 + et - 2.0 * c[tau]).max(0.0);
        running += d;
        out.push(if running > 0.0 { d * tau as f64 / running } else { 1.0 });
    }
    out
}

pub(crate) fn estimate(x: &[f64], range: &SearchRange) -> Candidate {
    let hi = (range.tau_max + 1).min(x.len() - 1);
    let d = cmnd(x, hi);

    let mut chosen = None;
    let mut tau = range.tau_min;
    while tau <= range.tau_max {
        if d[tau] < YIN_THRESHOLD {
            while tau < hi && d[tau + 1] < d[tau] {
                tau += 1;
            }
            chosen = Some(tau);
            break;
        }
        tau += 1;
    }
    // No dip under the threshold: fall back to the global minimum.
    let tau = chosen.unwrap_or_else(|| {
        (range.tau_min..=range.tau_max)
            .min_by(|&a, &b| d[a].total_cmp(&d[b]))
            .unwrap_or(range.tau_min)
    });
    lag_candidate(refine(&d, 0, tau), 1.0 - d[tau], range)
}
