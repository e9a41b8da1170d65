//! Helpers shared by the lag-domain estimators.

use alloc::vec::Vec;

use super::{Candidate, SearchRange};

/// Vertex offset of the parabola through `(−1, a)`, `(0, b)`, `(1, c)`.
pub(crate) fn parabolic_offset(a: f64, b: f64, c: f64) -> f64 {
    let denom = a - 2.0 * b + c;
    if denom.abs() < f64::EPSILON {
        0.0
    } else {
        (0.5 * (a - c) / denom).clamp(-0.5, 0.5)
    }
}

/// Refined position of index `i` in `values` (indexed from `first_lag`).
/// At the ends of the array there is only a one-sided neighbor, so the
/// integer lag is returned unrefined.
pub(crate) fn refine(values: &[f64], first_lag: usize, i: usize) -> f64 {
    if i == 0 || i + 1 >= values.len() {
        return (first_lag + i) as f64;
    }
    (first_lag + i) as f64 + parabolic_offset(values[i - 1], values[i], values[i + 1])
}

/// Prefix sums of squares: `p[k] = sum_{i < k} x[i]^2`.
pub(crate) fn square_prefix(x: &[f64]) -> Vec<f64> {
    let mut p = Vec::with_capacity(x.len() + 1);
    let mut acc = 0.0;
    p.push(0.0);
    for v in x {
        acc += v * v;
        p.push(acc);
    }
    p
}

/// Local maxima of a score curve `s[lag - first_lag]` with lags inside
/// `[tau_min, tau_max]`. A point needs a strictly smaller neighbor on at least
/// one side and no larger neighbor; missing neighbors at the array ends count
/// as smaller.
pub(crate) fn local_maxima(s: &[f64], first_lag: usize, range: &SearchRange) -> Vec<usize> {
    let mut out = Vec::new();
    for i in 0..s.len() {
        let lag = first_lag + i;
        if lag < range.tau_min || lag > range.tau_max {
            continue;
        }
        let left = if i > 0 { s[i - 1] } else { f64::NEG_INFINITY };
        let right = if i + 1 < s.len() { s[i + 1] } else { f64::NEG_INFINITY };
        if s[i] >= left && s[i] > right {
            out.push(i);
        }
    }
    out
}

/// The smallest-lag peak within `ratio` of the highest one. Picking the
/// first strong peak rather than the global maximum avoids sub-octave lags,
/// where periodic signals score almost as high as at the true period.
pub(crate) fn first_strong_peak(s: &[f64], peaks: &[usize], ratio: f64) -> Option<usize> {
    let best = peaks.iter().map(|&i| s[i]).fold(f64::NEG_INFINITY, f64::max);
    if !(best > 0.0) {
        return None;
    }
    peaks.iter().copied().find(|&i| s[i] >= ratio * best)
}

pub(crate) fn lag_candidate(lag: f64, confidence: f64, range: &SearchRange) -> Candidate {
    if lag <= 0.0 {
        return Candidate::NONE;
    }
    Candidate {
        f0_hz: Some(range.sample_rate / lag),
        confidence,
    }
}
