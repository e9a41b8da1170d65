//! Average magnitude difference estimator.

use alloc::vec::Vec;

use super::lag::{first_strong_peak, lag_candidate, local_maxima, refine};
use super::{Candidate, SearchRange};

const PEAK_RATIO: f64 = 0.9;

pub(crate) fn estimate(x: &[f64], range: &SearchRange) -> Candidate {
    let lo = range.tau_min - 1;
    let hi = (range.tau_max + 1).min(x.len() - 1);
    let w = x.len() - hi;
    let d: Vec<f64> = (lo..=hi)
        .map(|tau| {
            let s: f64 = x[..w].iter().zip(&x[tau..tau + w]).map(|(a, b)| (a - b).abs()).sum();
            s / w as f64
        })
        .collect();

    let inner = &d[1..d.len() - 1];
    let reference = inner.iter().sum::<f64>() / inner.len() as f64;
    if !(reference > 0.0) {
        return Candidate::NONE;
    }
    // Valleys become peaks of a similarity score in (-inf, 1].
    let similarity: Vec<f64> = d.iter().map(|v| 1.0 - v / reference).collect();
    let peaks = local_maxima(&similarity, lo, range);
    match first_strong_peak(&similarity, &peaks, PEAK_RATIO) {
        Some(i) => lag_candidate(refine(&similarity, lo, i), similarity[i], range),
        None => Candidate::NONE,
    }
}
