//! McLeod pitch method: peaks of the normalized square difference function
//! `nsdf(tau) = 2 r(tau) / m(tau)`, where `r` is the autocorrelation over the
//! overlapping part and `m(tau) = sum_{i < n - tau} x[i]^2 + x[i + tau]^2`.

use alloc::vec::Vec;

use super::lag::{lag_candidate, refine, square_prefix};
use super::{Candidate, SearchRange};
use crate::fft::autocorrelation;

/// Key maxima within this fraction of the highest are eligible.
pub const PEAK_PICKING_K: f64 = 0.9;

pub fn nsdf(x: &[f64], max_lag: usize) -> Vec<f64> {
    let n = x.len();
    let r = autocorrelation(x);
    let p = square_prefix(x);
    (0..=max_lag.min(n - 1))
        .map(|tau| {
            let m = p[n - tau] + (p[n] - p[tau]);
            if m > 0.0 {
                2.0 * r[tau] / m
            } else {
                0.0
            }
        })
        .collect()
}

/// Highest point of each positive lobe after the first negative-going zero
/// crossing.
fn key_maxima(s: &[f64]) -> Vec<usize> {
    let mut out = Vec::new();
    let mut tau = 1;
    while tau < s.len() && s[tau] > 0.0 {
        tau += 1;
    }
    let mut current: Option<usize> = None;
    while tau < s.len() {
        if s[tau] > 0.0 {
            match current {
                Some(i) if s[i] >= s[tau] => {}
                _ => current = Some(tau),
            }
        } else if let Some(i) = current.take() {
            out.push(i);
        }
        tau += 1;
    }
    if let Some(i) = current {
        out.push(i);
    }
    out
}

pub(crate) fn estimate(x: &[f64], range: &SearchRange) -> Candidate {
    let hi = (range.tau_max + 1).min(x.len() - 1);
    let s = nsdf(x, hi);
    let peaks: Vec<usize> = key_maxima(&s)
        .into_iter()
        .filter(|&t| (range.tau_min..=range.tau_max).contains(&t))
        .collect();
    let best = peaks.iter().map(|&t| s[t]).fold(f64::NEG_INFINITY, f64::max);
    if !(best > 0.0) {
        return Candidate::NONE;
    }
    let threshold = PEAK_PICKING_K * best;
    match peaks.into_iter().find(|&t| s[t] >= threshold) {
        Some(t) => lag_candidate(refine(&s, 0, t), s[t], range),
        None => Candidate::NONE,
    }
}
