//! Subharmonic summation: `H(f) = sum_{h=1..8} 0.84^(h-1) A(h f)` over a
//! fine frequency grid, where `A` is the interpolated magnitude spectrum.

use alloc::vec::Vec;

use super::lag::parabolic_offset;
use super::spectrum::{interpolate, magnitude, peak_ratio_confidence};
use super::{Candidate, SearchRange};

pub const SUBHARMONICS: usize = 8;
pub const WEIGHT_DECAY: f64 = 0.84;
const PAD: usize = 4;
/// Grid resolution in Hz.
const GRID_STEP_HZ: f64 = 0.5;
const SATURATION: f64 = 4.0;

pub(crate) fn estimate(x: &[f64], range: &SearchRange) -> Candidate {
    let (mags, bin_hz) = magnitude(x, PAD, range.sample_rate);
    if !(mags.iter().copied().fold(0.0, f64::max) > 0.0) {
        return Candidate::NONE;
    }
    let steps = libm::ceil((range.f_max - range.f_min) / GRID_STEP_HZ) as usize;
    let grid: Vec<f64> = (0..=steps)
        .map(|i| (range.f_min + i as f64 * GRID_STEP_HZ).min(range.f_max))
        .collect();
    let h: Vec<f64> = grid
        .iter()
        .map(|&f| {
            let mut weight = 1.0;
            let mut sum = 0.0;
            for k in 1..=SUBHARMONICS {
                sum += weight * interpolate(&mags, k as f64 * f / bin_hz);
                weight *= WEIGHT_DECAY;
            }
            sum
        })
        .collect();
    let Some(i) = (0..h.len()).max_by(|&a, &b| h[a].total_cmp(&h[b])) else {
        return Candidate::NONE;
    };
    let f0 = if i > 0 && i + 1 < h.len() {
        grid[i] + GRID_STEP_HZ * parabolic_offset(h[i - 1], h[i], h[i + 1])
    } else {
        grid[i]
    };
    Candidate {
        f0_hz: Some(f0),
        confidence: peak_ratio_confidence(h[i], &h, SATURATION),
    }
}
