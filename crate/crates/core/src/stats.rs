//! Small statistics helpers.

use alloc::vec::Vec;

/// Percentile with linear interpolation between closest ranks
/// (rank = p * (n - 1)), `p` in `[0, 1]`. `None` for empty input.
pub fn percentile(values: &[f64], p: f64) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut sorted: Vec<f64> = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Some(percentile_sorted(&sorted, p))
}

pub(crate) fn percentile_sorted(sorted: &[f64], p: f64) -> f64 {
    let rank = p.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = libm::floor(rank) as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = rank - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

pub fn median(values: &[f64]) -> Option<f64> {
    percentile(values, 0.5)
}

/// Ordinary least-squares line through `(i, y[i])`, `i = 0..n`.
/// Returns `(slope, intercept)`; a single point gives slope 0.
pub fn linear_fit(y: &[f64]) -> Option<(f64, f64)> {
    let pts: Vec<(f64, f64)> = y.iter().enumerate().map(|(i, &v)| (i as f64, v)).collect();
    linear_fit_points(&pts)
}

pub fn linear_fit_points(pts: &[(f64, f64)]) -> Option<(f64, f64)> {
    let n = pts.len();
    if n == 0 {
        return None;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n as f64;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n as f64;
    if pts.iter().all(|p| p.1 == pts[0].1) {
        return Some((0.0, pts[0].1));
    }
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if sxx == 0.0 {
        return Some((0.0, my));
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}
