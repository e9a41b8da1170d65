use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pitch::{Method, PitchTrack};

/// Thresholds and weights behind [`score`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoringCriteria {
    /// Relative deviation above which a voiced estimate is a gross error.
    pub gross_error_ratio: f64,
    pub gpe_weight: f64,
    pub vde_weight: f64,
    /// Weight per cent of fine pitch error.
    pub fpe_weight_per_cent: f64,
}

pub const CRITERIA: ScoringCriteria = ScoringCriteria {
    gross_error_ratio: 0.2,
    gpe_weight: 1.0,
    vde_weight: 1.0,
    fpe_weight_per_cent: 1.0 / 500.0,
};

impl ScoringCriteria {
    pub fn composite(&self, gpe: f64, fpe_cents: f64, vde: f64) -> f64 {
        self.gpe_weight * gpe + self.vde_weight * vde + self.fpe_weight_per_cent * fpe_cents
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub method: Method,
    /// Gross pitch error rate over truth-voiced frames.
    pub gpe: f64,
    /// Mean absolute fine error in cents over non-gross voiced frames.
    pub fpe_cents: f64,
    /// Voicing decision error rate over all frames.
    pub vde: f64,
    pub score: f64,
}

pub fn score(track: &PitchTrack, truth: &[Option<f64>]) -> Result<EvalResult> {
    if track.len() != truth.len() {
        return Err(Error::structural(format!(
            "track has {} frames but truth has {}",
            track.len(),
            truth.len()
        )));
    }
    let mut truth_voiced = 0usize;
    let mut gross = 0usize;
    let mut voicing_errors = 0usize;
    let mut fine: Vec<f64> = Vec::new();
    for (est, t) in track.estimates.iter().zip(truth) {
        if est.voiced != t.is_some() {
            voicing_errors += 1;
        }
        let Some(t) = *t else { continue };
        truth_voiced += 1;
        let Some(f0) = est.f0_hz.filter(|_| est.voiced) else {
            continue;
        };
        if (f0 - t).abs() / t > CRITERIA.gross_error_ratio {
            gross += 1;
        } else {
            fine.push((1200.0 * libm::log2(f0 / t)).abs());
        }
    }
    let gpe = if truth_voiced > 0 {
        gross as f64 / truth_voiced as f64
    } else {
        0.0
    };
    let fpe_cents = if fine.is_empty() {
        0.0
    } else {
        fine.iter().sum::<f64>() / fine.len() as f64
    };
    let vde = if truth.is_empty() {
        0.0
    } else {
        voicing_errors as f64 / truth.len() as f64
    };
    Ok(EvalResult {
        method: track.settings.method,
        gpe,
        fpe_cents,
        vde,
        score: CRITERIA.composite(gpe, fpe_cents, vde),
    })
}
