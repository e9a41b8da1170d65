use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pitch::PitchTrack;
use crate::stats::percentile;

/// A patient's comfortable Mel range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub mel_low: f64,
    pub mel_high: f64,
}

pub const MIN_CALIBRATION_MS: f64 = 1000.0;
pub const MIN_RANGE_MEL: f64 = 50.0;

impl Calibration {
    pub fn new(mel_low: f64, mel_high: f64) -> Result<Self> {
        if !(mel_low.is_finite() && mel_high.is_finite() && mel_low < mel_high) {
            return Err(Error::Calibration(format!(
                "need mel_low < mel_high, got {mel_low} and {mel_high}"
            )));
        }
        Ok(Self { mel_low, mel_high })
    }

    pub fn mid(&self) -> f64 {
        (self.mel_low + self.mel_high) / 2.0
    }
}

/// Range from a guided sweep: 5th to 95th percentile of the voiced Mel values.
pub fn calibrate(track: &PitchTrack) -> Result<Calibration> {
    let mels: Vec<f64> = track.voiced_mels().collect();
    let voiced_ms = mels.len() as f64 * track.hop_ms;
    if voiced_ms < MIN_CALIBRATION_MS {
        return Err(Error::Calibration(format!(
            "only {voiced_ms:.0} ms of voiced audio, need {MIN_CALIBRATION_MS:.0} ms"
        )));
    }
    let low = percentile(&mels, 0.05).expect("non-empty");
    let high = percentile(&mels, 0.95).expect("non-empty");
    if high - low < MIN_RANGE_MEL {
        return Err(Error::Calibration(format!(
            "range {:.1} Mel is narrower than {MIN_RANGE_MEL} Mel",
            high - low
        )));
    }
    Calibration::new(low, high)
}

/// Vertical avatar position for a Mel value, in `[0, 1]`.
pub fn map_pitch_to_y(mel: f64, cal: &Calibration, sensitivity: f64) -> f64 {
    let y = 0.5 + sensitivity * (mel - cal.mid()) / (cal.mel_high - cal.mel_low);
    if y.is_nan() {
        return 0.5;
    }
    y.clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mel::mel_to_hz;
    use crate::pitch::{EngineSettings, PitchEstimate};
    use proptest::prelude::*;

    fn track(mels: &[Option<f64>], hop_ms: f64) -> PitchTrack {
        let est = mels
            .iter()
            .enumerate()
            .map(|(i, m)| match m {
                Some(m) => PitchEstimate::voiced(i as f64 * hop_ms, mel_to_hz(*m).unwrap(), 1.0).unwrap(),
                None => PitchEstimate::unvoiced(i as f64 * hop_ms, 0.0),
            })
            .collect();
        PitchTrack::new(EngineSettings::default(), hop_ms, est).unwrap()
    }

    #[test]
    fn constant_track_is_degenerate() {
        let t = track(&[Some(300.0); 200], 10.0);
        assert!(matches!(calibrate(&t), Err(Error::Calibration(_))));
    }

    #[test]
    fn too_little_voicing() {
        let t = track(&[Some(300.0); 50], 10.0);
        assert!(matches!(calibrate(&t), Err(Error::Calibration(_))));
    }

    #[test]
    fn linear_sweep_percentiles() {
        let mels: Vec<Option<f64>> = (0..=400).map(|i| Some(250.0 + 0.5 * i as f64)).collect();
        let cal = calibrate(&track(&mels, 10.0)).unwrap();
        assert!((cal.mel_low - 260.0).abs() < 1e-6, "{cal:?}");
        assert!((cal.mel_high - 440.0).abs() < 1e-6, "{cal:?}");
    }

    #[test]
    fn unvoiced_gaps_ignored() {
        // 40% of frames unvoiced; percentiles must come from voiced frames only.
        let mels: Vec<Option<f64>> = (0..500)
            .map(|i| if i % 5 < 2 { None } else { Some(200.0 + i as f64) })
            .collect();
        let voiced: Vec<f64> = mels.iter().flatten().copied().collect();
        let mut sorted = voiced.clone();
        sorted.sort_by(f64::total_cmp);
        // independent nearest-rank-with-interpolation recompute
        let pick = |p: f64| {
            let r = p * (sorted.len() - 1) as f64;
            let lo = r.floor() as usize;
            sorted[lo] + (sorted[(lo + 1).min(sorted.len() - 1)] - sorted[lo]) * (r - lo as f64)
        };
        let cal = calibrate(&track(&mels, 10.0)).unwrap();
        assert!((cal.mel_low - pick(0.05)).abs() < 1e-9);
        assert!((cal.mel_high - pick(0.95)).abs() < 1e-9);
    }

    #[test]
    fn mapping_examples() {
        let cal = Calibration::new(300.0, 500.0).unwrap();
        for s in [0.5, 1.0, 3.0] {
            assert_eq!(map_pitch_to_y(400.0, &cal, s), 0.5);
        }
        assert_eq!(map_pitch_to_y(500.0, &cal, 1.0), 1.0);
        assert_eq!(map_pitch_to_y(450.0, &cal, 2.0), 1.0);
        assert_eq!(map_pitch_to_y(0.0, &cal, 1.0), 0.0);
    }

    #[test]
    fn inverted_calibration_rejected() {
        assert!(Calibration::new(500.0, 300.0).is_err());
        assert!(Calibration::new(300.0, 300.0).is_err());
    }

    proptest! {
        #[test]
        fn mapping_bounded_and_monotone(
            lo in 0.0f64..1500.0, width in 1.0f64..1000.0, s in 0.01f64..5.0,
            a in -500.0f64..3000.0, b in -500.0f64..3000.0,
        ) {
            let cal = Calibration::new(lo, lo + width).unwrap();
            let (ya, yb) = (map_pitch_to_y(a, &cal, s), map_pitch_to_y(b, &cal, s));
            prop_assert!((0.0..=1.0).contains(&ya));
            if a <= b {
                prop_assert!(ya <= yb);
            }
        }
    }
}
