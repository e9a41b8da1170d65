//! Frame-level fundamental frequency estimation.
//!
//! [`detect_f0`] dispatches to one of seven estimators selected by
//! [`Method`]. Every estimator reports a candidate lag or frequency together
//! with a periodicity confidence in `[0, 1]`, and the voicing decision is the
//! same for all of them: voiced iff the confidence reaches
//! `voicing_threshold` and the frame RMS reaches `silence_rms_floor`.

mod acf;
mod amdf;
mod cepstrum;
mod hps;
mod lag;
pub mod mpm;
mod shs;
mod spectrum;
pub mod yin;

use alloc::format;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mel::hz_to_mel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Method {
    /// Normalized autocorrelation peak.
    Acf,
    /// Average magnitude difference valley.
    Amdf,
    /// Cumulative mean normalized difference with absolute threshold.
    Yin,
    /// McLeod normalized square difference with key-maximum picking.
    Mpm,
    /// Real-cepstrum quefrency peak.
    Cepstrum,
    /// Harmonic product spectrum.
    Hps,
    /// Subharmonic summation.
    Shs,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::Acf,
        Method::Amdf,
        Method::Yin,
        Method::Mpm,
        Method::Cepstrum,
        Method::Hps,
        Method::Shs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Acf => "ACF",
            Method::Amdf => "AMDF",
            Method::Yin => "YIN",
            Method::Mpm => "MPM",
            Method::Cepstrum => "CEPSTRUM",
            Method::Hps => "HPS",
            Method::Shs => "SHS",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::config(format!("unknown pitch method {s:?}")))
    }
}

pub const MIN_FRAME_LEN: usize = 512;
pub const MAX_FRAME_LEN: usize = 8192;

/// A window of mono PCM samples, the unit of estimation.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioFrame {
    samples: Vec<f64>,
    sample_rate: u32,
    t_start_ms: f64,
}

impl AudioFrame {
    pub fn new(samples: Vec<f64>, sample_rate: u32, t_start_ms: f64) -> Result<Self> {
        let n = samples.len();
        if !n.is_power_of_two() || !(MIN_FRAME_LEN..=MAX_FRAME_LEN).contains(&n) {
            return Err(Error::structural(format!(
                "frame length {n} is not a power of two in [{MIN_FRAME_LEN}, {MAX_FRAME_LEN}]"
            )));
        }
        if sample_rate == 0 {
            return Err(Error::structural("sample rate must be positive"));
        }
        if !(t_start_ms >= 0.0) || !t_start_ms.is_finite() {
            return Err(Error::structural(format!("invalid frame timestamp {t_start_ms}")));
        }
        if let Some(i) = samples.iter().position(|s| !(-1.0..=1.0).contains(s)) {
            return Err(Error::structural(format!(
                "sample {i} = {} outside [-1, 1]",
                samples[i]
            )));
        }
        Ok(Self {
            samples,
            sample_rate,
            t_start_ms,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn t_start_ms(&self) -> f64 {
        self.t_start_ms
    }

    pub fn rms(&self) -> f64 {
        rms(&self.samples)
    }
}

pub(crate) fn rms(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    libm::sqrt(x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PitchEstimate {
    pub t_ms: f64,
    pub f0_hz: Option<f64>,
    pub mel: Option<f64>,
    pub confidence: f64,
    pub voiced: bool,
}

impl PitchEstimate {
    pub fn unvoiced(t_ms: f64, confidence: f64) -> Self {
        Self {
            t_ms,
            f0_hz: None,
            mel: None,
            confidence,
            voiced: false,
        }
    }

    /// Voiced estimate; the Mel value is derived from `f0_hz`.
    pub fn voiced(t_ms: f64, f0_hz: f64, confidence: f64) -> Result<Self> {
        Ok(Self {
            t_ms,
            f0_hz: Some(f0_hz),
            mel: Some(hz_to_mel(f0_hz)?),
            confidence,
            voiced: true,
        })
    }
}

/// Estimator choice, search range, voicing rules and framing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineSettings {
    pub method: Method,
    pub f_min: f64,
    pub f_max: f64,
    pub voicing_threshold: f64,
    pub silence_rms_floor: f64,
    pub median_window: usize,
    #[serde(default = "default_frame_len")]
    pub frame_len: usize,
    #[serde(default = "default_hop_len")]
    pub hop_len: usize,
}

fn default_frame_len() -> usize {
    2048
}

fn default_hop_len() -> usize {
    512
}

pub const DEFAULT_SAMPLE_RATE: u32 = 44_100;

impl Default for EngineSettings {
    fn default() -> Self {
        Self {
            method: Method::Yin,
            f_min: 60.0,
            f_max: 600.0,
            voicing_threshold: 0.5,
            silence_rms_floor: 0.01,
            median_window: 5,
            frame_len: default_frame_len(),
            hop_len: default_hop_len(),
        }
    }
}

impl EngineSettings {
    pub fn with_method(method: Method) -> Self {
        Self {
            method,
            ..Self::default()
        }
    }

    /// Checks the settings against a sample rate.
    pub fn validate(&self, sample_rate: u32) -> Result<()> {
        let nyquist = sample_rate as f64 / 2.0;
        if !(self.f_min > 0.0 && self.f_min < self.f_max && self.f_max < nyquist) {
            return Err(Error::config(format!(
                "need 0 < f_min < f_max < {nyquist} Hz, got f_min={} f_max={}",
                self.f_min, self.f_max
            )));
        }
        if !(self.voicing_threshold > 0.0 && self.voicing_threshold < 1.0) {
            return Err(Error::config("voicing_threshold must lie in (0, 1)"));
        }
        if !(self.silence_rms_floor >= 0.0) || !self.silence_rms_floor.is_finite() {
            return Err(Error::config("silence_rms_floor must be finite and >= 0"));
        }
        if self.median_window == 0 || self.median_window.is_multiple_of(2) {
            return Err(Error::config("median_window must be odd and positive"));
        }
        if !self.frame_len.is_power_of_two()
            || !(MIN_FRAME_LEN..=MAX_FRAME_LEN).contains(&self.frame_len)
        {
            return Err(Error::config(format!(
                "frame_len {} is not a power of two in [{MIN_FRAME_LEN}, {MAX_FRAME_LEN}]",
                self.frame_len
            )));
        }
        if self.hop_len == 0 || self.hop_len > self.frame_len {
            return Err(Error::config("hop_len must lie in [1, frame_len]"));
        }
        Ok(())
    }

    pub fn hop_ms(&self, sample_rate: u32) -> f64 {
        self.hop_len as f64 * 1000.0 / sample_rate as f64
    }
}

/// Time-ordered estimates at a uniform hop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PitchTrack {
    pub settings: EngineSettings,
    pub hop_ms: f64,
    pub estimates: Vec<PitchEstimate>,
}

impl PitchTrack {
    pub fn new(settings: EngineSettings, hop_ms: f64, estimates: Vec<PitchEstimate>) -> Result<Self> {
        if !(hop_ms > 0.0) || !hop_ms.is_finite() {
            return Err(Error::structural(format!("invalid hop {hop_ms} ms")));
        }
        if estimates.windows(2).any(|w| !(w[1].t_ms > w[0].t_ms)) {
            return Err(Error::structural("estimate timestamps must be strictly increasing"));
        }
        Ok(Self {
            settings,
            hop_ms,
            estimates,
        })
    }

    pub fn len(&self) -> usize {
        self.estimates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.estimates.is_empty()
    }

    pub fn voiced_mels(&self) -> impl Iterator<Item = f64> + '_ {
        self.estimates.iter().filter(|e| e.voiced).filter_map(|e| e.mel)
    }
}

/// Output of a single estimator before the voicing decision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Candidate {
    pub f0_hz: Option<f64>,
    pub confidence: f64,
}

impl Candidate {
    pub const NONE: Candidate = Candidate {
        f0_hz: None,
        confidence: 0.0,
    };
}

/// Search bounds shared by all estimators.
#[derive(Debug, Clone, Copy)]
pub(crate) struct SearchRange {
    pub sample_rate: f64,
    pub f_min: f64,
    pub f_max: f64,
    pub tau_min: usize,
    pub tau_max: usize,
}

impl SearchRange {
    fn new(frame_len: usize, sample_rate: u32, settings: &EngineSettings) -> Result<Self> {
        let sr = sample_rate as f64;
        let tau_min = (libm::floor(sr / settings.f_max) as usize).max(2);
        let tau_max = (libm::ceil(sr / settings.f_min) as usize).min(frame_len / 2);
        if tau_min + 2 > tau_max {
            return Err(Error::config(format!(
                "lag range [{tau_min}, {tau_max}] is empty for a {frame_len}-sample frame"
            )));
        }
        Ok(Self {
            sample_rate: sr,
            f_min: settings.f_min,
            f_max: settings.f_max,
            tau_min,
            tau_max,
        })
    }
}

/// Estimate the fundamental frequency of one frame.
pub fn detect_f0(frame: &AudioFrame, settings: &EngineSettings) -> Result<PitchEstimate> {
    settings.validate(frame.sample_rate())?;
    let range = SearchRange::new(frame.samples().len(), frame.sample_rate(), settings)?;

    let mean = frame.samples().iter().sum::<f64>() / frame.samples().len() as f64;
    let x: Vec<f64> = frame.samples().iter().map(|v| v - mean).collect();

    let cand = match settings.method {
        Method::Acf => acf::estimate(&x, &range),
        Method::Amdf => amdf::estimate(&x, &range),
        Method::Yin => yin::estimate(&x, &range),
        Method::Mpm => mpm::estimate(&x, &range),
        Method::Cepstrum => cepstrum::estimate(&x, &range),
        Method::Hps => hps::estimate(&x, &range),
        Method::Shs => shs::estimate(&x, &range),
    };
    let confidence = if cand.confidence.is_finite() {
        cand.confidence.clamp(0.0, 1.0)
    } else {
        0.0
    };
    let t = frame.t_start_ms();
    match cand.f0_hz {
        Some(f0)
            if f0.is_finite()
                && confidence >= settings.voicing_threshold
                && frame.rms() >= settings.silence_rms_floor =>
        {
            PitchEstimate::voiced(t, f0.clamp(settings.f_min, settings.f_max), confidence)
        }
        _ => Ok(PitchEstimate::unvoiced(t, confidence)),
    }
}

/// Cuts `samples` into frames of `settings.frame_len` every `settings.hop_len`.
pub fn frames_from_samples(
    samples: &[f64],
    sample_rate: u32,
    settings: &EngineSettings,
) -> Result<Vec<AudioFrame>> {
    let (n, hop) = (settings.frame_len, settings.hop_len);
    if samples.len() < n {
        return Ok(Vec::new());
    }
    (0..=(samples.len() - n) / hop)
        .map(|i| {
            let start = i * hop;
            let chunk = samples[start..start + n].iter().map(|v| v.clamp(-1.0, 1.0)).collect();
            AudioFrame::new(chunk, sample_rate, start as f64 * 1000.0 / sample_rate as f64)
        })
        .collect()
}

/// Runs [`detect_f0`] over a whole signal.
pub fn track_signal(samples: &[f64], sample_rate: u32, settings: &EngineSettings) -> Result<PitchTrack> {
    settings.validate(sample_rate)?;
    let estimates = frames_from_samples(samples, sample_rate, settings)?
        .iter()
        .map(|f| detect_f0(f, settings))
        .collect::<Result<Vec<_>>>()?;
    PitchTrack::new(settings.clone(), settings.hop_ms(sample_rate), estimates)
}

#[cfg(test)]
mod tests;
