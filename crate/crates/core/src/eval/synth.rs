use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pitch::{AudioFrame, DEFAULT_SAMPLE_RATE, MAX_FRAME_LEN, MIN_FRAME_LEN};
use crate::rng::XorShift64Star;

/// Harmonics of the sawtooth and pulse waveforms stop here (or at 0.45 fs).
const BAND_LIMIT_HZ: f64 = 5000.0;
const NOISE_STREAM: u64 = 0x6E6F_6973_6500_0001;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Waveform {
    Sine,
    /// Band-limited sawtooth, harmonic amplitudes 1/h.
    Sawtooth,
    /// Band-limited pulse train, cosine phases with 1/h amplitudes: the
    /// -6 dB/octave tilt of a radiated glottal source.
    PulseTrain,
}

/// One breakpoint of a piecewise-linear f0 contour. `f0_hz: None` starts a
/// silent stretch that lasts until the next voiced point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContourPoint {
    pub t_s: f64,
    pub f0_hz: Option<f64>,
}

impl ContourPoint {
    pub fn voiced(t_s: f64, f0_hz: f64) -> Self {
        Self { t_s, f0_hz: Some(f0_hz) }
    }

    pub fn silent(t_s: f64) -> Self {
        Self { t_s, f0_hz: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalSpec {
    #[serde(default)]
    pub label: String,
    pub waveform: Waveform,
    pub f0_contour: Vec<ContourPoint>,
    pub duration_s: f64,
    #[serde(default)]
    pub jitter_pct: f64,
    #[serde(default)]
    pub shimmer_pct: f64,
    #[serde(default)]
    pub noise_snr_db: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_sample_rate")]
    pub sample_rate: u32,
    #[serde(default = "default_frame_len")]
    pub frame_len: usize,
    #[serde(default = "default_hop_len")]
    pub hop_len: usize,
    #[serde(default = "default_amplitude")]
    pub amplitude: f64,
}

fn default_sample_rate() -> u32 {
    DEFAULT_SAMPLE_RATE
}
fn default_frame_len() -> usize {
    2048
}
fn default_hop_len() -> usize {
    512
}
fn default_amplitude() -> f64 {
    0.5
}

impl SignalSpec {
    /// Clean tone at a constant frequency.
    pub fn constant(waveform: Waveform, f0_hz: f64, duration_s: f64) -> Self {
        Self {
            label: format!("{f0_hz:.1} Hz"),
            waveform,
            f0_contour: alloc::vec![ContourPoint::voiced(0.0, f0_hz)],
            duration_s,
            jitter_pct: 0.0,
            shimmer_pct: 0.0,
            noise_snr_db: None,
            seed: 0,
            sample_rate: default_sample_rate(),
            frame_len: default_frame_len(),
            hop_len: default_hop_len(),
            amplitude: default_amplitude(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration_s > 0.0) || !self.duration_s.is_finite() {
            return Err(Error::config("duration_s must be positive"));
        }
        for (name, v) in [("jitter_pct", self.jitter_pct), ("shimmer_pct", self.shimmer_pct)] {
            if !(0.0..=20.0).contains(&v) {
                return Err(Error::config(format!("{name} must lie in [0, 20], got {v}")));
            }
        }
        if self.sample_rate == 0 {
            return Err(Error::config("sample_rate must be positive"));
        }
        if !self.frame_len.is_power_of_two() || !(MIN_FRAME_LEN..=MAX_FRAME_LEN).contains(&self.frame_len) {
            return Err(Error::config(format!("invalid frame_len {}", self.frame_len)));
        }
        if self.hop_len == 0 || self.hop_len > self.frame_len {
            return Err(Error::config("hop_len must lie in [1, frame_len]"));
        }
        if !(self.amplitude > 0.0 && self.amplitude <= 1.0) {
            return Err(Error::config("amplitude must lie in (0, 1]"));
        }
        if self.f0_contour.is_empty() {
            return Err(Error::config("f0_contour needs at least one point"));
        }
        if self.f0_contour.windows(2).any(|w| !(w[1].t_s >= w[0].t_s)) {
            return Err(Error::config("contour times must be non-decreasing"));
        }
        let nyquist = self.sample_rate as f64 / 2.0;
        for p in &self.f0_contour {
            if let Some(f) = p.f0_hz {
                if !(f > 0.0) {
                    return Err(Error::config(format!("contour frequency {f} must be positive")));
                }
                if f >= nyquist {
                    return Err(Error::config(format!("contour frequency {f} Hz exceeds Nyquist ({nyquist} Hz)")));
                }
            }
        }
        if let Some(snr) = self.noise_snr_db {
            if !snr.is_finite() {
                return Err(Error::config("noise_snr_db must be finite"));
            }
        }
        Ok(())
    }

    /// Contour value at `t` seconds, `None` while silent.
    pub fn f0_at(&self, t: f64) -> Option<f64> {
        let pts = &self.f0_contour;
        let first = pts.first()?;
        if t < first.t_s {
            return first.f0_hz;
        }
        let i = pts.iter().rposition(|p| p.t_s <= t)?;
        let here = pts[i];
        let Some(next) = pts.get(i + 1) else {
            return here.f0_hz;
        };
        match (here.f0_hz, next.f0_hz) {
            (Some(a), Some(b)) if next.t_s > here.t_s => {
                Some(a + (b - a) * (t - here.t_s) / (next.t_s - here.t_s))
            }
            (Some(a), _) => Some(a),
            (None, _) => None,
        }
    }

    /// Number of frames the framing produces for this spec.
    pub fn frame_count(&self) -> usize {
        let n = self.sample_count();
        if n < self.frame_len {
            0
        } else {
            (n - self.frame_len) / self.hop_len + 1
        }
    }

    pub fn sample_count(&self) -> usize {
        libm::floor(self.duration_s * self.sample_rate as f64) as usize
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Synthesized {
    pub samples: Vec<f64>,
    pub sample_rate: u32,
    pub frames: Vec<AudioFrame>,
    /// Ground-truth f0 per frame, `None` for unvoiced frames.
    pub truth: Vec<Option<f64>>,
}

struct Oscillator {
    waveform: Waveform,
    band_limit: f64,
}

impl Oscillator {
    /// Waveform value at phase `phase` (cycles) for fundamental `f0`.
    fn value(&self, phase: f64, f0: f64) -> f64 {
        let theta = TAU * (phase - libm::floor(phase));
        match self.waveform {
            Waveform::Sine => libm::sin(theta),
            Waveform::Sawtooth | Waveform::PulseTrain => {
                let top = ((self.band_limit / f0) as usize).max(1);
                // Chebyshev recurrence for sin(h θ) and cos(h θ).
                let two_cos = 2.0 * libm::cos(theta);
                let (mut s_prev, mut s) = (0.0, libm::sin(theta));
                let (mut c_prev, mut c) = (1.0, libm::cos(theta));
                let mut acc = 0.0;
                for h in 1..=top {
                    acc += match self.waveform {
                        Waveform::Sawtooth => s,
                        _ => c,
                    } / h as f64;
                    let s_next = two_cos * s - s_prev;
                    let c_next = two_cos * c - c_prev;
                    (s_prev, s, c_prev, c) = (s, s_next, c, c_next);
                }
                match self.waveform {
                    Waveform::Sawtooth => acc * 2.0 / core::f64::consts::PI,
                    // Peak of sum cos(h θ)/h is the harmonic number H_top.
                    _ => acc / (1..=top).map(|h| 1.0 / h as f64).sum::<f64>(),
                }
            }
        }
    }
}

/// Renders a signal spec. Deterministic for a given spec (including seed).
pub fn synthesize(spec: &SignalSpec) -> Result<Synthesized> {
    spec.validate()?;
    let sr = spec.sample_rate as f64;
    let n = spec.sample_count();
    let osc = Oscillator {
        waveform: spec.waveform,
        band_limit: BAND_LIMIT_HZ.min(0.45 * sr),
    };
    let mut rng = XorShift64Star::new(spec.seed);
    let jitter = spec.jitter_pct / 100.0;
    let shimmer = spec.shimmer_pct / 100.0;
    let mut perturb = |scale: f64| (scale * rng.gaussian()).clamp(-3.0 * scale, 3.0 * scale);

    let mut tone = Vec::with_capacity(n);
    let mut contour = Vec::with_capacity(n);
    let mut phase = 0.0f64;
    let mut period_scale = 1.0;
    let mut cycle_gain = 1.0;
    let mut was_voiced = false;
    for i in 0..n {
        let f = spec.f0_at(i as f64 / sr);
        contour.push(f);
        let Some(f) = f else {
            tone.push(0.0);
            was_voiced = false;
            continue;
        };
        if !was_voiced {
            phase = 0.0;
            period_scale = 1.0 + perturb(jitter);
            cycle_gain = 1.0 + perturb(shimmer);
            was_voiced = true;
        }
        tone.push(spec.amplitude * cycle_gain * osc.value(phase, f));
        let next = phase + f / (period_scale * sr);
        if libm::floor(next) > libm::floor(phase) {
            period_scale = 1.0 + perturb(jitter);
            cycle_gain = 1.0 + perturb(shimmer);
        }
        phase = next;
    }

    let voiced_count = contour.iter().filter(|c| c.is_some()).count();
    let tone_rms = if voiced_count > 0 {
        libm::sqrt(tone.iter().map(|v| v * v).sum::<f64>() / voiced_count as f64)
    } else {
        spec.amplitude / core::f64::consts::SQRT_2
    };
    let mut samples = tone;
    if let Some(snr) = spec.noise_snr_db {
        let sigma = tone_rms / libm::pow(10.0, snr / 20.0);
        let mut noise = XorShift64Star::new(spec.seed ^ NOISE_STREAM);
        for s in samples.iter_mut() {
            *s += sigma * noise.gaussian();
        }
    }
    for s in samples.iter_mut() {
        *s = s.clamp(-1.0, 1.0);
    }

    let mut frames = Vec::with_capacity(spec.frame_count());
    let mut truth = Vec::with_capacity(spec.frame_count());
    for k in 0..spec.frame_count() {
        let start = k * spec.hop_len;
        let end = start + spec.frame_len;
        frames.push(AudioFrame::new(
            samples[start..end].to_vec(),
            spec.sample_rate,
            start as f64 * 1000.0 / sr,
        )?);
        let window = &contour[start..end];
        let voiced: Vec<f64> = window.iter().flatten().copied().collect();
        // Truth-voiced iff more than half of the frame is tone.
        truth.push(if 2 * voiced.len() > window.len() {
            Some(contour[start + spec.frame_len / 2].unwrap_or_else(|| {
                voiced.iter().sum::<f64>() / voiced.len() as f64
            }))
        } else {
            None
        });
    }
    Ok(Synthesized {
        samples,
        sample_rate: spec.sample_rate,
        frames,
        truth,
    })
}
