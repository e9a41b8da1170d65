use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use serde::{Deserialize, Serialize};

use super::score::{score, EvalResult, ScoringCriteria, CRITERIA};
use super::synth::{synthesize, ContourPoint, SignalSpec, Waveform};
use crate::error::{Error, Result};
use crate::pitch::{detect_f0, EngineSettings, Method, PitchTrack};

pub const SUITE_VERSION: u32 = 1;

/// On-disk benchmark definition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteFile {
    pub version: u32,
    pub signals: Vec<SignalSpec>,
    /// Estimator settings to compare; all seven methods with default
    /// settings when omitted.
    #[serde(default)]
    pub methods: Option<Vec<EngineSettings>>,
}

impl SuiteFile {
    pub fn settings(&self) -> Vec<EngineSettings> {
        self.methods
            .clone()
            .unwrap_or_else(|| Method::ALL.iter().map(|&m| EngineSettings::with_method(m)).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub criteria: ScoringCriteria,
    pub suite_size: usize,
    pub frames: usize,
    /// Ascending by score, ties by method name.
    pub results: Vec<EvalResult>,
}

impl BenchmarkReport {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let c = &self.criteria;
        let _ = writeln!(
            out,
            "# gross error: |f0 - truth| / truth > {}; score = {} * GPE + {} * VDE + FPE_cents / {}",
            c.gross_error_ratio,
            c.gpe_weight,
            c.vde_weight,
            1.0 / c.fpe_weight_per_cent
        );
        let _ = writeln!(out, "# {} signals, {} frames per method", self.suite_size, self.frames);
        let _ = writeln!(out, "{:<5} {:<9} {:>8} {:>10} {:>8} {:>8}", "rank", "method", "GPE", "FPE(c)", "VDE", "score");
        for (i, r) in self.results.iter().enumerate() {
            let _ = writeln!(
                out,
                "{:<5} {:<9} {:>8.4} {:>10.2} {:>8.4} {:>8.4}",
                i + 1,
                r.method.name(),
                r.gpe,
                r.fpe_cents,
                r.vde,
                r.score
            );
        }
        out
    }

    pub fn best(&self) -> Option<&EvalResult> {
        self.results.first()
    }
}

fn evaluate_method(suite: &[(SignalSpec, super::synth::Synthesized)], settings: &EngineSettings) -> Result<EvalResult> {
    let mut acc = (0.0, 0.0, 0.0);
    for (spec, signal) in suite {
        let estimates = signal
            .frames
            .iter()
            .map(|f| detect_f0(f, settings))
            .collect::<Result<Vec<_>>>()?;
        let hop_ms = spec.hop_len as f64 * 1000.0 / spec.sample_rate as f64;
        let track = PitchTrack::new(settings.clone(), hop_ms, estimates)?;
        let r = score(&track, &signal.truth)?;
        acc.0 += r.gpe;
        acc.1 += r.fpe_cents;
        acc.2 += r.vde;
    }
    let n = suite.len() as f64;
    let (gpe, fpe_cents, vde) = (acc.0 / n, acc.1 / n, acc.2 / n);
    Ok(EvalResult {
        method: settings.method,
        gpe,
        fpe_cents,
        vde,
        score: CRITERIA.composite(gpe, fpe_cents, vde),
    })
}

/// Scores every settings entry on every signal and ranks them.
pub fn run_benchmark(suite: &[SignalSpec], methods: &[EngineSettings]) -> Result<BenchmarkReport> {
    if suite.is_empty() {
        return Err(Error::config("benchmark suite is empty"));
    }
    if methods.is_empty() {
        return Err(Error::config("no estimator settings to benchmark"));
    }
    let rendered = suite
        .iter()
        .map(|s| synthesize(s).map(|r| (s.clone(), r)))
        .collect::<Result<Vec<_>>>()?;
    let mut results = methods
        .iter()
        .map(|m| evaluate_method(&rendered, m))
        .collect::<Result<Vec<_>>>()?;
    results.sort_by(|a, b| a.score.total_cmp(&b.score).then_with(|| a.method.name().cmp(b.method.name())));
    Ok(BenchmarkReport {
        criteria: CRITERIA,
        suite_size: suite.len(),
        frames: rendered.iter().map(|(_, r)| r.frames.len()).sum(),
        results,
    })
}

/// Named suites shipped with the harness: `clean` (20 sines, 80 to 500 Hz)
/// and `dysphonic` (jitter 3 %, shimmer 8 %, 15 dB SNR).
pub fn builtin_suite(name: &str) -> Result<Vec<SignalSpec>> {
    match name {
        "clean" => Ok(clean_sweep()),
        "dysphonic" => Ok(dysphonic()),
        other => Err(Error::config(format!("unknown builtin suite {other:?}"))),
    }
}

fn clean_sweep() -> Vec<SignalSpec> {
    (0..20)
        .map(|i| {
            let f = 80.0 + 420.0 * i as f64 / 19.0;
            SignalSpec {
                seed: i,
                ..SignalSpec::constant(Waveform::Sine, f, 0.25)
            }
        })
        .collect()
}

fn dysphonic() -> Vec<SignalSpec> {
    use ContourPoint as P;
    let cases: [(&str, Waveform, Vec<ContourPoint>); 6] = [
        ("steady low", Waveform::Sawtooth, alloc::vec![P::voiced(0.0, 120.0)]),
        (
            "rising glide",
            Waveform::PulseTrain,
            alloc::vec![P::voiced(0.0, 180.0), P::voiced(1.5, 260.0)],
        ),
        (
            "broken phonation",
            Waveform::Sawtooth,
            alloc::vec![P::voiced(0.0, 220.0), P::silent(0.6), P::voiced(0.9, 240.0)],
        ),
        (
            "low glide",
            Waveform::PulseTrain,
            alloc::vec![P::voiced(0.0, 95.0), P::voiced(1.5, 140.0)],
        ),
        ("steady high", Waveform::Sine, alloc::vec![P::voiced(0.0, 300.0)]),
        (
            "late onset sweep",
            Waveform::Sawtooth,
            alloc::vec![P::silent(0.0), P::voiced(0.3, 160.0), P::voiced(1.5, 320.0)],
        ),
    ];
    cases
        .into_iter()
        .enumerate()
        .map(|(i, (label, waveform, contour))| SignalSpec {
            label: label.into(),
            waveform,
            f0_contour: contour,
            duration_s: 1.5,
            jitter_pct: 3.0,
            shimmer_pct: 8.0,
            noise_snr_db: Some(15.0),
            seed: 1000 + i as u64,
            ..SignalSpec::constant(waveform, 100.0, 1.5)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_suite_rejected() {
        let all: Vec<EngineSettings> = Method::ALL.iter().map(|&m| EngineSettings::with_method(m)).collect();
        assert!(matches!(run_benchmark(&[], &all), Err(Error::Config(_))));
    }

    #[test]
    fn single_method_ranking() {
        let suite = [SignalSpec::constant(Waveform::Sine, 200.0, 0.2)];
        let r = run_benchmark(&suite, &[EngineSettings::with_method(Method::Mpm)]).unwrap();
        assert_eq!(r.results.len(), 1);
        assert_eq!(r.results[0].method, Method::Mpm);
    }

    #[test]
    fn duplicate_entries_tie_stably() {
        let suite = [SignalSpec::constant(Waveform::Sawtooth, 150.0, 0.2)];
        let s = EngineSettings::with_method(Method::Acf);
        let r = run_benchmark(&suite, &[s.clone(), EngineSettings::with_method(Method::Amdf), s]).unwrap();
        let acf: Vec<&EvalResult> = r.results.iter().filter(|e| e.method == Method::Acf).collect();
        assert_eq!(acf.len(), 2);
        assert_eq!(acf[0].score.to_bits(), acf[1].score.to_bits());
        for w in r.results.windows(2) {
            assert!(w[0].score < w[1].score || (w[0].score == w[1].score && w[0].method.name() <= w[1].method.name()));
        }
    }

    #[test]
    fn text_report_states_criteria() {
        let suite = [SignalSpec::constant(Waveform::Sine, 200.0, 0.2)];
        let r = run_benchmark(&suite, &[EngineSettings::with_method(Method::Yin)]).unwrap();
        let text = r.to_text();
        assert!(text.contains("> 0.2"));
        assert!(text.contains("FPE_cents / 500"));
        assert!(text.contains("YIN"));
    }

    #[test]
    fn builtin_suites_are_valid() {
        for name in ["clean", "dysphonic"] {
            let suite = builtin_suite(name).unwrap();
            assert!(suite.iter().all(|s| s.validate().is_ok()));
        }
        assert_eq!(builtin_suite("clean").unwrap().len(), 20);
        assert!(builtin_suite("nope").is_err());
    }
}
