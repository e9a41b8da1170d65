//! Estimator evaluation on synthetic voices with known ground truth.
//!
//! [`synthesize`] renders a [`SignalSpec`] (waveform, f0 contour, jitter,
//! shimmer, additive noise) into frames plus per-frame truth, [`score`]
//! compares a pitch track against that truth, and [`run_benchmark`] ranks a
//! set of estimator settings over a suite of signals.

mod bench;
mod score;
mod synth;

pub use bench::{builtin_suite, run_benchmark, BenchmarkReport, SuiteFile, SUITE_VERSION};
pub use score::{score, EvalResult, ScoringCriteria, CRITERIA};
pub use synth::{synthesize, ContourPoint, SignalSpec, Synthesized, Waveform};
