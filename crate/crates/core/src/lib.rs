//! Core algorithms for voice-pitch driven rehabilitation games.
//!
//! Everything in this crate is pure computation: pitch estimation from PCM
//! frames, synthetic voice generation and estimator scoring, the
//! deterministic game simulation with its session metrics, and longitudinal
//! progress analysis. IO, storage and networking live in the `voxplay` crate.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod analytics;
pub mod error;
pub mod eval;
mod fft;
pub mod game;
pub mod mel;
pub mod pipeline;
pub mod pitch;
pub mod rng;
pub mod session;
pub mod smooth;
pub mod stats;

pub use smooth::{smooth_track, StreamingSmoother};

pub use error::{Error, Result};
pub use mel::{hz_to_mel, mel_to_hz};
pub use pitch::{detect_f0, AudioFrame, EngineSettings, Method, PitchEstimate, PitchTrack};

