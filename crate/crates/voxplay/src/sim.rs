//! Seeded random sessions for demos, load tests and determinism checks.
//!
//! A session is generated from random level parameters and a random pitch
//! trace (a bounded Mel random walk broken by breathing pauses), then played
//! through the game exactly as a live stream would drive it.

use chrono::{DateTime, Duration, Utc};
use uuid::Uuid;
use voxplay_core::game::{Calibration, GameConfig, GameEvent, GameState};
use voxplay_core::pitch::{EngineSettings, PitchEstimate, PitchTrack};
use voxplay_core::rng::XorShift64Star;
use voxplay_core::session::SessionRecord;
use voxplay_core::{mel_to_hz, Result};

/// A random configuration that passes `validate_config`.
pub fn random_config(rng: &mut XorShift64Star) -> GameConfig {
    GameConfig {
        sensitivity: rng.uniform(0.5, 2.0),
        x_spread: rng.uniform(0.5, 6.0),
        y_spread: rng.uniform(0.1, 1.0),
        incoming_speed: rng.uniform(0.05, 0.5),
        voice_maintenance_ms: rng.uniform(50.0, 1000.0),
        session_duration_s: rng.uniform(10.0, 40.0),
        hit_radius: rng.uniform(0.02, 0.3),
        seed: rng.next_u64(),
    }
}

pub fn random_calibration(rng: &mut XorShift64Star) -> Calibration {
    let low = rng.uniform(150.0, 400.0);
    Calibration::new(low, low + rng.uniform(50.0, 300.0)).expect("width is positive")
}

/// `frames` estimates at `hop_ms`, wandering around the calibrated range.
pub fn random_trace(rng: &mut XorShift64Star, cal: &Calibration, frames: usize, hop_ms: f64) -> Result<PitchTrack> {
    let margin = 0.2 * (cal.mel_high - cal.mel_low);
    let (lo, hi) = (cal.mel_low - margin, cal.mel_high + margin);
    let mut mel = cal.mid();
    let mut voiced = true;
    let mut estimates = Vec::with_capacity(frames);
    for i in 0..frames {
        if rng.next_f64() < if voiced { 0.01 } else { 0.05 } {
            voiced = !voiced;
        }
        let t = i as f64 * hop_ms;
        if voiced {
            mel = (mel + rng.uniform(-8.0, 8.0)).clamp(lo, hi);
            estimates.push(PitchEstimate::voiced(t, mel_to_hz(mel)?, rng.uniform(0.6, 1.0))?);
        } else {
            estimates.push(PitchEstimate::unvoiced(t, rng.uniform(0.0, 0.4)));
        }
    }
    PitchTrack::new(EngineSettings::default(), hop_ms, estimates)
}

/// Plays a track through a fresh game the way the live pipeline does.
pub fn play(cfg: &GameConfig, cal: &Calibration, track: &PitchTrack) -> Result<(GameState, Vec<GameEvent>)> {
    let mut state = GameState::new(cfg)?;
    let mut events = Vec::new();
    for est in &track.estimates {
        if state.finished {
            break;
        }
        events.extend(state.step(est, cfg, cal, track.hop_ms)?);
    }
    if !state.finished {
        events.extend(state.end()?);
    }
    Ok((state, events))
}

/// A complete random session; the seed fixes every field, including the
/// session id and a start time `seed` days after 2024-01-01.
pub fn random_session(patient_id: &str, seed: u64) -> SessionRecord {
    let mut rng = XorShift64Star::new(seed);
    let cfg = random_config(&mut rng);
    let cal = random_calibration(&mut rng);
    let settings = EngineSettings::default();
    let hop_ms = settings.hop_ms(44_100);
    let max_frames = (cfg.session_duration_s * 1000.0 / hop_ms) as usize + 20;
    let frames = (rng.uniform(0.5, 1.0) * max_frames as f64) as usize + 1;
    let track = random_trace(&mut rng, &cal, frames, hop_ms).expect("trace stays in range");
    let (state, events) = play(&cfg, &cal, &track).expect("config is valid");
    let stepped = PitchTrack::new(settings, hop_ms, track.estimates[..state.steps as usize].to_vec())
        .expect("prefix of a valid track");
    let started = DateTime::<Utc>::from_timestamp(1_704_067_200, 0).expect("valid") + Duration::days(seed as i64);
    SessionRecord::new(
        Uuid::from_u64_pair(seed, rng.next_u64()),
        patient_id.to_string(),
        started,
        cfg,
        cal,
        &stepped,
        events,
    )
    .expect("simulated sessions are consistent")
}
