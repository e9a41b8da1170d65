use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::calibrate::{map_pitch_to_y, Calibration};
use super::config::{describe, validate_config, GameConfig};
use crate::error::{Error, Result};
use crate::pitch::{PitchEstimate, PitchTrack};
use crate::rng::XorShift64Star;

/// Horizontal position at which targets appear, just off the right edge.
pub const SPAWN_X: f64 = 1.1;
/// Targets that drift past this point are missed.
pub const MISS_X: f64 = -0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Target {
    pub id: u32,
    pub x: f64,
    pub y: f64,
    pub spawned_at_ms: f64,
    pub hold_ms: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EventKind {
    Spawn,
    Hit,
    Miss,
    PhonationStart,
    PhonationStop,
    SessionEnd,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameEvent {
    pub t_ms: f64,
    pub kind: EventKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_id: Option<u32>,
    /// Target height, present on `SPAWN`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<f64>,
}

impl GameEvent {
    fn at(t_ms: f64, kind: EventKind) -> Self {
        Self {
            t_ms,
            kind,
            target_id: None,
            y: None,
        }
    }

    fn target(t_ms: f64, kind: EventKind, id: u32) -> Self {
        Self {
            target_id: Some(id),
            ..Self::at(t_ms, kind)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameState {
    pub clock_ms: f64,
    pub avatar_y: f64,
    pub targets: Vec<Target>,
    pub score: u32,
    pub voiced: bool,
    pub finished: bool,
    pub next_spawn_ms: f64,
    pub next_target_id: u32,
    pub steps: u64,
    pub rng: XorShift64Star,
}

impl GameState {
    pub fn new(cfg: &GameConfig) -> Result<Self> {
        validate_config(cfg).map_err(|v| Error::Config(describe(&v)))?;
        let mut rng = XorShift64Star::new(cfg.seed);
        let next_spawn_ms = spawn_gap_ms(&mut rng, cfg);
        Ok(Self {
            clock_ms: 0.0,
            avatar_y: 0.5,
            targets: Vec::new(),
            score: 0,
            voiced: false,
            finished: false,
            next_spawn_ms,
            next_target_id: 0,
            steps: 0,
            rng,
        })
    }

    /// Advances the game by one analysis hop.
    pub fn step(
        &mut self,
        est: &PitchEstimate,
        cfg: &GameConfig,
        cal: &Calibration,
        dt_ms: f64,
    ) -> Result<Vec<GameEvent>> {
        if self.finished {
            return Err(Error::State("session already ended".into()));
        }
        if !(dt_ms.is_finite() && dt_ms > 0.0) {
            return Err(Error::Config(format!("step duration must be positive, got {dt_ms}")));
        }
        let mut events = Vec::new();
        let t = self.clock_ms + dt_ms;
        self.clock_ms = t;
        self.steps += 1;

        let mel = est.mel.filter(|_| est.voiced);
        let voiced = mel.is_some();
        if voiced != self.voiced {
            let kind = if voiced {
                EventKind::PhonationStart
            } else {
                EventKind::PhonationStop
            };
            events.push(GameEvent::at(t, kind));
            self.voiced = voiced;
        }
        if let Some(mel) = mel {
            self.avatar_y = map_pitch_to_y(mel, cal, cfg.sensitivity);
        }

        let dx = cfg.incoming_speed * dt_ms / 1000.0;
        let avatar = self.avatar_y;
        let mut score = self.score;
        self.targets.retain_mut(|target| {
            target.x -= dx;
            if voiced && (avatar - target.y).abs() <= cfg.hit_radius {
                target.hold_ms += dt_ms;
            } else {
                target.hold_ms = 0.0;
            }
            if target.hold_ms >= cfg.voice_maintenance_ms {
                score += 1;
                events.push(GameEvent::target(t, EventKind::Hit, target.id));
                false
            } else if target.x < MISS_X {
                events.push(GameEvent::target(t, EventKind::Miss, target.id));
                false
            } else {
                true
            }
        });
        self.score = score;

        while self.next_spawn_ms <= t {
            let half = cfg.y_spread / 2.0;
            let y = self.rng.uniform(0.5 - half, 0.5 + half);
            let id = self.next_target_id;
            self.next_target_id += 1;
            self.targets.push(Target {
                id,
                x: SPAWN_X,
                y,
                spawned_at_ms: t,
                hold_ms: 0.0,
            });
            events.push(GameEvent {
                y: Some(y),
                ..GameEvent::target(t, EventKind::Spawn, id)
            });
            self.next_spawn_ms += spawn_gap_ms(&mut self.rng, cfg);
        }

        if t >= cfg.session_duration_s * 1000.0 {
            self.finished = true;
            events.push(GameEvent::at(t, EventKind::SessionEnd));
        }
        Ok(events)
    }

    /// Ends the session before its configured duration, e.g. on a STOP request.
    pub fn end(&mut self) -> Result<Vec<GameEvent>> {
        if self.finished {
            return Err(Error::State("session already ended".into()));
        }
        self.finished = true;
        Ok(alloc::vec![GameEvent::at(self.clock_ms, EventKind::SessionEnd)])
    }

    /// 64-bit FNV-1a digest over the exact bit patterns of every field.
    pub fn state_hash(&self) -> u64 {
        let mut h = Fnv::new();
        h.f64(self.clock_ms);
        h.f64(self.avatar_y);
        h.u64(self.targets.len() as u64);
        for t in &self.targets {
            h.u64(t.id.into());
            h.f64(t.x);
            h.f64(t.y);
            h.f64(t.spawned_at_ms);
            h.f64(t.hold_ms);
        }
        h.u64(self.score.into());
        h.u64(self.voiced.into());
        h.u64(self.finished.into());
        h.f64(self.next_spawn_ms);
        h.u64(self.next_target_id.into());
        h.u64(self.steps);
        h.u64(self.rng.state());
        h.0
    }
}

fn spawn_gap_ms(rng: &mut XorShift64Star, cfg: &GameConfig) -> f64 {
    rng.uniform(0.5, 1.5) * cfg.x_spread * 1000.0
}

struct Fnv(u64);

impl Fnv {
    fn new() -> Self {
        Self(0xcbf2_9ce4_8422_2325)
    }

    fn u64(&mut self, v: u64) {
        for b in v.to_le_bytes() {
            self.0 ^= u64::from(b);
            self.0 = self.0.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }

    fn f64(&mut self, v: f64) {
        self.u64(v.to_bits());
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Replay {
    pub state: GameState,
    pub events: Vec<GameEvent>,
}

/// Re-runs a session from its recorded control track. If the track ends
/// before the configured duration, the session is ended at the last frame.
pub fn replay(cfg: &GameConfig, cal: &Calibration, track: &PitchTrack) -> Result<Replay> {
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
    Ok(Replay { state, events })
}
