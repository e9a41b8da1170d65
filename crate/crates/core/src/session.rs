//! The persisted form of a played session.
//!
//! Only the control track that drove the game is kept, as Mel values with an
//! implicit voicing flag (a frame is voiced iff it carries a Mel value). Hz
//! values and confidences are dropped; the game never reads them.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use uuid::Uuid;

use crate::error::{Error, Result};
use crate::game::{compute_metrics, replay, Calibration, EventKind, GameConfig, GameEvent, SessionMetrics};
use crate::mel::mel_to_hz;
use crate::pitch::{EngineSettings, PitchEstimate, PitchTrack};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackFrame {
    pub t_ms: f64,
    #[serde(default)]
    pub mel: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredTrack {
    pub hop_ms: f64,
    pub frames: Vec<TrackFrame>,
}

impl StoredTrack {
    pub fn from_track(track: &PitchTrack) -> Self {
        Self {
            hop_ms: track.hop_ms,
            frames: track
                .estimates
                .iter()
                .map(|e| TrackFrame {
                    t_ms: e.t_ms,
                    mel: e.mel.filter(|_| e.voiced),
                })
                .collect(),
        }
    }

    /// Rebuilds a pitch track. Voiced frames get confidence 1, unvoiced 0.
    pub fn to_track(&self, settings: &EngineSettings) -> Result<PitchTrack> {
        let estimates = self
            .frames
            .iter()
            .map(|f| match f.mel {
                Some(mel) => {
                    let hz = mel_to_hz(mel)
                        .map_err(|_| Error::structural(format!("invalid mel {mel} at {} ms", f.t_ms)))?;
                    Ok(PitchEstimate {
                        t_ms: f.t_ms,
                        f0_hz: Some(hz),
                        mel: Some(mel),
                        confidence: 1.0,
                        voiced: true,
                    })
                }
                None => Ok(PitchEstimate::unvoiced(f.t_ms, 0.0)),
            })
            .collect::<Result<Vec<_>>>()?;
        PitchTrack::new(settings.clone(), self.hop_ms, estimates)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionRecord {
    pub schema_version: u32,
    pub session_id: Uuid,
    pub patient_id: String,
    pub started_at: DateTime<Utc>,
    pub config: GameConfig,
    pub calibration: Calibration,
    pub engine_settings: EngineSettings,
    pub track: StoredTrack,
    pub events: Vec<GameEvent>,
    pub metrics: SessionMetrics,
}

impl SessionRecord {
    /// Assembles a record, computing its metrics from the track and events.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        session_id: Uuid,
        patient_id: String,
        started_at: DateTime<Utc>,
        config: GameConfig,
        calibration: Calibration,
        track: &PitchTrack,
        events: Vec<GameEvent>,
    ) -> Result<Self> {
        let metrics = compute_metrics(&events, track, &config, &calibration)?;
        Ok(Self {
            schema_version: SCHEMA_VERSION,
            session_id,
            patient_id,
            started_at,
            config,
            calibration,
            engine_settings: track.settings.clone(),
            track: StoredTrack::from_track(track),
            events,
            metrics,
        })
    }

    pub fn pitch_track(&self) -> Result<PitchTrack> {
        self.track.to_track(&self.engine_settings)
    }

    /// Checks schema version, event references and that the stored metrics
    /// equal a fresh computation.
    pub fn verify(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::structural(format!(
                "unsupported schema version {}",
                self.schema_version
            )));
        }
        if self.patient_id.is_empty() {
            return Err(Error::structural("empty patient id"));
        }
        check_event_references(&self.events)?;
        let metrics = compute_metrics(&self.events, &self.pitch_track()?, &self.config, &self.calibration)?;
        if metrics != self.metrics {
            return Err(Error::structural("stored metrics do not match the track and events"));
        }
        Ok(())
    }

    /// Re-simulates the session and checks the event log is reproduced exactly.
    pub fn verify_replay(&self) -> Result<()> {
        let r = replay(&self.config, &self.calibration, &self.pitch_track()?)?;
        if r.events != self.events {
            let at = r
                .events
                .iter()
                .zip(&self.events)
                .position(|(a, b)| a != b)
                .unwrap_or(r.events.len().min(self.events.len()));
            return Err(Error::structural(format!(
                "replay diverges from the stored event log at event {at}"
            )));
        }
        Ok(())
    }
}

fn check_event_references(events: &[GameEvent]) -> Result<()> {
    let mut spawned = Vec::new();
    for e in events {
        match (e.kind, e.target_id) {
            (EventKind::Spawn, Some(id)) => spawned.push(id),
            (EventKind::Hit | EventKind::Miss, Some(id)) if spawned.contains(&id) => {}
            (EventKind::Spawn | EventKind::Hit | EventKind::Miss, _) => {
                return Err(Error::structural(format!(
                    "{:?} at {} ms references no spawned target",
                    e.kind, e.t_ms
                )))
            }
            _ => {}
        }
    }
    Ok(())
}

#[cfg(test)]
pub(crate) use tests::sample_record;
