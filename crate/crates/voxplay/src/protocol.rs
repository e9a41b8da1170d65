//! The `/ws/live` streaming protocol.
//!
//! Every WebSocket binary message carries one or more frames, each a
//! little-endian `u32` byte length followed by that many bytes of UTF-8 JSON.
//! A JSON message is an object whose `type` field selects the variant:
//!
//! * client to server: `START`, `AUDIO_CHUNK`, `STOP`
//! * server to client: `STATE`, `EVENT`, `SESSION_SAVED`, `WARNING`, `ERROR`
//!
//! Audio samples travel as base64 of little-endian `f32` values.
//! [`LiveSession`] implements the server side without any networking.

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use uuid::Uuid;
use voxplay_core::game::{validate_config, Calibration, GameConfig, GameEvent, Target};
use voxplay_core::pipeline::{HopUpdate, LivePipeline};
use voxplay_core::pitch::{EngineSettings, DEFAULT_SAMPLE_RATE};
use voxplay_core::session::SessionRecord;

/// Chunks whose timestamp trails the server's stream position by more than
/// this are dropped.
pub const LATE_CHUNK_MS: f64 = 500.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartRequest {
    pub patient_id: String,
    #[serde(default = "default_sample_rate")]
    pub sample_rate: u32,
    #[serde(default)]
    pub config: GameConfig,
    pub calibration: Calibration,
    #[serde(default)]
    pub engine_settings: EngineSettings,
    /// Chosen by the server when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub session_id: Option<Uuid>,
}

fn default_sample_rate() -> u32 {
    DEFAULT_SAMPLE_RATE
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ClientMessage {
    Start(StartRequest),
    AudioChunk {
        /// Client time of the first sample, relative to the stream start.
        t_ms: f64,
        samples: String,
    },
    Stop,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateSnapshot {
    pub clock_ms: f64,
    pub avatar_y: f64,
    pub targets: Vec<Target>,
    pub score: u32,
    pub mel: Option<f64>,
    pub voiced: bool,
    pub finished: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ServerMessage {
    State(StateSnapshot),
    Event { event: GameEvent },
    SessionSaved { session_id: Uuid },
    Warning { message: String },
    Error { message: String },
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ProtocolError {
    #[error("malformed message: {0}")]
    Malformed(String),
    #[error("{0} before START")]
    NotStarted(&'static str),
    #[error("START received twice")]
    AlreadyStarted,
    #[error("START rejected: {0}")]
    Rejected(String),
    #[error("engine failure: {0}")]
    Engine(#[from] voxplay_core::Error),
}

pub fn encode_frame<T: Serialize>(msg: &T) -> Vec<u8> {
    let json = serde_json::to_vec(msg).expect("protocol messages always serialize");
    let mut out = Vec::with_capacity(4 + json.len());
    out.extend_from_slice(&(json.len() as u32).to_le_bytes());
    out.extend_from_slice(&json);
    out
}

/// Splits a message body into frames and parses each one.
pub fn decode_frames<T: for<'de> Deserialize<'de>>(mut bytes: &[u8]) -> Result<Vec<T>, ProtocolError> {
    let mut out = Vec::new();
    if bytes.is_empty() {
        return Err(ProtocolError::Malformed("empty message".into()));
    }
    while !bytes.is_empty() {
        let Some((head, rest)) = bytes.split_first_chunk::<4>() else {
            return Err(ProtocolError::Malformed("truncated length prefix".into()));
        };
        let len = u32::from_le_bytes(*head) as usize;
        if rest.len() < len {
            return Err(ProtocolError::Malformed(format!(
                "frame declares {len} bytes, {} available",
                rest.len()
            )));
        }
        let (body, tail) = rest.split_at(len);
        out.push(serde_json::from_slice(body).map_err(|e| ProtocolError::Malformed(e.to_string()))?);
        bytes = tail;
    }
    Ok(out)
}

pub fn encode_samples(samples: &[f32]) -> String {
    let bytes: Vec<u8> = samples.iter().flat_map(|s| s.to_le_bytes()).collect();
    STANDARD.encode(bytes)
}

pub fn decode_samples(b64: &str) -> Result<Vec<f64>, ProtocolError> {
    let bytes = STANDARD
        .decode(b64)
        .map_err(|e| ProtocolError::Malformed(format!("audio payload: {e}")))?;
    if bytes.len() % 4 != 0 {
        return Err(ProtocolError::Malformed(format!(
            "audio payload of {} bytes is not a whole number of f32 samples",
            bytes.len()
        )));
    }
    bytes
        .chunks_exact(4)
        .map(|c| {
            let v = f32::from_le_bytes([c[0], c[1], c[2], c[3]]);
            if v.is_finite() {
                Ok(f64::from(v))
            } else {
                Err(ProtocolError::Malformed("non-finite audio sample".into()))
            }
        })
        .collect()
}

/// Messages to send, and the finished session if this step completed one.
/// The caller must persist `completed` before announcing `SESSION_SAVED`.
#[derive(Debug, Default)]
pub struct Outcome {
    pub messages: Vec<ServerMessage>,
    pub completed: Option<SessionRecord>,
}

#[derive(Debug)]
struct Running {
    pipeline: LivePipeline,
    patient_id: String,
    session_id: Uuid,
    started_at: DateTime<Utc>,
}

#[derive(Debug, Default)]
enum Phase {
    #[default]
    AwaitStart,
    Running(Box<Running>),
    Done,
}

#[derive(Debug, Default)]
pub struct LiveSession {
    phase: Phase,
}

impl LiveSession {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_running(&self) -> bool {
        matches!(self.phase, Phase::Running(_))
    }

    pub fn is_done(&self) -> bool {
        matches!(self.phase, Phase::Done)
    }

    pub fn handle(&mut self, msg: ClientMessage, now: DateTime<Utc>) -> Result<Outcome, ProtocolError> {
        match (&mut self.phase, msg) {
            (Phase::AwaitStart, ClientMessage::Start(req)) => {
                self.phase = Phase::Running(Box::new(start(req, now)?));
                Ok(Outcome::default())
            }
            (Phase::AwaitStart, ClientMessage::AudioChunk { .. }) => Err(ProtocolError::NotStarted("AUDIO_CHUNK")),
            (Phase::AwaitStart, ClientMessage::Stop) => Err(ProtocolError::NotStarted("STOP")),
            (Phase::Running(_) | Phase::Done, ClientMessage::Start(_)) => Err(ProtocolError::AlreadyStarted),
            (Phase::Running(run), ClientMessage::AudioChunk { t_ms, samples }) => {
                let samples = decode_samples(&samples)?;
                let p = &mut run.pipeline;
                let position_ms = p.samples_received() as f64 * 1000.0 / f64::from(p.sample_rate());
                if t_ms + LATE_CHUNK_MS < position_ms {
                    tracing::warn!(t_ms, position_ms, "dropping late audio chunk");
                    return Ok(Outcome {
                        messages: vec![ServerMessage::Warning {
                            message: format!(
                                "dropped audio chunk stamped {t_ms:.1} ms; stream is at {position_ms:.1} ms"
                            ),
                        }],
                        completed: None,
                    });
                }
                let updates = p.push_samples(&samples)?;
                let mut messages = hop_messages(updates);
                if p.is_finished() {
                    let mut out = self.complete()?;
                    messages.append(&mut out.messages);
                    out.messages = messages;
                    return Ok(out);
                }
                Ok(Outcome {
                    messages,
                    completed: None,
                })
            }
            (Phase::Running(_), ClientMessage::Stop) => self.complete(),
            // Chunks or STOP racing the end of a finished session are harmless.
            (Phase::Done, _) => Ok(Outcome::default()),
        }
    }

    /// Ends a running session as if STOP had been received; used when the
    /// connection drops. Does nothing in other phases.
    pub fn abort(&mut self) -> Result<Option<SessionRecord>, ProtocolError> {
        if self.is_running() {
            Ok(self.complete()?.completed)
        } else {
            Ok(None)
        }
    }

    fn complete(&mut self) -> Result<Outcome, ProtocolError> {
        let Phase::Running(mut run) = std::mem::replace(&mut self.phase, Phase::Done) else {
            unreachable!("complete is only called while running");
        };
        let p = &mut run.pipeline;
        let flush = p.finish()?;
        let mut messages = hop_messages(flush.updates);
        messages.extend(flush.closing.into_iter().map(|event| ServerMessage::Event { event }));
        let record = SessionRecord::new(
            run.session_id,
            run.patient_id,
            run.started_at,
            p.config().clone(),
            *p.calibration(),
            &p.control_track()?,
            p.events().to_vec(),
        )?;
        Ok(Outcome {
            messages,
            completed: Some(record),
        })
    }
}

fn start(req: StartRequest, now: DateTime<Utc>) -> Result<Running, ProtocolError> {
    if req.patient_id.is_empty() {
        return Err(ProtocolError::Rejected("patient_id is empty".into()));
    }
    if let Err(violations) = validate_config(&req.config) {
        let text: Vec<String> = violations.iter().map(ToString::to_string).collect();
        return Err(ProtocolError::Rejected(text.join("; ")));
    }
    let cal = Calibration::new(req.calibration.mel_low, req.calibration.mel_high)
        .map_err(|e| ProtocolError::Rejected(e.to_string()))?;
    let pipeline = LivePipeline::new(req.engine_settings, req.sample_rate, req.config, cal)
        .map_err(|e| ProtocolError::Rejected(e.to_string()))?;
    Ok(Running {
        pipeline,
        patient_id: req.patient_id,
        session_id: req.session_id.unwrap_or_else(Uuid::new_v4),
        started_at: now,
    })
}

fn hop_messages(updates: Vec<HopUpdate>) -> Vec<ServerMessage> {
    let mut out = Vec::new();
    for u in updates {
        out.extend(u.events.into_iter().map(|event| ServerMessage::Event { event }));
        out.push(ServerMessage::State(StateSnapshot {
            clock_ms: u.state.clock_ms,
            avatar_y: u.state.avatar_y,
            targets: u.state.targets,
            score: u.state.score,
            mel: u.estimate.mel.filter(|_| u.estimate.voiced),
            voiced: u.estimate.voiced,
            finished: u.state.finished,
        }));
    }
    out
}
