use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::calibrate::{map_pitch_to_y, Calibration};
use super::config::GameConfig;
use super::state::{EventKind, GameEvent};
use crate::error::{Error, Result};
use crate::pitch::PitchTrack;
use crate::stats::percentile;

/// Minimum approach, in screen units, that counts as reacting to a target.
pub const REACTION_THRESHOLD: f64 = 0.02;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionMetrics {
    pub phonation_time_ms: f64,
    pub pitch_change_mel: f64,
    pub duration_s: f64,
    /// Mean over collected targets; `None` when no reaction was observed.
    pub reaction_time_ms: Option<f64>,
    pub score: u32,
    pub spawns: u32,
    pub hits: u32,
    pub misses: u32,
    /// `hits / (hits + misses)`, `None` before any target was resolved.
    pub hit_rate: Option<f64>,
}

/// Derives session metrics from the event log and the control track that
/// drove the game.
pub fn compute_metrics(
    events: &[GameEvent],
    track: &PitchTrack,
    cfg: &GameConfig,
    cal: &Calibration,
) -> Result<SessionMetrics> {
    if events.windows(2).any(|w| !(w[0].t_ms <= w[1].t_ms)) {
        return Err(Error::structural("event timestamps must be non-decreasing"));
    }
    let end = match events.last() {
        Some(e) if e.kind == EventKind::SessionEnd => e.t_ms,
        _ => return Err(Error::structural("event log must end with SESSION_END")),
    };
    if events.iter().filter(|e| e.kind == EventKind::SessionEnd).count() != 1 {
        return Err(Error::structural("event log has more than one SESSION_END"));
    }

    let mels: Vec<f64> = track.voiced_mels().collect();
    let phonation_time_ms = mels.len() as f64 * track.hop_ms;
    let pitch_change_mel = match (percentile(&mels, 0.95), percentile(&mels, 0.05)) {
        (Some(hi), Some(lo)) => hi - lo,
        _ => 0.0,
    };

    let count = |kind| events.iter().filter(|e| e.kind == kind).count() as u32;
    let (spawns, hits, misses) = (count(EventKind::Spawn), count(EventKind::Hit), count(EventKind::Miss));
    let resolved = hits + misses;

    Ok(SessionMetrics {
        phonation_time_ms,
        pitch_change_mel,
        duration_s: end / 1000.0,
        reaction_time_ms: reaction_time(events, track, cfg, cal)?,
        score: hits,
        spawns,
        hits,
        misses,
        hit_rate: (resolved > 0).then(|| f64::from(hits) / f64::from(resolved)),
    })
}

/// Rebuilds the avatar path from the track, then for every collected target
/// measures the time from spawn until the avatar first got
/// [`REACTION_THRESHOLD`] closer to it than it was at spawn.
fn reaction_time(
    events: &[GameEvent],
    track: &PitchTrack,
    cfg: &GameConfig,
    cal: &Calibration,
) -> Result<Option<f64>> {
    let mut clock = Vec::with_capacity(track.len());
    let mut path = Vec::with_capacity(track.len());
    let (mut t, mut y) = (0.0, 0.5);
    for est in &track.estimates {
        t += track.hop_ms;
        if let (true, Some(mel)) = (est.voiced, est.mel) {
            y = map_pitch_to_y(mel, cal, cfg.sensitivity);
        }
        clock.push(t);
        path.push(y);
    }
    if clock.is_empty() {
        return Ok(None);
    }

    let mut total = 0.0;
    let mut n = 0u32;
    for spawn in events.iter().filter(|e| e.kind == EventKind::Spawn) {
        let (Some(id), Some(target_y)) = (spawn.target_id, spawn.y) else {
            return Err(Error::structural(format!("SPAWN at {} ms lacks target data", spawn.t_ms)));
        };
        let Some(hit) = events
            .iter()
            .find(|e| e.kind == EventKind::Hit && e.target_id == Some(id))
        else {
            continue;
        };
        let start = nearest_step(&clock, spawn.t_ms);
        let d0 = (path[start] - target_y).abs();
        let reacted = (start + 1..clock.len())
            .take_while(|&k| clock[k] <= hit.t_ms)
            .find(|&k| d0 - (path[k] - target_y).abs() >= REACTION_THRESHOLD);
        if let Some(k) = reacted {
            total += clock[k] - spawn.t_ms;
            n += 1;
        }
    }
    Ok((n > 0).then(|| total / f64::from(n)))
}

fn nearest_step(clock: &[f64], t: f64) -> usize {
    let i = clock.partition_point(|&c| c < t);
    if i == clock.len() || (i > 0 && t - clock[i - 1] < clock[i] - t) {
        i.saturating_sub(1).min(clock.len() - 1)
    } else {
        i
    }
}
