//! Incremental audio → pitch → smoothing → game loop, as run for a live
//! stream. Feeding a whole recording through it gives exactly the same
//! control track as batch [`track_signal`](crate::pitch::track_signal)
//! followed by [`smooth_track`](crate::smooth::smooth_track).

use alloc::collections::VecDeque;
use alloc::vec::Vec;

use crate::error::Result;
use crate::game::{Calibration, GameConfig, GameEvent, GameState};
use crate::pitch::{detect_f0, AudioFrame, EngineSettings, PitchEstimate, PitchTrack};
use crate::smooth::StreamingSmoother;

/// Result of one game step.
#[derive(Debug, Clone, PartialEq)]
pub struct HopUpdate {
    /// The smoothed estimate that drove the step.
    pub estimate: PitchEstimate,
    pub events: Vec<GameEvent>,
    /// Game state right after the step.
    pub state: GameState,
}

/// What [`LivePipeline::finish`] produced: the last delayed hops and, if the
/// game was still running, the events that ended it.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Flush {
    pub updates: Vec<HopUpdate>,
    pub closing: Vec<GameEvent>,
}

#[derive(Debug, Clone)]
pub struct LivePipeline {
    settings: EngineSettings,
    sample_rate: u32,
    config: GameConfig,
    calibration: Calibration,
    hop_ms: f64,
    pending: VecDeque<f64>,
    next_frame: u64,
    smoother: StreamingSmoother,
    state: GameState,
    control: Vec<PitchEstimate>,
    events: Vec<GameEvent>,
    closed: bool,
}

impl LivePipeline {
    pub fn new(
        settings: EngineSettings,
        sample_rate: u32,
        config: GameConfig,
        calibration: Calibration,
    ) -> Result<Self> {
        settings.validate(sample_rate)?;
        let state = GameState::new(&config)?;
        Ok(Self {
            smoother: StreamingSmoother::new(settings.median_window)?,
            hop_ms: settings.hop_ms(sample_rate),
            settings,
            sample_rate,
            config,
            calibration,
            pending: VecDeque::new(),
            next_frame: 0,
            state,
            control: Vec::new(),
            events: Vec::new(),
            closed: false,
        })
    }

    pub fn state(&self) -> &GameState {
        &self.state
    }

    pub fn config(&self) -> &GameConfig {
        &self.config
    }

    pub fn calibration(&self) -> &Calibration {
        &self.calibration
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn hop_ms(&self) -> f64 {
        self.hop_ms
    }

    pub fn events(&self) -> &[GameEvent] {
        &self.events
    }

    /// True once the game has ended, by duration or by [`finish`](Self::finish).
    pub fn is_finished(&self) -> bool {
        self.state.finished
    }

    /// Samples received so far, including those already consumed.
    pub fn samples_received(&self) -> u64 {
        self.next_frame * self.settings.hop_len as u64 + self.pending.len() as u64
    }

    /// Appends samples and runs every hop that became complete. Samples are
    /// clamped to `[-1, 1]`; input after the game has ended is ignored.
    pub fn push_samples(&mut self, samples: &[f64]) -> Result<Vec<HopUpdate>> {
        if self.state.finished {
            return Ok(Vec::new());
        }
        self.pending.extend(samples.iter().map(|v| v.clamp(-1.0, 1.0)));
        let (n, hop) = (self.settings.frame_len, self.settings.hop_len);
        let mut updates = Vec::new();
        while self.pending.len() >= n && !self.state.finished {
            let start = self.next_frame * hop as u64;
            let frame = AudioFrame::new(
                self.pending.range(..n).copied().collect(),
                self.sample_rate,
                start as f64 * 1000.0 / self.sample_rate as f64,
            )?;
            let raw = detect_f0(&frame, &self.settings)?;
            self.pending.drain(..hop);
            self.next_frame += 1;
            if let Some(est) = self.smoother.push(raw) {
                updates.push(self.advance(est)?);
            }
        }
        Ok(updates)
    }

    /// Flushes the smoother and ends the game if it is still running. A
    /// trailing partial frame is discarded.
    pub fn finish(&mut self) -> Result<Flush> {
        let mut flush = Flush::default();
        if self.closed {
            return Ok(flush);
        }
        self.closed = true;
        for est in self.smoother.finish() {
            if self.state.finished {
                break;
            }
            flush.updates.push(self.advance(est)?);
        }
        if !self.state.finished {
            flush.closing = self.state.end()?;
            self.events.extend(flush.closing.iter().cloned());
        }
        Ok(flush)
    }

    fn advance(&mut self, est: PitchEstimate) -> Result<HopUpdate> {
        let events = self.state.step(&est, &self.config, &self.calibration, self.hop_ms)?;
        self.control.push(est);
        self.events.extend(events.iter().cloned());
        Ok(HopUpdate {
            estimate: est,
            events,
            state: self.state.clone(),
        })
    }

    /// The estimates that were fed to the game, in order.
    pub fn control_track(&self) -> Result<PitchTrack> {
        PitchTrack::new(self.settings.clone(), self.hop_ms, self.control.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::{synthesize, ContourPoint, SignalSpec, Waveform};
    use alloc::vec;
    use crate::game::{replay, EventKind};
    use crate::mel::hz_to_mel;
    use crate::pitch::track_signal;
    use crate::smooth::smooth_track;

    fn cfg() -> GameConfig {
        GameConfig {
            session_duration_s: 10.0,
            x_spread: 0.5,
            ..GameConfig::default()
        }
    }

    fn cal() -> Calibration {
        Calibration::new(hz_to_mel(150.0).unwrap(), hz_to_mel(300.0).unwrap()).unwrap()
    }

    fn glide() -> Vec<f64> {
        let mut spec = SignalSpec::constant(Waveform::Sawtooth, 180.0, 3.0);
        spec.f0_contour = vec![ContourPoint::voiced(0.0, 180.0), ContourPoint::voiced(3.0, 260.0)];
        spec.jitter_pct = 1.0;
        synthesize(&spec).unwrap().samples
    }

    #[test]
    fn chunked_equals_batch() {
        let samples = glide();
        let settings = EngineSettings::default();
        let mut live = LivePipeline::new(settings.clone(), 44_100, cfg(), cal()).unwrap();
        let mut updates = Vec::new();
        for chunk in samples.chunks(2205) {
            updates.extend(live.push_samples(chunk).unwrap());
        }
        let flush = live.finish().unwrap();
        updates.extend(flush.updates);

        let batch = smooth_track(&track_signal(&samples, 44_100, &settings).unwrap(), settings.median_window).unwrap();
        let control = live.control_track().unwrap();
        assert_eq!(control, batch);
        let r = replay(live.config(), live.calibration(), &control).unwrap();
        assert_eq!(r.events, live.events());
        let mut streamed: Vec<GameEvent> = updates.into_iter().flat_map(|u| u.events).collect();
        streamed.extend(flush.closing);
        assert_eq!(streamed, r.events);
        assert_eq!(r.state.state_hash(), live.state().state_hash());
    }

    #[test]
    fn tone_tracks_within_one_mel() {
        let samples = synthesize(&SignalSpec::constant(Waveform::Sine, 220.0, 2.0)).unwrap().samples;
        let mut live = LivePipeline::new(EngineSettings::default(), 44_100, cfg(), cal()).unwrap();
        let updates = live.push_samples(&samples).unwrap();
        let target = hz_to_mel(220.0).unwrap();
        assert!(updates.len() > 100);
        for u in &updates[5..] {
            let mel = u.estimate.mel.unwrap();
            assert!((mel - target).abs() < 1.0, "{mel}");
        }
    }

    #[test]
    fn stop_without_audio() {
        let mut live = LivePipeline::new(EngineSettings::default(), 44_100, cfg(), cal()).unwrap();
        let flush = live.finish().unwrap();
        assert!(flush.updates.is_empty());
        assert_eq!(flush.closing[0].kind, EventKind::SessionEnd);
        assert!(live.is_finished());
        assert!(live.control_track().unwrap().is_empty());
        assert_eq!(live.finish().unwrap(), Flush::default());
    }

    #[test]
    fn input_after_duration_ignored() {
        let samples = glide();
        let mut live = LivePipeline::new(EngineSettings::default(), 44_100, cfg(), cal()).unwrap();
        for _ in 0..5 {
            live.push_samples(&samples).unwrap();
        }
        assert!(live.is_finished());
        assert!(live.push_samples(&samples).unwrap().is_empty());
        assert_eq!(live.finish().unwrap(), Flush::default());
        assert_eq!(live.events().last().unwrap().kind, EventKind::SessionEnd);
        let r = replay(live.config(), live.calibration(), &live.control_track().unwrap()).unwrap();
        assert_eq!(r.events, live.events());
    }
}
