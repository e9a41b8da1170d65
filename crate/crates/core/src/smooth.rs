//! Median smoothing of pitch tracks for use as a control signal.
//!
//! Two passes, both expressed per output frame so that the batch and the
//! streaming forms agree exactly:
//!
//! 1. Unvoiced runs shorter than `h = (window - 1) / 2` frames that have
//!    voiced frames on both sides are filled by linear interpolation in Mel.
//! 2. Each voiced frame takes the median of the voiced Mel values within
//!    `h` frames on either side.
//!
//! Output frame `i` depends only on input frames `i - 2h ..= i + 2h`, so the
//! streaming smoother runs `2h` frames behind its input.

use alloc::collections::VecDeque;
use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::mel::mel_to_hz;
use crate::pitch::{PitchEstimate, PitchTrack};
use crate::stats::median;

fn half_width(window: usize) -> Result<usize> {
    if window == 0 || window.is_multiple_of(2) {
        return Err(Error::config(format!("median window must be odd and positive, got {window}")));
    }
    Ok((window - 1) / 2)
}

/// Mel value of frame `j` after gap bridging, `None` if it stays unvoiced.
/// `frames` is any slice containing `j`; bridging needs the full gap and both
/// neighbors inside the slice, which holds for gaps shorter than `h` when the
/// slice extends `h` frames past `j` on each side (or to the sequence ends).
fn bridged_mel(frames: &[PitchEstimate], j: usize, h: usize) -> Option<(f64, f64)> {
    let e = &frames[j];
    if e.voiced {
        return e.mel.map(|m| (m, e.confidence));
    }
    let left = (0..j).rev().take(h).find(|&k| frames[k].voiced)?;
    let right = (j + 1..frames.len()).take(h).find(|&k| frames[k].voiced)?;
    let gap = right - left - 1;
    if gap >= h {
        return None;
    }
    let (ml, mr) = (frames[left].mel?, frames[right].mel?);
    let frac = (j - left) as f64 / (right - left) as f64;
    Some((
        ml + (mr - ml) * frac,
        frames[left].confidence.min(frames[right].confidence),
    ))
}

/// Smoothed estimate for frame `i` of `frames`, which must contain every
/// frame within `2h` of `i` that exists in the full sequence.
fn smooth_at(frames: &[PitchEstimate], i: usize, h: usize) -> PitchEstimate {
    let t = frames[i].t_ms;
    let Some((_, confidence)) = bridged_mel(frames, i, h) else {
        return PitchEstimate::unvoiced(t, frames[i].confidence);
    };
    let lo = i.saturating_sub(h);
    let hi = (i + h).min(frames.len() - 1);
    let window: Vec<f64> = (lo..=hi).filter_map(|j| bridged_mel(frames, j, h).map(|v| v.0)).collect();
    let mel = median(&window).expect("window contains frame i");
    PitchEstimate {
        t_ms: t,
        f0_hz: mel_to_hz(mel).ok(),
        mel: Some(mel),
        confidence,
        voiced: true,
    }
}

/// Gap bridging followed by a running median over voiced Mel values.
pub fn smooth_track(track: &PitchTrack, median_window: usize) -> Result<PitchTrack> {
    let h = half_width(median_window)?;
    let frames = &track.estimates;
    let estimates = (0..frames.len()).map(|i| smooth_at(frames, i, h)).collect();
    Ok(PitchTrack {
        settings: track.settings.clone(),
        hop_ms: track.hop_ms,
        estimates,
    })
}

/// Online form of [`smooth_track`] with a fixed delay of `window - 1` frames.
#[derive(Debug, Clone)]
pub struct StreamingSmoother {
    h: usize,
    /// Input frames still needed; `buf[0]` has absolute index `base`.
    buf: VecDeque<PitchEstimate>,
    base: usize,
    next_out: usize,
}

impl StreamingSmoother {
    pub fn new(median_window: usize) -> Result<Self> {
        Ok(Self {
            h: half_width(median_window)?,
            buf: VecDeque::new(),
            base: 0,
            next_out: 0,
        })
    }

    /// Frames of delay between input and output.
    pub fn delay(&self) -> usize {
        2 * self.h
    }

    /// Feeds one raw estimate; returns the smoothed estimate that became
    /// final, if any.
    pub fn push(&mut self, est: PitchEstimate) -> Option<PitchEstimate> {
        self.buf.push_back(est);
        let received = self.base + self.buf.len();
        if received > self.next_out + 2 * self.h {
            Some(self.emit())
        } else {
            None
        }
    }

    /// Emits everything still pending, treating the input as ended.
    pub fn finish(&mut self) -> Vec<PitchEstimate> {
        let mut out = Vec::new();
        while self.next_out < self.base + self.buf.len() {
            out.push(self.emit());
        }
        out
    }

    fn emit(&mut self) -> PitchEstimate {
        let frames: Vec<PitchEstimate> = self.buf.iter().copied().collect();
        let est = smooth_at(&frames, self.next_out - self.base, self.h);
        self.next_out += 1;
        // Keep 2h frames of history before the next output.
        while self.base + 2 * self.h < self.next_out {
            self.buf.pop_front();
            self.base += 1;
        }
        est
    }
}
