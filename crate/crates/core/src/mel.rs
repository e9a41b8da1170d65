//! Hz <-> Mel conversion, `mel = 2595 * log10(1 + f / 700)`.

use alloc::format;

use crate::error::{Error, Result};

const MEL_SCALE: f64 = 2595.0;
const MEL_BREAK_HZ: f64 = 700.0;

pub fn hz_to_mel(f: f64) -> Result<f64> {
    if !(f >= 0.0) || !f.is_finite() {
        return Err(Error::Domain(format!("frequency must be finite and >= 0, got {f}")));
    }
    Ok(MEL_SCALE * libm::log10(1.0 + f / MEL_BREAK_HZ))
}

pub fn mel_to_hz(m: f64) -> Result<f64> {
    if !(m >= 0.0) || !m.is_finite() {
        return Err(Error::Domain(format!("mel must be finite and >= 0, got {m}")));
    }
    Ok(MEL_BREAK_HZ * (libm::pow(10.0, m / MEL_SCALE) - 1.0))
}
