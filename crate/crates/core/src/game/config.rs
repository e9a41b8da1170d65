use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

/// Level-editor parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameConfig {
    /// Gain from normalized Mel offset to screen units.
    pub sensitivity: f64,
    /// Mean seconds between target spawns.
    pub x_spread: f64,
    /// Height of the vertical band targets spawn in, in (0, 1].
    pub y_spread: f64,
    /// Screen widths per second.
    pub incoming_speed: f64,
    pub voice_maintenance_ms: f64,
    pub session_duration_s: f64,
    pub hit_radius: f64,
    pub seed: u64,
}

impl Default for GameConfig {
    fn default() -> Self {
        Self {
            sensitivity: 1.0,
            x_spread: 4.0,
            y_spread: 0.6,
            incoming_speed: 0.1,
            voice_maintenance_ms: 500.0,
            session_duration_s: 120.0,
            hit_radius: 0.08,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub field: String,
    /// The rule that failed, e.g. `session_duration_s ≥ 10`.
    pub rule: String,
    pub value: f64,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (got {})", self.rule, self.value)
    }
}

/// Checks every constraint and reports all violations, not just the first.
pub fn validate_config(cfg: &GameConfig) -> Result<(), Vec<Violation>> {
    let checks: [(&str, f64, bool, &str); 7] = [
        ("sensitivity", cfg.sensitivity, cfg.sensitivity > 0.0, "sensitivity > 0"),
        ("x_spread", cfg.x_spread, cfg.x_spread > 0.0, "x_spread > 0"),
        ("y_spread", cfg.y_spread, cfg.y_spread > 0.0 && cfg.y_spread <= 1.0, "0 < y_spread ≤ 1"),
        ("incoming_speed", cfg.incoming_speed, cfg.incoming_speed > 0.0, "incoming_speed > 0"),
        (
            "voice_maintenance_ms",
            cfg.voice_maintenance_ms,
            cfg.voice_maintenance_ms > 0.0,
            "voice_maintenance_ms > 0",
        ),
        (
            "session_duration_s",
            cfg.session_duration_s,
            cfg.session_duration_s >= 10.0,
            "session_duration_s ≥ 10",
        ),
        ("hit_radius", cfg.hit_radius, cfg.hit_radius > 0.0 && cfg.hit_radius < 0.5, "0 < hit_radius < 0.5"),
    ];
    let violations: Vec<Violation> = checks
        .iter()
        .filter(|(_, value, ok, _)| !ok || !value.is_finite())
        .map(|(field, value, _, rule)| Violation {
            field: (*field).into(),
            rule: (*rule).into(),
            value: *value,
        })
        .collect();
    if violations.is_empty() {
        Ok(())
    } else {
        Err(violations)
    }
}

pub(crate) fn describe(violations: &[Violation]) -> String {
    let parts: Vec<String> = violations.iter().map(|v| format!("{v}")).collect();
    parts.join("; ")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        assert_eq!(validate_config(&GameConfig::default()), Ok(()));
    }

    #[test]
    fn short_session_rejected() {
        let cfg = GameConfig {
            session_duration_s: 5.0,
            ..GameConfig::default()
        };
        let v = validate_config(&cfg).unwrap_err();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].rule, "session_duration_s ≥ 10");
        assert_eq!(v[0].field, "session_duration_s");
    }

    #[test]
    fn all_violations_reported() {
        let cfg = GameConfig {
            y_spread: 1.5,
            incoming_speed: 0.0,
            ..GameConfig::default()
        };
        let v = validate_config(&cfg).unwrap_err();
        assert_eq!(v.len(), 2);
        let fields: Vec<&str> = v.iter().map(|x| x.field.as_str()).collect();
        assert_eq!(fields, ["y_spread", "incoming_speed"]);
    }

    #[test]
    fn non_finite_values_rejected() {
        let cfg = GameConfig {
            sensitivity: f64::INFINITY,
            hit_radius: f64::NAN,
            ..GameConfig::default()
        };
        assert_eq!(validate_config(&cfg).unwrap_err().len(), 2);
    }
}
