//! Deterministic side-scrolling target game driven by voice pitch.
//!
//! The avatar's vertical position follows the smoothed Mel pitch (see
//! [`map_pitch_to_y`]); targets spawn at the right edge on a seeded schedule
//! and drift left. Holding phonation with the avatar within `hit_radius` of a
//! target for `voice_maintenance_ms` collects it. Unvoiced frames freeze the
//! avatar so pauses for breath are not punished.
//!
//! Level parameters are interpreted as follows: `x_spread` is the mean time
//! between spawns in seconds (gaps are uniform in `[0.5, 1.5] * x_spread`),
//! `y_spread` is the height of the band, centered at 0.5, in which targets
//! appear, and `incoming_speed` is in screen widths per second.

mod calibrate;
mod config;
mod metrics;
mod state;

pub use calibrate::{calibrate, map_pitch_to_y, Calibration};
pub use config::{validate_config, GameConfig, Violation};
pub use metrics::{compute_metrics, SessionMetrics, REACTION_THRESHOLD};
pub use state::{replay, EventKind, GameEvent, GameState, Replay, Target, SPAWN_X, MISS_X};
