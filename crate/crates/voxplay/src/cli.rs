//! Command-line interface.

use std::fs;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use uuid::Uuid;
use voxplay_core::analytics::RuleTable;
use voxplay_core::eval::{builtin_suite, run_benchmark, SuiteFile, SUITE_VERSION};
use voxplay_core::game::{calibrate, replay, Calibration, GameConfig};
use voxplay_core::pipeline::LivePipeline;
use voxplay_core::pitch::{track_signal, EngineSettings, Method};
use voxplay_core::session::SessionRecord;
use voxplay_core::smooth_track;

use crate::server::{self, AppState};
use crate::sim::random_session;
use crate::store::{SaveOutcome, SessionStore};
use crate::wav::read_wav;

#[derive(Debug, Parser)]
#[command(name = "voxplay", version, about = "Voice-pitch rehabilitation game toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Benchmark the pitch estimators on a suite of synthetic voices.
    Evaluate {
        /// Suite file (JSON).
        #[arg(long, conflicts_with = "builtin", required_unless_present = "builtin")]
        suite: Option<PathBuf>,
        /// Built-in suite: `clean` or `dysphonic`.
        #[arg(long)]
        builtin: Option<String>,
        /// Where to write the JSON report; the text table goes to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-simulate a stored session and check its event log and metrics.
    Replay {
        #[arg(long)]
        session: PathBuf,
    },
    /// Print a patient's progress report as JSON.
    Report {
        #[arg(long)]
        patient: String,
        #[arg(long, env = "VOXPLAY_DATA_DIR", default_value = "voxplay-data")]
        data_dir: PathBuf,
        /// Suggestion rule table (JSON); the built-in table when omitted.
        #[arg(long, env = "VOXPLAY_RULES")]
        rules: Option<PathBuf>,
    },
    /// Run the HTTP and live streaming server.
    Serve {
        #[arg(long, env = "VOXPLAY_DATA_DIR", default_value = "voxplay-data")]
        data_dir: PathBuf,
        #[arg(long, env = "VOXPLAY_BIND", default_value = "127.0.0.1:8080")]
        bind: SocketAddr,
        #[arg(long, env = "VOXPLAY_TOKEN", hide_env_values = true)]
        token: Option<String>,
        #[arg(long, env = "VOXPLAY_RULES")]
        rules: Option<PathBuf>,
    },
    /// Print the pitch track of a 16-bit mono WAV file as CSV.
    Track {
        #[arg(long)]
        wav: PathBuf,
        #[arg(long, default_value = "YIN")]
        method: Method,
        /// Apply median smoothing.
        #[arg(long)]
        smooth: bool,
    },
    /// Derive a calibration from a recorded pitch sweep.
    Calibrate {
        #[arg(long)]
        wav: PathBuf,
        #[arg(long, default_value = "YIN")]
        method: Method,
    },
    /// Play a WAV recording through the game and store the session.
    Play {
        #[arg(long)]
        wav: PathBuf,
        #[arg(long)]
        patient: String,
        /// Calibration JSON; derived from the recording itself when omitted.
        #[arg(long)]
        calibration: Option<PathBuf>,
        /// GameConfig JSON; defaults when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, env = "VOXPLAY_DATA_DIR", default_value = "voxplay-data")]
        data_dir: PathBuf,
    },
    /// Store seeded random sessions for a patient.
    Simulate {
        #[arg(long)]
        patient: String,
        #[arg(long, default_value_t = 1)]
        count: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, env = "VOXPLAY_DATA_DIR", default_value = "voxplay-data")]
        data_dir: PathBuf,
    },
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> anyhow::Result<T> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_slice(&bytes).with_context(|| format!("parsing {}", path.display()))
}

fn load_rules(path: Option<&Path>) -> anyhow::Result<RuleTable> {
    path.map_or_else(|| Ok(RuleTable::default()), read_json)
}

pub fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Evaluate { suite, builtin, out } => {
            let suite: SuiteFile = match (suite, builtin) {
                (Some(path), _) => read_json(&path)?,
                (None, Some(name)) => SuiteFile {
                    version: SUITE_VERSION,
                    signals: builtin_suite(&name)?,
                    methods: None,
                },
                (None, None) => bail!("pass --suite or --builtin"),
            };
            if suite.version != SUITE_VERSION {
                bail!("unsupported suite version {} (expected {SUITE_VERSION})", suite.version);
            }
            let report = run_benchmark(&suite.signals, &suite.settings())?;
            print!("{}", report.to_text());
            if let Some(out) = out {
                fs::write(&out, serde_json::to_vec_pretty(&report)?)
                    .with_context(|| format!("writing {}", out.display()))?;
            }
        }
        Command::Replay { session } => {
            let rec: SessionRecord = read_json(&session)?;
            rec.verify().context("metrics check")?;
            let r = replay(&rec.config, &rec.calibration, &rec.pitch_track()?)?;
            if r.events != rec.events {
                rec.verify_replay().context("event log check")?;
            }
            println!(
                "session {} reproduced: {} events, score {}, state hash {:016x}",
                rec.session_id,
                r.events.len(),
                r.state.score,
                r.state.state_hash()
            );
        }
        Command::Report {
            patient,
            data_dir,
            rules,
        } => {
            let store = SessionStore::open(&data_dir)?;
            let report = store.progress(&patient, &load_rules(rules.as_deref())?)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
        }
        Command::Serve {
            data_dir,
            bind,
            token,
            rules,
        } => {
            let state = AppState::new(SessionStore::open(&data_dir)?, token, load_rules(rules.as_deref())?);
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(async {
                let listener = tokio::net::TcpListener::bind(bind).await?;
                tracing::info!(addr = %listener.local_addr()?, data_dir = %data_dir.display(), "listening");
                server::serve(listener, state, async {
                    let _ = tokio::signal::ctrl_c().await;
                })
                .await
            })?;
        }
        Command::Track { wav, method, smooth } => {
            let pcm = read_wav(&wav)?;
            let settings = EngineSettings::with_method(method);
            let mut track = track_signal(&pcm.samples, pcm.sample_rate, &settings)?;
            if smooth {
                track = smooth_track(&track, settings.median_window)?;
            }
            println!("t_ms,f0_hz,mel,confidence,voiced");
            for e in &track.estimates {
                let opt = |v: Option<f64>| v.map_or(String::new(), |v| format!("{v:.3}"));
                println!(
                    "{:.3},{},{},{:.4},{}",
                    e.t_ms,
                    opt(e.f0_hz),
                    opt(e.mel),
                    e.confidence,
                    e.voiced
                );
            }
        }
        Command::Calibrate { wav, method } => {
            let cal = calibrate_wav(&wav, method)?;
            println!("{}", serde_json::to_string_pretty(&cal)?);
        }
        Command::Play {
            wav,
            patient,
            calibration,
            config,
            data_dir,
        } => {
            let cal = match calibration {
                Some(path) => read_json(&path)?,
                None => calibrate_wav(&wav, Method::Yin)?,
            };
            let cfg: GameConfig = config.as_deref().map_or_else(|| Ok(GameConfig::default()), read_json)?;
            let rec = play_wav(&wav, &patient, cfg, cal)?;
            let store = SessionStore::open(&data_dir)?;
            store.save(&rec)?;
            println!("{}", serde_json::to_string_pretty(&rec.metrics)?);
            eprintln!("saved session {}", rec.session_id);
        }
        Command::Simulate {
            patient,
            count,
            seed,
            data_dir,
        } => {
            let store = SessionStore::open(&data_dir)?;
            for s in seed..seed + count {
                let rec = random_session(&patient, s);
                let outcome = store.save(&rec)?;
                let note = if outcome == SaveOutcome::Unchanged { " (already stored)" } else { "" };
                println!("{}{note}", rec.session_id);
            }
        }
    }
    Ok(())
}

fn calibrate_wav(wav: &Path, method: Method) -> anyhow::Result<Calibration> {
    let pcm = read_wav(wav)?;
    let settings = EngineSettings::with_method(method);
    let track = smooth_track(&track_signal(&pcm.samples, pcm.sample_rate, &settings)?, settings.median_window)?;
    Ok(calibrate(&track)?)
}

/// Streams a recording through the live pipeline and returns the session.
pub fn play_wav(wav: &Path, patient: &str, cfg: GameConfig, cal: Calibration) -> anyhow::Result<SessionRecord> {
    let pcm = read_wav(wav)?;
    let mut p = LivePipeline::new(EngineSettings::default(), pcm.sample_rate, cfg.clone(), cal)?;
    p.push_samples(&pcm.samples)?;
    p.finish()?;
    Ok(SessionRecord::new(
        Uuid::new_v4(),
        patient.to_string(),
        chrono::Utc::now(),
        cfg,
        cal,
        &p.control_track()?,
        p.events().to_vec(),
    )?)
}
