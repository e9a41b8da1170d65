//! Append-only session storage.
//!
//! Layout under the data directory:
//!
//! ```text
//! index.json                          list of IndexEntry, rewritten atomically
//! sessions/<patient-hex>/<uuid>.json  one canonical SessionRecord per file
//! ```
//!
//! `<patient-hex>` is the hex encoding of the patient id's UTF-8 bytes, so any
//! opaque id maps to a safe directory name. Session files are written once and
//! never modified. The checksum of a session is the SHA-256 of its canonical
//! serialization (compact `serde_json`, struct field order).

use std::fs::{self, File};
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use uuid::Uuid;
use voxplay_core::analytics::{analyze_progress, ProgressReport, RuleTable};
use voxplay_core::session::SessionRecord;

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("session {session_id} of patient {patient_id} already stored with different content")]
    Conflict { patient_id: String, session_id: Uuid },
    #[error("not found: {0}")]
    NotFound(String),
    #[error("corrupt session {session_id}: {reason}")]
    Corrupt { session_id: Uuid, reason: String },
    #[error("invalid session: {0}")]
    Invalid(#[from] voxplay_core::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SaveOutcome {
    Created,
    /// Identical content was already stored.
    Unchanged,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexEntry {
    pub patient_id: String,
    pub session_id: Uuid,
    pub started_at: DateTime<Utc>,
    pub checksum: String,
}

pub fn canonical_bytes(rec: &SessionRecord) -> Vec<u8> {
    serde_json::to_vec(rec).expect("session records always serialize")
}

/// Lowercase hex SHA-256 of the canonical serialization.
pub fn checksum(rec: &SessionRecord) -> String {
    hex::encode(Sha256::digest(canonical_bytes(rec)))
}

#[derive(Debug)]
pub struct SessionStore {
    root: PathBuf,
    /// Guards the index and serializes writers.
    index: Mutex<Vec<IndexEntry>>,
}

impl SessionStore {
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let root = root.into();
        fs::create_dir_all(root.join("sessions"))?;
        let index_path = root.join("index.json");
        let index = match fs::read(&index_path) {
            Ok(bytes) => serde_json::from_slice(&bytes)?,
            Err(e) if e.kind() == io::ErrorKind::NotFound => Vec::new(),
            Err(e) => return Err(e.into()),
        };
        Ok(Self {
            root,
            index: Mutex::new(index),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn session_path(&self, patient_id: &str, session_id: Uuid) -> PathBuf {
        self.root
            .join("sessions")
            .join(hex::encode(patient_id.as_bytes()))
            .join(format!("{session_id}.json"))
    }

    fn lock(&self) -> std::sync::MutexGuard<'_, Vec<IndexEntry>> {
        self.index.lock().unwrap_or_else(|e| e.into_inner())
    }

    /// Persists a verified record. Saving identical content again is a no-op;
    /// different content under the same ids is a conflict. Returns after the
    /// file and index are synced to disk.
    pub fn save(&self, rec: &SessionRecord) -> Result<SaveOutcome, StoreError> {
        let bytes = canonical_bytes(rec);
        let sum = hex::encode(Sha256::digest(&bytes));
        let mut index = self.lock();
        if let Some(e) = index
            .iter()
            .find(|e| e.patient_id == rec.patient_id && e.session_id == rec.session_id)
        {
            return if e.checksum == sum {
                Ok(SaveOutcome::Unchanged)
            } else {
                Err(StoreError::Conflict {
                    patient_id: rec.patient_id.clone(),
                    session_id: rec.session_id,
                })
            };
        }
        rec.verify()?;
        let path = self.session_path(&rec.patient_id, rec.session_id);
        write_atomic(&path, &bytes)?;
        let mut next = index.clone();
        next.push(IndexEntry {
            patient_id: rec.patient_id.clone(),
            session_id: rec.session_id,
            started_at: rec.started_at,
            checksum: sum,
        });
        write_atomic(&self.root.join("index.json"), &serde_json::to_vec_pretty(&next)?)?;
        *index = next;
        Ok(SaveOutcome::Created)
    }

    pub fn entry(&self, patient_id: &str, session_id: Uuid) -> Option<IndexEntry> {
        self.lock()
            .iter()
            .find(|e| e.patient_id == patient_id && e.session_id == session_id)
            .cloned()
    }

    /// Loads a record, checking its checksum and recomputing its metrics.
    pub fn load(&self, patient_id: &str, session_id: Uuid) -> Result<SessionRecord, StoreError> {
        let entry = self
            .entry(patient_id, session_id)
            .ok_or_else(|| StoreError::NotFound(format!("session {session_id} of patient {patient_id}")))?;
        self.load_entry(&entry)
    }

    /// Loads a session by id alone; ids are unique in practice.
    pub fn load_session(&self, session_id: Uuid) -> Result<SessionRecord, StoreError> {
        let entry = self
            .lock()
            .iter()
            .find(|e| e.session_id == session_id)
            .cloned()
            .ok_or_else(|| StoreError::NotFound(format!("session {session_id}")))?;
        self.load_entry(&entry)
    }

    fn load_entry(&self, entry: &IndexEntry) -> Result<SessionRecord, StoreError> {
        let corrupt = |reason: String| StoreError::Corrupt {
            session_id: entry.session_id,
            reason,
        };
        let bytes = fs::read(self.session_path(&entry.patient_id, entry.session_id))?;
        let sum = hex::encode(Sha256::digest(&bytes));
        if sum != entry.checksum {
            return Err(corrupt(format!("checksum {sum} does not match index {}", entry.checksum)));
        }
        let rec: SessionRecord = serde_json::from_slice(&bytes).map_err(|e| corrupt(e.to_string()))?;
        rec.verify().map_err(|e| corrupt(e.to_string()))?;
        Ok(rec)
    }

    /// All sessions of a patient, oldest first.
    pub fn patient_sessions(&self, patient_id: &str) -> Result<Vec<SessionRecord>, StoreError> {
        let mut entries: Vec<IndexEntry> = self
            .lock()
            .iter()
            .filter(|e| e.patient_id == patient_id)
            .cloned()
            .collect();
        entries.sort_by_key(|e| (e.started_at, e.session_id));
        entries.iter().map(|e| self.load_entry(e)).collect()
    }

    pub fn progress(&self, patient_id: &str, rules: &RuleTable) -> Result<ProgressReport, StoreError> {
        let sessions = self.patient_sessions(patient_id)?;
        if sessions.is_empty() {
            return Err(StoreError::NotFound(format!("patient {patient_id}")));
        }
        Ok(analyze_progress(&sessions, rules)?)
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = path.parent().expect("store paths have a parent");
    fs::create_dir_all(dir)?;
    let tmp = dir.join(format!(
        ".{}.tmp",
        path.file_name().and_then(|n| n.to_str()).unwrap_or("write")
    ));
    let mut f = File::create(&tmp)?;
    f.write_all(bytes)?;
    f.sync_all()?;
    drop(f);
    fs::rename(&tmp, path)?;
    File::open(dir)?.sync_all()
}
