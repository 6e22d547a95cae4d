use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use sha2::{Digest, Sha256};

use super::manifest::{check_timestamp, parse_manifest, SessionManifest, MANIFEST_FILE};
use super::{PatientRecord, SessionRecord, StoreError, TrialRecord};
use crate::trc::{parse_trc, MotionCapture};

#[derive(Debug, Clone, Copy, Default)]
pub struct IngestOptions {
    /// Ignore unknown manifest fields instead of rejecting them.
    pub lenient: bool,
}

/// A trial together with its parsed capture.
#[derive(Debug, Clone)]
pub struct TrialHandle {
    pub session_id: String,
    pub record: TrialRecord,
    pub capture: Arc<MotionCapture>,
    /// Hex SHA-256 of the stored `.trc` bytes.
    pub content_hash: String,
}

#[derive(Debug, Default)]
struct Index {
    patients: BTreeMap<String, PatientRecord>,
    sessions: HashMap<String, SessionRecord>,
}

/// Directory-backed store. Ingestion is serialized through an internal
/// lock; reads only touch committed files.
#[derive(Debug)]
pub struct Store {
    root: PathBuf,
    index: RwLock<Index>,
    captures: Mutex<HashMap<(String, String), TrialHandle>>,
    writer: Mutex<()>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn is_hidden(name: &std::ffi::OsStr) -> bool {
    name.to_string_lossy().starts_with('.')
}

fn write_synced(path: &Path, bytes: &[u8]) -> Result<(), StoreError> {
    let mut f = fs::File::create(path).map_err(StoreError::io(path))?;
    f.write_all(bytes).map_err(StoreError::io(path))?;
    f.sync_all().map_err(StoreError::io(path))
}

impl Store {
    /// Open (creating if needed) a store rooted at `root`.
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let root = root.into();
        fs::create_dir_all(&root).map_err(StoreError::io(&root))?;
        let store = Store {
            root,
            index: RwLock::default(),
            captures: Mutex::default(),
            writer: Mutex::new(()),
        };
        store.reload()?;
        Ok(store)
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Rescan the directory tree.
    pub fn reload(&self) -> Result<(), StoreError> {
        let index = self.scan()?;
        *self.index.write().expect("index lock") = index;
        self.captures.lock().expect("capture lock").clear();
        Ok(())
    }

    fn scan(&self) -> Result<Index, StoreError> {
        let mut index = Index::default();
        let mut latest: HashMap<String, (i64, SessionManifest)> = HashMap::new();
        let mut by_patient: BTreeMap<String, Vec<(i64, String)>> = BTreeMap::new();
        for patient_dir in read_dirs(&self.root)? {
            for session_dir in read_dirs(&patient_dir)? {
                let path = session_dir.join(MANIFEST_FILE);
                if !path.is_file() {
                    continue;
                }
                let text = fs::read_to_string(&path).map_err(StoreError::io(&path))?;
                let m = parse_manifest(&text, false)?;
                let t = check_timestamp("started_at", &m.started_at)?;
                by_patient
                    .entry(m.patient_id.clone())
                    .or_default()
                    .push((t, m.session_id.clone()));
                if latest.get(&m.patient_id).is_none_or(|(lt, _)| t >= *lt) {
                    latest.insert(m.patient_id.clone(), (t, m.clone()));
                }
                index.sessions.insert(m.session_id.clone(), m.to_record());
            }
        }
        for (patient_id, mut sessions) in by_patient {
            sessions.sort();
            let display_name = latest[&patient_id].1.display_name.clone();
            index.patients.insert(
                patient_id.clone(),
                PatientRecord {
                    patient_id,
                    display_name,
                    sessions: sessions.into_iter().map(|(_, id)| id).collect(),
                },
            );
        }
        Ok(index)
    }

    pub fn list_patients(&self) -> Vec<PatientRecord> {
        self.index.read().expect("index lock").patients.values().cloned().collect()
    }

    pub fn get_patient(&self, patient_id: &str) -> Result<PatientRecord, StoreError> {
        self.index
            .read()
            .expect("index lock")
            .patients
            .get(patient_id)
            .cloned()
            .ok_or_else(|| StoreError::NotFound {
                kind: "patient",
                id: patient_id.to_string(),
            })
    }

    pub fn get_session(&self, session_id: &str) -> Result<SessionRecord, StoreError> {
        self.index
            .read()
            .expect("index lock")
            .sessions
            .get(session_id)
            .cloned()
            .ok_or_else(|| StoreError::NotFound {
                kind: "session",
                id: session_id.to_string(),
            })
    }

    fn session_dir(&self, session: &SessionRecord) -> PathBuf {
        self.root.join(&session.patient_id).join(&session.session_id)
    }

    /// Trial record plus its capture, parsed on first access and cached.
    pub fn get_trial(&self, session_id: &str, trial_id: &str) -> Result<TrialHandle, StoreError> {
        let key = (session_id.to_string(), trial_id.to_string());
        if let Some(h) = self.captures.lock().expect("capture lock").get(&key) {
            return Ok(h.clone());
        }
        let session = self.get_session(session_id)?;
        let record = session.trial(trial_id).cloned().ok_or_else(|| StoreError::NotFound {
            kind: "trial",
            id: format!("{session_id}/{trial_id}"),
        })?;
        let path = self.session_dir(&session).join(&record.trc_path);
        let bytes = fs::read(&path).map_err(StoreError::io(&path))?;
        let capture = parse_capture(&record.trial_id, &bytes)?;
        let handle = TrialHandle {
            session_id: session_id.to_string(),
            record,
            capture: Arc::new(capture),
            content_hash: sha256_hex(&bytes),
        };
        self.captures
            .lock()
            .expect("capture lock")
            .insert(key, handle.clone());
        Ok(handle)
    }

    /// Validate a manifest and its captures, then commit the session.
    ///
    /// Re-ingesting identical content is a no-op returning the same record.
    pub fn ingest_session(
        &self,
        manifest_text: &str,
        base_dir: &Path,
        opts: IngestOptions,
    ) -> Result<SessionRecord, StoreError> {
        self.ingest_session_with_hook(manifest_text, base_dir, opts, || Ok(()))
    }

    /// As [`Store::ingest_session`], calling `before_commit` after every file
    /// is staged and before the final rename. An error from the hook aborts
    /// the ingest and leaves the staging directory behind, as a crash would.
    #[doc(hidden)]
    pub fn ingest_session_with_hook(
        &self,
        manifest_text: &str,
        base_dir: &Path,
        opts: IngestOptions,
        before_commit: impl FnOnce() -> std::io::Result<()>,
    ) -> Result<SessionRecord, StoreError> {
        let _guard = self.writer.lock().expect("writer lock");
        let mut manifest = parse_manifest(manifest_text, opts.lenient)?;

        let mut files = Vec::with_capacity(manifest.trials.len());
        for (i, trial) in manifest.trials.iter_mut().enumerate() {
            let src = base_dir.join(&trial.trc_path);
            if !src.is_file() {
                return Err(StoreError::MissingCapture {
                    trial_id: trial.trial_id.clone(),
                    path: src,
                });
            }
            let bytes = fs::read(&src).map_err(StoreError::io(&src))?;
            let capture = parse_capture(&trial.trial_id, &bytes)?;
            if capture.marker_index(&trial.primary_joint).is_none() {
                return Err(StoreError::InvalidCapture {
                    trial_id: trial.trial_id.clone(),
                    source: crate::trc::TrcError::JointNotFound {
                        joint: trial.primary_joint.to_string(),
                        available: capture.header.marker_names.clone(),
                    },
                });
            }
            let stored_name = format!("trial{}.trc", i + 1);
            trial.trc_path = PathBuf::from(&stored_name);
            files.push((stored_name, bytes));
        }
        let manifest_json = manifest.to_json();

        let patient_dir = self.root.join(&manifest.patient_id);
        let final_dir = patient_dir.join(&manifest.session_id);
        if let Some(existing) = self.existing_session(&manifest.session_id)? {
            if existing.patient_id == manifest.patient_id
                && self.same_content(&final_dir, &manifest_json, &files)?
            {
                return Ok(existing);
            }
            return Err(StoreError::DuplicateSessionId {
                session_id: manifest.session_id,
            });
        }

        fs::create_dir_all(&patient_dir).map_err(StoreError::io(&patient_dir))?;
        let staging = patient_dir.join(format!(
            ".ingest-{}-{}",
            manifest.session_id,
            std::process::id()
        ));
        if staging.exists() {
            fs::remove_dir_all(&staging).map_err(StoreError::io(&staging))?;
        }
        let staged = (|| {
            fs::create_dir(&staging).map_err(StoreError::io(&staging))?;
            for (name, bytes) in &files {
                write_synced(&staging.join(name), bytes)?;
            }
            write_synced(&staging.join(MANIFEST_FILE), manifest_json.as_bytes())
        })();
        if let Err(e) = staged {
            let _ = fs::remove_dir_all(&staging);
            return Err(e);
        }
        before_commit().map_err(StoreError::io(&staging))?;
        fs::rename(&staging, &final_dir).map_err(StoreError::io(&final_dir))?;
        if let Ok(dir) = fs::File::open(&patient_dir) {
            let _ = dir.sync_all();
        }

        self.reload()?;
        Ok(manifest.to_record())
    }

    fn existing_session(&self, session_id: &str) -> Result<Option<SessionRecord>, StoreError> {
        // Another process may have committed since our last scan.
        self.reload()?;
        Ok(self.get_session(session_id).ok())
    }

    fn same_content(
        &self,
        dir: &Path,
        manifest_json: &str,
        files: &[(String, Vec<u8>)],
    ) -> Result<bool, StoreError> {
        let path = dir.join(MANIFEST_FILE);
        let stored = fs::read_to_string(&path).map_err(StoreError::io(&path))?;
        if stored != manifest_json {
            return Ok(false);
        }
        for (name, bytes) in files {
            let path = dir.join(name);
            if fs::read(&path).map_err(StoreError::io(&path))? != *bytes {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

fn parse_capture(trial_id: &str, bytes: &[u8]) -> Result<MotionCapture, StoreError> {
    let invalid = |source| StoreError::InvalidCapture {
        trial_id: trial_id.to_string(),
        source,
    };
    let text = std::str::from_utf8(bytes)
        .map_err(|e| invalid(crate::trc::TrcError::MalformedHeader(format!("not UTF-8: {e}"))))?;
    parse_trc(text).map_err(invalid)
}

/// Visible subdirectories, sorted.
fn read_dirs(dir: &Path) -> Result<Vec<PathBuf>, StoreError> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(StoreError::io(dir))? {
        let entry = entry.map_err(StoreError::io(dir))?;
        if is_hidden(&entry.file_name()) {
            continue;
        }
        if entry.file_type().map_err(StoreError::io(entry.path()))?.is_dir() {
            out.push(entry.path());
        }
    }
    out.sort();
    Ok(out)
}
