use std::fs;
use std::path::{Path, PathBuf};

use rehab_core::store::*;
use tempfile::TempDir;

fn write_session(dir: &Path, trials: usize, patient: &str, session: &str, started: &str) -> PathBuf {
    synth_session(&SynthParams::default(), trials, patient, session, started)
        .unwrap()
        .write_to(dir)
        .unwrap()
}

fn ingest(store: &Store, manifest: &Path) -> Result<SessionRecord, StoreError> {
    let text = fs::read_to_string(manifest).unwrap();
    store.ingest_session(&text, manifest.parent().unwrap(), IngestOptions::default())
}

/// Every file under `root` with its bytes, sorted by path.
fn snapshot(root: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.push((path.strip_prefix(root).unwrap().to_path_buf(), fs::read(&path).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn empty_store() {
    let tmp = TempDir::new().unwrap();
    let store = Store::open(tmp.path().join("store")).unwrap();
    assert!(store.list_patients().is_empty());
    assert!(matches!(store.get_session("S1"), Err(StoreError::NotFound { kind: "session", .. })));
}

#[test]
fn ingest_then_reopen_is_identical() {
    let tmp = TempDir::new().unwrap();
    let m = write_session(&tmp.path().join("in"), 6, "P1", "S1", "2024-02-01T09:00:00Z");
    let root = tmp.path().join("store");
    let store = Store::open(&root).unwrap();
    let rec = ingest(&store, &m).unwrap();
    assert_eq!(rec.trials.len(), 6);
    assert_eq!(store.list_patients().len(), 1);

    let reopened = Store::open(&root).unwrap();
    assert_eq!(reopened.get_session("S1").unwrap(), store.get_session("S1").unwrap());
    assert_eq!(reopened.list_patients(), store.list_patients());
    let a = store.get_trial("S1", "trial3").unwrap();
    let b = reopened.get_trial("S1", "trial3").unwrap();
    assert_eq!(a.record, b.record);
    assert_eq!(*a.capture, *b.capture);
    assert_eq!(a.content_hash, b.content_hash);
    assert!(matches!(store.get_trial("S1", "bogus"), Err(StoreError::NotFound { kind: "trial", .. })));
}

#[test]
fn trials_follow_timestamps() {
    let tmp = TempDir::new().unwrap();
    let m = write_session(&tmp.path().join("in"), 6, "P1", "S1", "2024-02-01T09:00:00Z");
    let mut doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(&m).unwrap()).unwrap();
    doc["trials"].as_array_mut().unwrap().reverse();
    fs::write(&m, serde_json::to_string_pretty(&doc).unwrap()).unwrap();
    let store = Store::open(tmp.path().join("store")).unwrap();
    let rec = ingest(&store, &m).unwrap();
    let ids: Vec<_> = rec.trials.iter().map(|t| t.trial_id.as_str()).collect();
    assert_eq!(ids, ["trial1", "trial2", "trial3", "trial4", "trial5", "trial6"]);
}

#[test]
fn idempotent_and_duplicate_ingest() {
    let tmp = TempDir::new().unwrap();
    let m = write_session(&tmp.path().join("in"), 2, "P1", "S1", "2024-02-01T09:00:00Z");
    let root = tmp.path().join("store");
    let store = Store::open(&root).unwrap();
    let first = ingest(&store, &m).unwrap();
    let before = snapshot(&root);
    assert_eq!(ingest(&store, &m).unwrap(), first);
    assert_eq!(snapshot(&root), before);
    assert_eq!(store.get_patient("P1").unwrap().sessions, vec!["S1".to_string()]);

    // same id, different capture content
    let other = tmp.path().join("other");
    let mut s = synth_session(&SynthParams { seed: 99, noise_sigma: 0.01, ..SynthParams::default() }, 2, "P1", "S1", "2024-02-01T09:00:00Z").unwrap();
    s.manifest.display_name = "Synthetic patient P1".into();
    let m2 = s.write_to(&other).unwrap();
    assert!(matches!(ingest(&store, &m2), Err(StoreError::DuplicateSessionId { .. })));
    assert_eq!(snapshot(&root), before);
}

#[test]
fn schema_and_capture_errors() {
    let tmp = TempDir::new().unwrap();
    let m = write_session(&tmp.path().join("in"), 2, "P1", "S1", "2024-02-01T09:00:00Z");
    let store = Store::open(tmp.path().join("store")).unwrap();
    let text = fs::read_to_string(&m).unwrap();
    let base = m.parent().unwrap();

    let mut doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    doc["trials"][1]["upper_limit_m"] = serde_json::json!(-1.0);
    match store.ingest_session(&doc.to_string(), base, IngestOptions::default()) {
        Err(StoreError::SchemaViolation { field, .. }) => assert!(field.contains("trial2"), "{field}"),
        other => panic!("{other:?}"),
    }

    let mut doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    doc["trials"][0]["trc_file"] = serde_json::json!("absent.trc");
    assert!(matches!(
        store.ingest_session(&doc.to_string(), base, IngestOptions::default()),
        Err(StoreError::MissingCapture { .. })
    ));

    fs::write(base.join("trial2.trc"), "garbage").unwrap();
    assert!(matches!(
        store.ingest_session(&text, base, IngestOptions::default()),
        Err(StoreError::InvalidCapture { .. })
    ));

    let mut doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    doc["trials"][0]["primary_joint"] = serde_json::json!("Wand");
    doc["trials"][0]["trc_file"] = serde_json::json!("trial1.trc");
    assert!(matches!(
        store.ingest_session(&doc.to_string(), base, IngestOptions::default()),
        Err(StoreError::InvalidCapture { .. })
    ));
    assert!(store.list_patients().is_empty());
    assert!(fs::read_dir(store.root()).unwrap().next().is_none());
}

#[test]
fn crash_before_commit_keeps_prior_state() {
    let tmp = TempDir::new().unwrap();
    let root = tmp.path().join("store");
    let store = Store::open(&root).unwrap();
    let m1 = write_session(&tmp.path().join("a"), 2, "P1", "S1", "2024-02-01T09:00:00Z");
    ingest(&store, &m1).unwrap();
    let before_hash = store.get_trial("S1", "trial1").unwrap().content_hash;

    let m2 = write_session(&tmp.path().join("b"), 3, "P1", "S2", "2024-02-08T09:00:00Z");
    let text = fs::read_to_string(&m2).unwrap();
    let crashed = store.ingest_session_with_hook(&text, m2.parent().unwrap(), IngestOptions::default(), || {
        Err(std::io::Error::other("simulated crash"))
    });
    assert!(crashed.is_err());

    // a fresh process sees exactly the prior state, staging debris ignored
    let reopened = Store::open(&root).unwrap();
    assert_eq!(reopened.get_patient("P1").unwrap().sessions, vec!["S1".to_string()]);
    assert!(matches!(reopened.get_session("S2"), Err(StoreError::NotFound { .. })));
    assert_eq!(reopened.get_trial("S1", "trial1").unwrap().content_hash, before_hash);
    let staging = fs::read_dir(root.join("P1"))
        .unwrap()
        .filter(|e| e.as_ref().unwrap().file_name().to_string_lossy().starts_with(".ingest-"))
        .count();
    assert_eq!(staging, 1);

    // retry succeeds
    ingest(&reopened, &m2).unwrap();
    assert_eq!(reopened.get_patient("P1").unwrap().sessions.len(), 2);
}

#[test]
fn patients_and_display_names() {
    let tmp = TempDir::new().unwrap();
    let store = Store::open(tmp.path().join("store")).unwrap();
    for (p, s, t) in [("P2", "S3", "2024-01-10T10:00:00Z"), ("P1", "S1", "2024-01-01T10:00:00Z"), ("P1", "S2", "2024-01-08T10:00:00Z")] {
        let m = write_session(&tmp.path().join(s), 1, p, s, t);
        ingest(&store, &m).unwrap();
    }
    let ids: Vec<_> = store.list_patients().into_iter().map(|p| p.patient_id).collect();
    assert_eq!(ids, ["P1", "P2"]);
    let p1 = store.get_patient("P1").unwrap();
    assert_eq!(p1.sessions, ["S1", "S2"]);
    assert_eq!(p1.display_name, "Synthetic patient P1");
}

#[test]
fn generator_is_deterministic() {
    let p = SynthParams { noise_sigma: 0.03, shoulder_drift_m: 0.05, seed: 17, ..SynthParams::default() };
    let a = synth_session(&p, 2, "P", "S", "2024-01-01T00:00:00Z").unwrap();
    let b = synth_session(&p, 2, "P", "S", "2024-01-01T00:00:00Z").unwrap();
    assert_eq!(a.files, b.files);
    assert_eq!(a.manifest.to_json(), b.manifest.to_json());
    assert_ne!(a.files[0].1, a.files[1].1, "trials use successive seeds");
}
