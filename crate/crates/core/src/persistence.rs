//! Single-file project storage (`*.store.json`).
//!
//! Layout: `{ "integrity": {"algorithm", "digest"}, "project": {...},
//! "schema_version": n }`. Object keys are sorted at every level, entity
//! lists keep insertion order, and the digest covers the compact canonical
//! bytes of the `project` value.

use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::model::{join_violations, validate_project, Project, Violation, CURRENT_SCHEMA_VERSION};

pub const FILE_EXTENSION: &str = ".store.json";
pub const DEFAULT_FILE_NAME: &str = "project.store.json";
pub const HASH_ALGORITHM: &str = "sha256";

#[derive(Debug, Error)]
pub enum PersistError {
    #[error("invalid project: {}", join_violations(.0))]
    InvalidProject(Vec<Violation>),
    #[error("i/o failure: {0}")]
    IoFailure(#[from] std::io::Error),
    #[error("parse error: {0}")]
    ParseError(String),
    #[error("integrity mismatch: file records {recorded}, payload hashes to {actual}")]
    IntegrityMismatch { recorded: String, actual: String },
    #[error("unsupported schema version {0} (supported: 1..={CURRENT_SCHEMA_VERSION})")]
    UnsupportedSchemaVersion(u32),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Integrity {
    pub algorithm: String,
    pub digest: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectFile {
    pub schema_version: u32,
    pub integrity: Integrity,
    pub project: Value,
}

fn digest(algorithm: &str, bytes: &[u8]) -> Result<String, PersistError> {
    match algorithm {
        HASH_ALGORITHM => Ok(hex::encode(Sha256::digest(bytes))),
        other => Err(PersistError::ParseError(format!(
            "unknown integrity algorithm {other:?}"
        ))),
    }
}

// serde_json::Value keeps object keys in a BTreeMap, so serializing a Value
// always yields sorted keys.
fn canonical_payload(value: &Value) -> Vec<u8> {
    serde_json::to_vec(value).expect("Value serialization is infallible")
}

/// Canonical file bytes for a valid project.
pub fn to_bytes(project: &Project) -> Result<Vec<u8>, PersistError> {
    let violations = validate_project(project);
    if !violations.is_empty() {
        return Err(PersistError::InvalidProject(violations));
    }
    let payload = serde_json::to_value(project).map_err(|e| PersistError::ParseError(e.to_string()))?;
    let file = ProjectFile {
        schema_version: project.schema_version,
        integrity: Integrity {
            algorithm: HASH_ALGORITHM.to_owned(),
            digest: digest(HASH_ALGORITHM, &canonical_payload(&payload))?,
        },
        project: payload,
    };
    let value = serde_json::to_value(&file).map_err(|e| PersistError::ParseError(e.to_string()))?;
    let mut bytes = serde_json::to_vec_pretty(&value).expect("Value serialization is infallible");
    bytes.push(b'\n');
    Ok(bytes)
}

pub fn from_bytes(bytes: &[u8]) -> Result<Project, PersistError> {
    let text = std::str::from_utf8(bytes).map_err(|e| PersistError::ParseError(e.to_string()))?;
    let file: ProjectFile =
        serde_json::from_str(text).map_err(|e| PersistError::ParseError(e.to_string()))?;
    if file.schema_version == 0 || file.schema_version > CURRENT_SCHEMA_VERSION {
        return Err(PersistError::UnsupportedSchemaVersion(file.schema_version));
    }
    let actual = digest(&file.integrity.algorithm, &canonical_payload(&file.project))?;
    if actual != file.integrity.digest {
        return Err(PersistError::IntegrityMismatch {
            recorded: file.integrity.digest,
            actual,
        });
    }
    let project: Project =
        serde_json::from_value(file.project).map_err(|e| PersistError::ParseError(e.to_string()))?;
    if project.schema_version != file.schema_version {
        return Err(PersistError::ParseError(format!(
            "header schema_version {} disagrees with project schema_version {}",
            file.schema_version, project.schema_version
        )));
    }
    let violations = validate_project(&project);
    if !violations.is_empty() {
        return Err(PersistError::InvalidProject(violations));
    }
    Ok(project)
}

/// Writes the project atomically (temp file in the same directory, then
/// rename) and returns the bytes written. A killed process leaves either the
/// old or the new file. The data is not fsynced, so a power loss right after
/// a save can still lose it.
pub fn save(project: &Project, destination: &Path) -> Result<Vec<u8>, PersistError> {
    let bytes = to_bytes(project)?;
    let dir = match destination.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(&bytes)?;
    tmp.persist(destination).map_err(|e| e.error)?;
    Ok(bytes)
}

pub fn load(source: &Path) -> Result<Project, PersistError> {
    let bytes = std::fs::read(source)?;
    from_bytes(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Goal, GoalSource};

    fn sample() -> Project {
        let mut p = Project::new("p-1", "erp");
        p.goals.push(Goal {
            id: "G1".into(),
            description: "secured web server".into(),
            source: GoalSource::Interview,
        });
        p
    }

    #[test]
    fn canonical_and_round_trip() {
        let p = sample();
        let a = to_bytes(&p).unwrap();
        let b = to_bytes(&p).unwrap();
        assert_eq!(a, b);
        assert!(!a.contains(&b'\r'));
        assert_eq!(from_bytes(&a).unwrap(), p);
        let text = String::from_utf8(a).unwrap();
        // Top-level keys appear sorted.
        let i = text.find("\"integrity\"").unwrap();
        let j = text.find("\"project\"").unwrap();
        let k = text.find("\"schema_version\"").unwrap();
        assert!(i < j && j < k);
    }

    #[test]
    fn tampered_payload() {
        let bytes = to_bytes(&sample()).unwrap();
        let text = String::from_utf8(bytes).unwrap().replace("secured web server", "secured web serves");
        assert!(matches!(
            from_bytes(text.as_bytes()),
            Err(PersistError::IntegrityMismatch { .. })
        ));
    }

    #[test]
    fn future_schema_rejected() {
        let bytes = to_bytes(&sample()).unwrap();
        let mut v: Value = serde_json::from_slice(&bytes).unwrap();
        v["schema_version"] = 999.into();
        let text = serde_json::to_string(&v).unwrap();
        assert!(matches!(
            from_bytes(text.as_bytes()),
            Err(PersistError::UnsupportedSchemaVersion(999))
        ));
    }

    #[test]
    fn invalid_project_not_saved() {
        let mut p = sample();
        p.agreements.push(crate::model::Agreement {
            goal_id: "G1".into(),
            stakeholder_id: "SH404".into(),
            verdict: crate::model::Verdict::Agreed,
            note: None,
        });
        assert!(matches!(to_bytes(&p), Err(PersistError::InvalidProject(_))));
    }

    #[test]
    fn garbage_is_a_parse_error() {
        assert!(matches!(from_bytes(b"{not json"), Err(PersistError::ParseError(_))));
    }

    #[test]
    fn atomic_save_and_load() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join(DEFAULT_FILE_NAME);
        let written = save(&sample(), &path).unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), written);
        assert_eq!(load(&path).unwrap(), sample());
        assert!(matches!(
            load(&dir.path().join("missing.store.json")),
            Err(PersistError::IoFailure(_))
        ));
    }
}
