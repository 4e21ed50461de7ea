//! A directory of JSON documents: `commits/`, `types/` and `annotations/`.
//!
//! Every write goes to a temporary file in the target directory and is then
//! renamed over the destination, so readers only ever see complete
//! documents. Annotation writes use optimistic versioning: a write must carry
//! exactly the stored version plus one.

pub mod canonical;
pub mod dataset;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;

use crate::annotate::schema_violations;
use crate::ingest::CommitSnapshot;
use crate::model::{Annotation, CommitRef};
use crate::registry::{RegistryError, TypeRegistry};
use crate::schema::RefactoringTypeDefinition;

pub use canonical::to_canonical_string;
pub use dataset::{DatasetFile, DatasetRecord, HintFile, HintRecord};

/// Environment variable naming the store root.
pub const DATA_DIR_ENV: &str = "REFANN_DATA_DIR";
pub const DEFAULT_DATA_DIR: &str = "./data";

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("version conflict on {id}: stored version is {stored}, write carried {attempted}")]
    VersionConflict { id: String, stored: u64, attempted: u64 },
    #[error("{kind} {id:?} not found")]
    NotFound { kind: &'static str, id: String },
    #[error("schema violation: {0}")]
    SchemaViolation(String),
    #[error("cannot resolve commit {0}")]
    UnresolvableCommit(String),
    #[error(transparent)]
    Registry(#[from] RegistryError),
    #[error("corrupt document {path}: {source}")]
    Corrupt { path: PathBuf, source: serde_json::Error },
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug)]
pub struct Store {
    root: PathBuf,
    write_lock: Mutex<()>,
}

fn file_name(id: &str) -> String {
    format!("{}.json", urlencoding::encode(id))
}

impl Store {
    pub fn open(root: impl Into<PathBuf>) -> Result<Store, StoreError> {
        let root = root.into();
        for sub in ["commits", "types", "annotations"] {
            fs::create_dir_all(root.join(sub))?;
        }
        Ok(Store { root, write_lock: Mutex::new(()) })
    }

    /// Opens the store named by `REFANN_DATA_DIR`, or `./data`.
    pub fn open_default() -> Result<Store, StoreError> {
        let root = std::env::var(DATA_DIR_ENV).ok().filter(|s| !s.is_empty());
        Store::open(root.unwrap_or_else(|| DEFAULT_DATA_DIR.to_string()))
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn lock(&self) -> std::sync::MutexGuard<'_, ()> {
        self.write_lock.lock().unwrap_or_else(|e| e.into_inner())
    }

    fn write_atomic(&self, dir: &str, id: &str, text: &str) -> Result<(), StoreError> {
        let dir = self.root.join(dir);
        let mut tmp = tempfile::NamedTempFile::new_in(&dir)?;
        tmp.write_all(text.as_bytes())?;
        tmp.as_file().sync_all()?;
        tmp.persist(dir.join(file_name(id))).map_err(|e| e.error)?;
        Ok(())
    }

    fn read<T: DeserializeOwned>(&self, dir: &str, kind: &'static str, id: &str) -> Result<T, StoreError> {
        let path = self.root.join(dir).join(file_name(id));
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == io::ErrorKind::NotFound => {
                return Err(StoreError::NotFound { kind, id: id.to_string() })
            }
            Err(e) => return Err(e.into()),
        };
        serde_json::from_str(&text).map_err(|source| StoreError::Corrupt { path, source })
    }

    fn read_all<T: DeserializeOwned>(&self, dir: &str) -> Result<Vec<T>, StoreError> {
        let mut paths: Vec<PathBuf> = fs::read_dir(self.root.join(dir))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        paths.sort();
        paths
            .into_iter()
            .map(|path| {
                let text = fs::read_to_string(&path)?;
                serde_json::from_str(&text).map_err(|source| StoreError::Corrupt { path, source })
            })
            .collect()
    }

    fn write_json<T: Serialize>(&self, dir: &str, id: &str, value: &T) -> Result<(), StoreError> {
        let text = to_canonical_string(value).map_err(|e| StoreError::SchemaViolation(e.to_string()))?;
        self.write_atomic(dir, id, &text)
    }

    pub fn put_commit(&self, snapshot: &CommitSnapshot) -> Result<(), StoreError> {
        let _guard = self.lock();
        self.write_json("commits", &snapshot.commit.id(), snapshot)
    }

    pub fn get_commit(&self, id: &str) -> Result<CommitSnapshot, StoreError> {
        self.read("commits", "commit", id)
    }

    pub fn has_commit(&self, id: &str) -> bool {
        self.root.join("commits").join(file_name(id)).is_file()
    }

    /// Stored commits sorted by sha, then repository.
    pub fn list_commits(&self) -> Result<Vec<CommitSnapshot>, StoreError> {
        let mut commits: Vec<CommitSnapshot> = self.read_all("commits")?;
        commits.sort_by(|a, b| (&a.commit.sha, &a.commit.repository).cmp(&(&b.commit.sha, &b.commit.repository)));
        Ok(commits)
    }

    pub fn list_commit_refs(&self) -> Result<Vec<CommitRef>, StoreError> {
        Ok(self.list_commits()?.into_iter().map(|c| c.commit).collect())
    }

    /// Predefined types plus every stored user-defined type.
    pub fn registry(&self) -> Result<TypeRegistry, StoreError> {
        let mut registry = TypeRegistry::with_predefined();
        let dir = self.root.join("types");
        let mut paths: Vec<PathBuf> = fs::read_dir(&dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        paths.sort();
        for path in paths {
            let def = RefactoringTypeDefinition::from_json(&fs::read_to_string(&path)?)?;
            registry.register_type(def)?;
        }
        Ok(registry)
    }

    /// Registers and persists a user-defined type.
    pub fn put_type(&self, def: RefactoringTypeDefinition) -> Result<RefactoringTypeDefinition, StoreError> {
        let _guard = self.lock();
        let mut registry = self.registry()?;
        let stored = registry.register_type(def)?.clone();
        // Parameter order is part of the definition, so types keep their written key order.
        let mut text = stored.to_json();
        text.push('\n');
        self.write_atomic("types", &stored.name, &text)?;
        Ok(stored)
    }

    pub fn get_annotation(&self, id: &str) -> Result<Annotation, StoreError> {
        self.read("annotations", "annotation", id)
    }

    /// Annotations sorted by id.
    pub fn list_annotations(&self) -> Result<Vec<Annotation>, StoreError> {
        let mut all: Vec<Annotation> = self.read_all("annotations")?;
        all.sort_by(|a, b| a.id.cmp(&b.id));
        Ok(all)
    }

    fn check_schema(&self, annotation: &Annotation) -> Result<(), StoreError> {
        let Some(type_name) = &annotation.type_name else {
            if annotation.parameters.iter().next().is_some() {
                return Err(StoreError::SchemaViolation("untyped annotation holds parameters".into()));
            }
            return Ok(());
        };
        let registry = self.registry()?;
        let def = registry.lookup_type(type_name)?;
        let violations = schema_violations(annotation, def);
        if violations.is_empty() {
            Ok(())
        } else {
            let msgs: Vec<String> = violations.into_iter().map(|v| v.message).collect();
            Err(StoreError::SchemaViolation(msgs.join("; ")))
        }
    }

    /// Writes an annotation whose version is exactly one past the stored one
    /// (a new annotation is written at version 1).
    pub fn put_annotation(&self, annotation: &Annotation) -> Result<(), StoreError> {
        let _guard = self.lock();
        let stored = match self.get_annotation(&annotation.id) {
            Ok(a) => a.version,
            Err(StoreError::NotFound { .. }) => 0,
            Err(e) => return Err(e),
        };
        if annotation.version != stored + 1 {
            return Err(StoreError::VersionConflict {
                id: annotation.id.clone(),
                stored,
                attempted: annotation.version,
            });
        }
        self.check_schema(annotation)?;
        self.write_json("annotations", &annotation.id, annotation)
    }
}
