//! The operations behind both the HTTP service and the CLI: commit
//! resolution and caching, annotation mutations with version checks, hint
//! and dataset import, export and agreement.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use serde::Serialize;

use crate::annotate::{
    assign_type, new_annotation, resolve_selection, validate_parameters, AnnotateError,
    AnnotationSession, AutofillReport, Completeness, Selection, Violation,
};
use crate::clock::{Clock, SystemClock};
use crate::diff::{compute_diff, FileDiff};
use crate::error::Error;
use crate::index::ElementIndex;
use crate::ingest::{fixture_commit, load_commit, load_fixture, CommitSnapshot};
use crate::metrics::{agreement_rate, AgreementReport};
use crate::model::{Annotation, CodeElement, CommitRef, ElementType, Parameters, RevisionSide, Status, TextRange};
use crate::registry::TypeRegistry;
use crate::schema::RefactoringTypeDefinition;
use crate::storage::{DatasetFile, HintFile, Store, StoreError};

/// Where commits not yet in the store may be loaded from.
#[derive(Debug, Clone, Default)]
pub struct CommitSource {
    /// A git clone; commits found there are relabelled with the requested repository label.
    pub repo: Option<PathBuf>,
    /// Directories whose subdirectories are `before/`/`after/` fixtures.
    pub fixtures: Vec<PathBuf>,
}

/// A commit with both sides indexed, shared read-only between requests.
#[derive(Debug)]
pub struct PreparedCommit {
    pub snapshot: Arc<CommitSnapshot>,
    pub before: Arc<ElementIndex>,
    pub after: Arc<ElementIndex>,
}

impl PreparedCommit {
    fn new(snapshot: CommitSnapshot) -> Self {
        let before = ElementIndex::build(&snapshot, RevisionSide::Before);
        let after = ElementIndex::build(&snapshot, RevisionSide::After);
        PreparedCommit { snapshot: Arc::new(snapshot), before: Arc::new(before), after: Arc::new(after) }
    }

    pub fn index(&self, side: RevisionSide) -> &ElementIndex {
        match side {
            RevisionSide::Before => &self.before,
            RevisionSide::After => &self.after,
        }
    }
}

/// Diffs of every changed file of a commit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CommitDiff {
    pub commit: CommitRef,
    pub files: Vec<FileDiff>,
    /// Changed binary files, listed without hunks.
    pub binary: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HintWarning {
    pub hint: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImportReport {
    pub created: Vec<Annotation>,
    pub warnings: Vec<HintWarning>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AnnotationViolation {
    pub annotation: String,
    #[serde(flatten)]
    pub violation: Violation,
}

pub struct Workbench {
    store: Store,
    clock: Arc<dyn Clock>,
    source: CommitSource,
    cache: Mutex<HashMap<String, Arc<PreparedCommit>>>,
}

impl std::fmt::Debug for Workbench {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Workbench").field("root", &self.store.root()).field("source", &self.source).finish()
    }
}

impl Workbench {
    pub fn new(store: Store) -> Self {
        Self::with_clock(store, Arc::new(SystemClock))
    }

    pub fn with_clock(store: Store, clock: Arc<dyn Clock>) -> Self {
        Workbench { store, clock, source: CommitSource::default(), cache: Mutex::new(HashMap::new()) }
    }

    pub fn set_source(&mut self, source: CommitSource) {
        self.source = source;
    }

    pub fn store(&self) -> &Store {
        &self.store
    }

    // Commits ------------------------------------------------------------

    fn cache_insert(&self, snapshot: CommitSnapshot) -> Arc<PreparedCommit> {
        let id = snapshot.commit.id();
        let prepared = Arc::new(PreparedCommit::new(snapshot));
        self.cache.lock().unwrap_or_else(|e| e.into_inner()).insert(id, prepared.clone());
        prepared
    }

    fn ingest(&self, snapshot: CommitSnapshot) -> Result<CommitRef, Error> {
        self.store.put_commit(&snapshot)?;
        let commit = snapshot.commit.clone();
        self.cache_insert(snapshot);
        Ok(commit)
    }

    pub fn ingest_fixture(&self, dir: &Path) -> Result<CommitRef, Error> {
        self.ingest(load_fixture(dir)?)
    }

    /// Loads a commit from a git clone; `label` overrides the repository label.
    pub fn ingest_commit(&self, repo: &Path, sha: &str, label: Option<&str>) -> Result<CommitRef, Error> {
        let mut snapshot = load_commit(repo, sha)?;
        if let Some(label) = label {
            snapshot.commit.repository = label.to_string();
        }
        self.ingest(snapshot)
    }

    pub fn commits(&self) -> Result<Vec<CommitRef>, Error> {
        Ok(self.store.list_commit_refs()?)
    }

    /// The indexed commit with the given `repository:sha` id.
    pub fn prepared(&self, id: &str) -> Result<Arc<PreparedCommit>, Error> {
        if let Some(p) = self.cache.lock().unwrap_or_else(|e| e.into_inner()).get(id) {
            return Ok(p.clone());
        }
        let snapshot = self.store.get_commit(id)?;
        Ok(self.cache_insert(snapshot))
    }

    pub fn snapshot(&self, id: &str) -> Result<Arc<CommitSnapshot>, Error> {
        Ok(self.prepared(id)?.snapshot.clone())
    }

    /// Finds a commit in the store, then the configured repository, then the fixtures.
    pub fn resolve_commit(&self, commit: &CommitRef) -> Result<Arc<PreparedCommit>, Error> {
        let id = commit.id();
        if self.store.has_commit(&id) {
            return self.prepared(&id);
        }
        if let Some(repo) = &self.source.repo {
            if let Ok(c) = self.ingest_commit(repo, &commit.sha, Some(&commit.repository)) {
                return self.prepared(&c.id());
            }
        }
        for dir in &self.source.fixtures {
            for entry in std::fs::read_dir(dir).map_err(StoreError::from)? {
                let path = entry.map_err(StoreError::from)?.path();
                if !path.join("before").is_dir() {
                    continue;
                }
                if fixture_commit(&path).is_ok_and(|(c, _)| c == *commit) {
                    let c = self.ingest_fixture(&path)?;
                    return self.prepared(&c.id());
                }
            }
        }
        Err(StoreError::UnresolvableCommit(id).into())
    }

    pub fn diff(&self, id: &str, context: usize) -> Result<CommitDiff, Error> {
        let snapshot = self.snapshot(id)?;
        let mut files = Vec::new();
        let mut binary = Vec::new();
        for change in &snapshot.files {
            if change.binary {
                binary.push(change.display_path().to_string());
            } else {
                files.push(compute_diff(change, context)?);
            }
        }
        Ok(CommitDiff { commit: snapshot.commit.clone(), files, binary })
    }

    /// Selectable elements of a type on one side, optionally within one file.
    /// For `CodeFragment` these are the method declarations that have bodies.
    pub fn candidates(
        &self,
        id: &str,
        side: RevisionSide,
        t: ElementType,
        file: Option<&str>,
    ) -> Result<Vec<CodeElement>, Error> {
        let prepared = self.prepared(id)?;
        let index = prepared.index(side);
        let mut out = crate::annotate::candidates_for(index, t);
        if let Some(file) = file {
            out.retain(|e| e.range.path() == file);
        }
        Ok(out)
    }

    // Types --------------------------------------------------------------

    pub fn registry(&self) -> Result<TypeRegistry, Error> {
        Ok(self.store.registry()?)
    }

    pub fn register_type(&self, def: RefactoringTypeDefinition) -> Result<RefactoringTypeDefinition, Error> {
        Ok(self.store.put_type(def)?)
    }

    fn type_def(&self, name: &str) -> Result<RefactoringTypeDefinition, Error> {
        Ok(self.registry()?.lookup_type(name)?.clone())
    }

    // Annotations --------------------------------------------------------

    pub fn create_annotation(
        &self,
        commit: &CommitRef,
        type_name: Option<&str>,
        annotator: &str,
        description: Option<&str>,
    ) -> Result<Annotation, Error> {
        self.resolve_commit(commit)?;
        let def = type_name.map(|t| self.type_def(t)).transpose()?;
        let mut annotation = new_annotation(commit.clone(), def.as_ref(), annotator);
        annotation.description = description.map(str::to_string);
        self.store.put_annotation(&annotation)?;
        Ok(annotation)
    }

    pub fn annotation(&self, id: &str) -> Result<Annotation, Error> {
        Ok(self.store.get_annotation(id)?)
    }

    pub fn annotations(&self) -> Result<Vec<Annotation>, Error> {
        Ok(self.store.list_annotations()?)
    }

    fn session_for(&self, annotation: Annotation) -> Result<AnnotationSession, Error> {
        let type_name = annotation.type_name.clone().ok_or(AnnotateError::UntypedAnnotation)?;
        let def = self.type_def(&type_name)?;
        let prepared = self.resolve_commit(&annotation.commit)?;
        Ok(AnnotationSession::new(
            annotation,
            prepared.snapshot.clone(),
            prepared.before.clone(),
            prepared.after.clone(),
            def,
            self.clock.clone(),
        )?)
    }

    /// A read-only session over the stored annotation.
    pub fn session(&self, id: &str) -> Result<AnnotationSession, Error> {
        self.session_for(self.annotation(id)?)
    }

    fn load_checked(&self, id: &str, expected_version: Option<u64>) -> Result<Annotation, Error> {
        let annotation = self.annotation(id)?;
        match expected_version {
            Some(v) if v != annotation.version => Err(StoreError::VersionConflict {
                id: id.to_string(),
                stored: annotation.version,
                attempted: v,
            }
            .into()),
            _ => Ok(annotation),
        }
    }

    fn mutate<T>(
        &self,
        id: &str,
        expected_version: Option<u64>,
        op: impl FnOnce(&mut AnnotationSession) -> Result<T, AnnotateError>,
    ) -> Result<(T, Annotation), Error> {
        let mut session = self.session_for(self.load_checked(id, expected_version)?)?;
        let out = op(&mut session)?;
        let annotation = session.into_annotation();
        self.store.put_annotation(&annotation)?;
        Ok((out, annotation))
    }

    pub fn set_parameter(
        &self,
        id: &str,
        expected_version: Option<u64>,
        side: RevisionSide,
        name: &str,
        selection: &Selection,
    ) -> Result<Annotation, Error> {
        Ok(self.mutate(id, expected_version, |s| s.set_parameter(side, name, selection).map(|_| ()))?.1)
    }

    pub fn clear_parameter(
        &self,
        id: &str,
        expected_version: Option<u64>,
        side: RevisionSide,
        name: &str,
        range: Option<&TextRange>,
    ) -> Result<Annotation, Error> {
        Ok(self.mutate(id, expected_version, |s| s.clear_parameter(side, name, range).map(|_| ()))?.1)
    }

    pub fn autofill(
        &self,
        id: &str,
        expected_version: Option<u64>,
        side: RevisionSide,
        name: &str,
    ) -> Result<(AutofillReport, Annotation), Error> {
        self.mutate(id, expected_version, |s| s.autofill(side, name))
    }

    pub fn set_status(&self, id: &str, expected_version: Option<u64>, status: Status) -> Result<Annotation, Error> {
        Ok(self.mutate(id, expected_version, |s| s.set_status(status).map(|_| ()))?.1)
    }

    /// Gives an annotation a type (or a new one), clearing its parameters.
    pub fn assign_type(&self, id: &str, expected_version: Option<u64>, type_name: &str) -> Result<Annotation, Error> {
        let mut annotation = self.load_checked(id, expected_version)?;
        let def = self.type_def(type_name)?;
        assign_type(&mut annotation, &def, self.clock.as_ref());
        self.store.put_annotation(&annotation)?;
        Ok(annotation)
    }

    pub fn completeness(&self, id: &str) -> Result<Completeness, Error> {
        Ok(self.session(id)?.completeness())
    }

    /// Re-checks every stored annotation against its schema and its commit's index.
    pub fn validate_all(&self) -> Result<Vec<AnnotationViolation>, Error> {
        let registry = self.registry()?;
        let mut out = Vec::new();
        for a in self.annotations()? {
            let mut push = |message: String| {
                out.push(AnnotationViolation { annotation: a.id.clone(), violation: Violation { parameter: None, message } })
            };
            let Some(type_name) = &a.type_name else {
                if a.parameters.iter().next().is_some() {
                    push("untyped annotation holds parameters".into());
                }
                continue;
            };
            let def = match registry.lookup_type(type_name) {
                Ok(d) => d,
                Err(e) => {
                    push(e.to_string());
                    continue;
                }
            };
            let prepared = match self.resolve_commit(&a.commit) {
                Ok(p) => p,
                Err(e) => {
                    push(e.to_string());
                    continue;
                }
            };
            for v in validate_parameters(&a, def, &prepared.before, &prepared.after) {
                out.push(AnnotationViolation { annotation: a.id.clone(), violation: v });
            }
        }
        Ok(out)
    }

    // Import and export --------------------------------------------------

    /// Creates one Draft annotation per hint. Prefilled ranges that fail
    /// validation are dropped and reported as warnings.
    pub fn import_hints(&self, text: &str, annotator: &str) -> Result<ImportReport, Error> {
        self.import_hint_file(&HintFile::parse(text)?, annotator)
    }

    pub fn import_hint_file(&self, file: &HintFile, annotator: &str) -> Result<ImportReport, Error> {
        file.check()?;
        let registry = self.registry()?;
        // Resolve everything before writing anything.
        let mut resolved = Vec::new();
        for hint in &file.hints {
            let prepared = self.resolve_commit(&hint.commit)?;
            let def = hint.type_name.as_deref().map(|t| registry.lookup_type(t).cloned()).transpose()?;
            resolved.push((prepared, def));
        }

        let mut created = Vec::new();
        let mut warnings = Vec::new();
        for (i, (hint, (prepared, def))) in file.hints.iter().zip(resolved).enumerate() {
            let mut annotation = new_annotation(hint.commit.clone(), def.as_ref(), annotator);
            annotation.description = hint.description.clone();
            if let (Some(prefill), Some(def)) = (&hint.prefill, &def) {
                let mut warn = |message: String| warnings.push(HintWarning { hint: i, message });
                for (side, name, ranges) in prefill.iter() {
                    let Some(schema) = def.parameter(side, name) else {
                        warn(format!("{side}/{name}: not a parameter of {}", def.name));
                        continue;
                    };
                    let index = prepared.index(side);
                    let mut bound: Vec<TextRange> = Vec::new();
                    for r in ranges {
                        let checked = if prepared.snapshot.file(side, r.path()).is_none() {
                            Err(AnnotateError::WrongSide { path: r.path().to_string(), side })
                        } else {
                            resolve_selection(index, schema.element_type, &Selection::Range(r.clone()))
                        };
                        match checked {
                            Ok(v) if v != *r => warn(format!("{side}/{name}: {r} dropped, not an exact element range")),
                            Ok(v) if bound.contains(&v) => warn(format!("{side}/{name}: duplicate {r} dropped")),
                            Ok(_) if !schema.multiple && !bound.is_empty() => {
                                warn(format!("{side}/{name}: single-valued, extra {r} dropped"))
                            }
                            Ok(v) => bound.push(v),
                            Err(e) => warn(format!("{side}/{name}: {r} dropped: {e}")),
                        }
                    }
                    annotation.parameters.side_mut(side).insert(name.to_string(), bound);
                }
            }
            created.push(annotation);
        }
        for a in &created {
            self.store.put_annotation(a)?;
        }
        Ok(ImportReport { created, warnings })
    }

    /// Loads a dataset file as new annotations. Every record is checked
    /// against its schema and index before anything is written.
    pub fn import_dataset(&self, text: &str) -> Result<Vec<Annotation>, Error> {
        let file = DatasetFile::parse(text)?;
        let registry = self.registry()?;
        let mut out = Vec::new();
        for (i, record) in file.annotations.into_iter().enumerate() {
            let prepared = self.resolve_commit(&record.commit)?;
            let annotation = Annotation {
                id: Annotation::new_id(),
                commit: record.commit,
                type_name: record.type_name,
                status: record.status,
                annotator: record.annotator,
                description: None,
                parameters: record.parameters,
                events: Vec::new(),
                version: 1,
            };
            let violations = match &annotation.type_name {
                Some(t) => {
                    let def = registry.lookup_type(t)?;
                    let mut v = validate_parameters(&annotation, def, &prepared.before, &prepared.after);
                    if annotation.status == Status::Verified {
                        let missing = def
                            .parameters()
                            .filter(|p| p.required && annotation.parameters.ranges(p.side, &p.name).is_empty());
                        v.extend(missing.map(|p| Violation {
                            parameter: None,
                            message: format!("{}/{}: required but empty", p.side, p.name),
                        }));
                    }
                    v
                }
                None if annotation.parameters != Parameters::default() => {
                    vec![Violation { parameter: None, message: "untyped record holds parameters".into() }]
                }
                None => Vec::new(),
            };
            if let Some(v) = violations.first() {
                return Err(StoreError::SchemaViolation(format!("record {i}: {}", v.message)).into());
            }
            out.push(annotation);
        }
        for a in &out {
            self.store.put_annotation(a)?;
        }
        Ok(out)
    }

    pub fn export_dataset(&self, status: Option<Status>) -> Result<DatasetFile, Error> {
        let all = self.annotations()?;
        Ok(DatasetFile::from_annotations(&all, status))
    }

    pub fn agreement(&self) -> Result<AgreementReport, Error> {
        Ok(agreement_rate(&self.annotations()?)?)
    }
}
