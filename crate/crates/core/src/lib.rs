//! Typed refactoring annotation over commit diffs.
//!
//! A refactoring instance is a set of named parameters, each bound to exact
//! syntactic elements (as text ranges) of the before or after revision of a
//! commit. This crate indexes Java sources, validates and autofills
//! parameters, computes agreement metrics and stores curated datasets.

pub mod annotate;
pub mod clock;
pub mod diff;
pub mod error;
pub mod index;
pub mod ingest;
pub mod metrics;
pub mod model;
pub mod registry;
pub mod schema;
pub mod storage;
pub mod text;
pub mod workbench;

pub use annotate::{AnnotateError, AnnotationSession, AutofillReport, Completeness, Selection, Violation};
pub use clock::{Clock, ManualClock, SystemClock};
pub use diff::{compute_diff, diff_texts, DiffError, FileDiff, Hunk, LineTag};
pub use error::Error;
pub use index::{ElementIndex, IndexError};
pub use ingest::{load_commit, load_fixture, ChangeKind, CommitSnapshot, FileChange, IngestError};
pub use metrics::{agreement_rate, annotation_time, AgreementReport, MetricsError};
pub use model::{
    Annotation, AnnotationEvent, CodeElement, CommitRef, ElementType, EventKind, ModelError, ParamKey, Parameters,
    Point, Position, RevisionSide, Status, TextRange,
};
pub use registry::{predefined_types, RegistryError, TypeRegistry};
pub use schema::{AutofillKind, AutofillRule, ParameterSchema, RefactoringTypeDefinition};
pub use storage::{DatasetFile, HintFile, Store, StoreError};
pub use workbench::{CommitDiff, CommitSource, ImportReport, Workbench};
