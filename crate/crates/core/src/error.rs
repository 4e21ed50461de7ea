use thiserror::Error;

use crate::annotate::AnnotateError;
use crate::diff::DiffError;
use crate::index::IndexError;
use crate::ingest::IngestError;
use crate::metrics::MetricsError;
use crate::model::ModelError;
use crate::registry::RegistryError;
use crate::storage::StoreError;

/// Any failure surfaced by [`crate::Workbench`].
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Annotate(#[from] AnnotateError),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Index(#[from] IndexError),
    #[error(transparent)]
    Diff(#[from] DiffError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Registry(#[from] RegistryError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl Error {
    /// Stable name of the error variant, for machine-readable output.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Store(e) => match e {
                StoreError::VersionConflict { .. } => "VersionConflict",
                StoreError::NotFound { .. } => "NotFound",
                StoreError::SchemaViolation(_) => "SchemaViolation",
                StoreError::UnresolvableCommit(_) => "UnresolvableCommit",
                StoreError::Registry(r) => registry_code(r),
                StoreError::Corrupt { .. } => "CorruptDocument",
                StoreError::Io(_) => "Io",
            },
            Error::Annotate(e) => match e {
                AnnotateError::UnknownParameter { .. } => "UnknownParameter",
                AnnotateError::TypeMismatch { .. } => "TypeMismatch",
                AnnotateError::FragmentSpansMethods(_) => "FragmentSpansMethods",
                AnnotateError::FragmentOutsideMethod(_) => "FragmentOutsideMethod",
                AnnotateError::EmptySelection => "EmptySelection",
                AnnotateError::DuplicateElement(_) => "DuplicateElement",
                AnnotateError::WrongSide { .. } => "WrongSide",
                AnnotateError::NoAutofillRule { .. } => "NoAutofillRule",
                AnnotateError::SourceUnfilled { .. } => "SourceUnfilled",
                AnnotateError::NoAncestorFound(_) => "NoAncestorFound",
                AnnotateError::IncompleteAnnotation { .. } => "IncompleteAnnotation",
                AnnotateError::InvalidValues(_) => "InvalidValues",
                AnnotateError::UntypedAnnotation => "UntypedAnnotation",
                AnnotateError::TypeDefinitionMismatch { .. } => "TypeDefinitionMismatch",
            },
            Error::Ingest(e) => match e {
                IngestError::RepoNotFound(_) => "RepoNotFound",
                IngestError::UnknownCommit(_) => "UnknownCommit",
                IngestError::MergeCommitUnsupported(_) => "MergeCommitUnsupported",
                IngestError::MalformedFixture { .. } => "MalformedFixture",
                IngestError::Git { .. } => "GitFailed",
                IngestError::Io(_) => "Io",
            },
            Error::Index(IndexError::CodeFragmentNotEnumerable) => "CodeFragmentNotEnumerable",
            Error::Diff(DiffError::BinaryFile(_)) => "BinaryFile",
            Error::Metrics(MetricsError::InsufficientAnnotators) => "InsufficientAnnotators",
            Error::Registry(r) => registry_code(r),
            Error::Model(_) => "InvalidValue",
        }
    }
}

fn registry_code(e: &RegistryError) -> &'static str {
    match e {
        RegistryError::DuplicateName(_) => "DuplicateName",
        RegistryError::InvalidSchema(_) => "InvalidSchema",
        RegistryError::BuiltinOverwrite(_) => "BuiltinOverwrite",
        RegistryError::UnknownType(_) => "UnknownType",
    }
}
