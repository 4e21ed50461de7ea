//! The annotation state machine: binding selections to typed parameters,
//! deriving parameters by autofill, and gating status changes.
//!
//! Every mutating operation bumps [`Annotation::version`] by one and appends
//! exactly one event whose timestamp never precedes the previous event's.

use std::collections::BTreeSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clock::Clock;
use crate::index::ElementIndex;
use crate::ingest::CommitSnapshot;
use crate::model::{
    Annotation, AnnotationEvent, CodeElement, CommitRef, ElementType, EventKind, EventPayload, ParamKey, Parameters,
    Point, RevisionSide, Status, TextRange,
};
use crate::schema::{AutofillKind, ParameterSchema, RefactoringTypeDefinition};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnnotateError {
    #[error("unknown parameter {name:?} on the {side} side")]
    UnknownParameter { side: RevisionSide, name: String },
    #[error("selection does not match a {expected}: {detail}")]
    TypeMismatch { expected: ElementType, detail: String },
    #[error("code fragment {0} is not contained in a single method body")]
    FragmentSpansMethods(TextRange),
    #[error("code fragment {0} lies outside every method body")]
    FragmentOutsideMethod(TextRange),
    #[error("selection is empty after trimming whitespace")]
    EmptySelection,
    #[error("{0} is already bound to this parameter")]
    DuplicateElement(TextRange),
    #[error("{path} is not a changed file on the {side} side")]
    WrongSide { path: String, side: RevisionSide },
    #[error("parameter {name:?} on the {side} side has no autofill rule")]
    NoAutofillRule { side: RevisionSide, name: String },
    #[error("autofill source {name:?} on the {side} side is not filled with indexed elements")]
    SourceUnfilled { side: RevisionSide, name: String },
    #[error("no enclosing {0} found for the source value")]
    NoAncestorFound(ElementType),
    #[error("annotation is incomplete; missing {}", fmt_keys(.missing))]
    IncompleteAnnotation { missing: Vec<ParamKey> },
    #[error("annotation has invalid values: {}", .0.iter().map(|v| v.message.as_str()).collect::<Vec<_>>().join("; "))]
    InvalidValues(Vec<Violation>),
    #[error("annotation has no refactoring type yet")]
    UntypedAnnotation,
    #[error("annotation type {annotation:?} does not match definition {definition:?}")]
    TypeDefinitionMismatch { annotation: String, definition: String },
}

fn fmt_keys(keys: &[ParamKey]) -> String {
    keys.iter().map(|k| format!("{}/{}", k.side, k.name)).collect::<Vec<_>>().join(", ")
}

/// A user selection: a clicked point or a dragged range.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum Selection {
    Range(TextRange),
    Point(Point),
}

impl Selection {
    pub fn path(&self) -> &str {
        match self {
            Selection::Range(r) => r.path(),
            Selection::Point(p) => &p.path,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parameter: Option<ParamKey>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Completeness {
    pub missing: Vec<ParamKey>,
    pub verifiable: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AutofillReport {
    pub parameter: ParamKey,
    pub derived: Vec<CodeElement>,
}

/// Empty parameter slots for every parameter of `def`.
pub fn empty_parameters(def: &RefactoringTypeDefinition) -> Parameters {
    let mut params = Parameters::default();
    for p in def.parameters() {
        params.side_mut(p.side).insert(p.name.clone(), Vec::new());
    }
    params
}

/// A fresh Draft annotation at version 1.
pub fn new_annotation(commit: CommitRef, def: Option<&RefactoringTypeDefinition>, annotator: &str) -> Annotation {
    Annotation {
        id: Annotation::new_id(),
        commit,
        type_name: def.map(|d| d.name.clone()),
        status: Status::Draft,
        annotator: annotator.to_string(),
        description: None,
        parameters: def.map(empty_parameters).unwrap_or_default(),
        events: Vec::new(),
        version: 1,
    }
}

fn push_event(
    annotation: &mut Annotation,
    clock: &dyn Clock,
    kind: EventKind,
    parameter: Option<ParamKey>,
    payload: EventPayload,
) {
    let last = annotation.events.last().map(|e| e.timestamp).unwrap_or(i64::MIN);
    let timestamp = clock.now_ms().max(last);
    annotation.events.push(AnnotationEvent { timestamp, kind, parameter, payload });
    annotation.version += 1;
}

/// Sets (or changes) the refactoring type of an annotation, resetting its parameters.
pub fn assign_type(annotation: &mut Annotation, def: &RefactoringTypeDefinition, clock: &dyn Clock) {
    annotation.type_name = Some(def.name.clone());
    annotation.parameters = empty_parameters(def);
    push_event(annotation, clock, EventKind::TypeChange, None, EventPayload::Type(def.name.clone()));
}

const SNAP_CHARS: &[char] = &[' ', '\t', '\n', '\r'];

/// Trims spaces, tabs and newlines from both ends of a range.
pub fn snap_whitespace(index: &ElementIndex, range: &TextRange) -> Result<TextRange, AnnotateError> {
    let mismatch = |detail: String| AnnotateError::TypeMismatch { expected: ElementType::CodeFragment, detail };
    let file = index
        .file(range.path())
        .ok_or_else(|| mismatch(format!("{} is not indexed", range.path())))?;
    let text = file.text();
    let start = file.lines().offset(text, range.start()).ok_or_else(|| mismatch(format!("{range} is outside the file")))?;
    let end = file.lines().offset(text, range.end()).ok_or_else(|| mismatch(format!("{range} is outside the file")))?;
    let slice = &text[start..end];
    let trimmed_start = slice.trim_start_matches(SNAP_CHARS);
    let trimmed = trimmed_start.trim_end_matches(SNAP_CHARS);
    if trimmed.is_empty() {
        return Err(AnnotateError::EmptySelection);
    }
    let new_start = start + (slice.len() - trimmed_start.len());
    let new_end = new_start + trimmed.len();
    TextRange::new(
        range.path(),
        file.lines().position(text, new_start),
        file.lines().position(text, new_end),
    )
    .map_err(|e| mismatch(e.to_string()))
}

/// Checks that an already-snapped fragment sits inside exactly one method
/// body without cutting through any method declaration.
pub fn check_fragment(index: &ElementIndex, range: &TextRange) -> Result<(), AnnotateError> {
    let methods = index
        .elements_of_type(ElementType::MethodDeclaration, Some(range.path()))
        .expect("MethodDeclaration is enumerable");
    let cut = methods
        .iter()
        .any(|m| m.range.overlaps(range) && !m.range.contains(range) && !range.contains(&m.range));
    if cut {
        return Err(AnnotateError::FragmentSpansMethods(range.clone()));
    }
    if index.bodies_enclosing(range).is_empty() {
        return Err(AnnotateError::FragmentOutsideMethod(range.clone()));
    }
    Ok(())
}

/// Resolves a selection for a parameter of type `t` on `index`'s side to the range to store.
pub fn resolve_selection(index: &ElementIndex, t: ElementType, selection: &Selection) -> Result<TextRange, AnnotateError> {
    match (t, selection) {
        (ElementType::CodeFragment, Selection::Point(_)) => Err(AnnotateError::TypeMismatch {
            expected: t,
            detail: "a code fragment needs a range selection".into(),
        }),
        (ElementType::CodeFragment, Selection::Range(r)) => {
            let snapped = snap_whitespace(index, r)?;
            check_fragment(index, &snapped)?;
            Ok(snapped)
        }
        (_, Selection::Point(p)) => index
            .element_at(t, &p.path, p.position())
            .map(|e| e.range.clone())
            .ok_or_else(|| AnnotateError::TypeMismatch {
                expected: t,
                detail: format!("no {t} at {}:{}:{}", p.path, p.line, p.column),
            }),
        (_, Selection::Range(r)) => index
            .element_with_range(t, r)
            .map(|e| e.range.clone())
            .ok_or_else(|| AnnotateError::TypeMismatch { expected: t, detail: format!("{r} is not a {t}") }),
    }
}

/// One annotation opened on its commit, with both revision sides indexed.
pub struct AnnotationSession {
    annotation: Annotation,
    snapshot: Arc<CommitSnapshot>,
    index_before: Arc<ElementIndex>,
    index_after: Arc<ElementIndex>,
    type_def: RefactoringTypeDefinition,
    clock: Arc<dyn Clock>,
}

impl std::fmt::Debug for AnnotationSession {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AnnotationSession")
            .field("annotation", &self.annotation.id)
            .field("commit", &self.snapshot.commit)
            .field("type", &self.type_def.name)
            .finish()
    }
}

impl AnnotationSession {
    pub fn new(
        annotation: Annotation,
        snapshot: Arc<CommitSnapshot>,
        index_before: Arc<ElementIndex>,
        index_after: Arc<ElementIndex>,
        type_def: RefactoringTypeDefinition,
        clock: Arc<dyn Clock>,
    ) -> Result<Self, AnnotateError> {
        match annotation.type_name.as_deref() {
            None => return Err(AnnotateError::UntypedAnnotation),
            Some(name) if name != type_def.name => {
                return Err(AnnotateError::TypeDefinitionMismatch {
                    annotation: name.to_string(),
                    definition: type_def.name.clone(),
                })
            }
            Some(_) => {}
        }
        let mut annotation = annotation;
        for p in type_def.parameters() {
            annotation.parameters.side_mut(p.side).entry(p.name.clone()).or_default();
        }
        Ok(AnnotationSession { annotation, snapshot, index_before, index_after, type_def, clock })
    }

    /// Builds both indexes from the snapshot.
    pub fn open(
        annotation: Annotation,
        snapshot: Arc<CommitSnapshot>,
        type_def: RefactoringTypeDefinition,
        clock: Arc<dyn Clock>,
    ) -> Result<Self, AnnotateError> {
        let before = Arc::new(ElementIndex::build(&snapshot, RevisionSide::Before));
        let after = Arc::new(ElementIndex::build(&snapshot, RevisionSide::After));
        Self::new(annotation, snapshot, before, after, type_def, clock)
    }

    pub fn annotation(&self) -> &Annotation {
        &self.annotation
    }

    pub fn into_annotation(self) -> Annotation {
        self.annotation
    }

    pub fn type_def(&self) -> &RefactoringTypeDefinition {
        &self.type_def
    }

    pub fn snapshot(&self) -> &CommitSnapshot {
        &self.snapshot
    }

    pub fn index(&self, side: RevisionSide) -> &ElementIndex {
        match side {
            RevisionSide::Before => &self.index_before,
            RevisionSide::After => &self.index_after,
        }
    }

    fn schema(&self, side: RevisionSide, name: &str) -> Result<&ParameterSchema, AnnotateError> {
        self.type_def
            .parameter(side, name)
            .ok_or_else(|| AnnotateError::UnknownParameter { side, name: name.to_string() })
    }

    fn log(&mut self, kind: EventKind, parameter: Option<ParamKey>, payload: EventPayload) {
        push_event(&mut self.annotation, self.clock.as_ref(), kind, parameter, payload);
    }

    /// Elements a user may pick for a parameter. For a code fragment these
    /// are the method declarations whose bodies are selectable.
    pub fn candidates(&self, side: RevisionSide, name: &str) -> Result<Vec<CodeElement>, AnnotateError> {
        let schema = self.schema(side, name)?;
        let index = self.index(side);
        Ok(candidates_for(index, schema.element_type))
    }

    pub fn set_parameter(
        &mut self,
        side: RevisionSide,
        name: &str,
        selection: &Selection,
    ) -> Result<&Annotation, AnnotateError> {
        let schema = self.schema(side, name)?.clone();
        let path = selection.path();
        if self.snapshot.file(side, path).is_none() {
            return Err(AnnotateError::WrongSide { path: path.to_string(), side });
        }
        let range = resolve_selection(self.index(side), schema.element_type, selection)?;
        let slot = self.annotation.parameters.side_mut(side).entry(schema.name.clone()).or_default();
        if schema.multiple {
            if slot.contains(&range) {
                return Err(AnnotateError::DuplicateElement(range));
            }
            slot.push(range.clone());
        } else {
            *slot = vec![range.clone()];
        }
        self.log(EventKind::SetParameter, Some(ParamKey::new(side, name)), EventPayload::Ranges(vec![range]));
        Ok(&self.annotation)
    }

    /// Removes one range, or every range when `range` is `None`.
    pub fn clear_parameter(
        &mut self,
        side: RevisionSide,
        name: &str,
        range: Option<&TextRange>,
    ) -> Result<&Annotation, AnnotateError> {
        self.schema(side, name)?;
        let slot = self.annotation.parameters.side_mut(side).entry(name.to_string()).or_default();
        let removed: Vec<TextRange> = match range {
            Some(r) => {
                let before = slot.len();
                slot.retain(|x| x != r);
                if slot.len() < before {
                    vec![r.clone()]
                } else {
                    Vec::new()
                }
            }
            None => std::mem::take(slot),
        };
        self.log(EventKind::ClearParameter, Some(ParamKey::new(side, name)), EventPayload::Ranges(removed));
        Ok(&self.annotation)
    }

    /// Derives the parameter from its rule's source and replaces its value.
    pub fn autofill(&mut self, side: RevisionSide, name: &str) -> Result<AutofillReport, AnnotateError> {
        let schema = self.schema(side, name)?.clone();
        let rule = schema
            .autofill
            .clone()
            .ok_or_else(|| AnnotateError::NoAutofillRule { side, name: name.to_string() })?;
        let source = self
            .type_def
            .autofill_source(side, &rule)
            .cloned()
            .ok_or_else(|| AnnotateError::SourceUnfilled { side, name: rule.follows.clone() })?;
        let unfilled = || AnnotateError::SourceUnfilled { side: source.side, name: source.name.clone() };
        let source_ranges = self.annotation.parameters.ranges(source.side, &source.name).to_vec();
        if source_ranges.is_empty() {
            return Err(unfilled());
        }

        let mut derived: Vec<CodeElement> = match rule.kind {
            AutofillKind::Reference => {
                let mut out = Vec::new();
                for r in &source_ranges {
                    let decl = self
                        .index(source.side)
                        .element_with_range(source.element_type, r)
                        .ok_or_else(unfilled)?;
                    out.extend(derive_references(self.index(source.side), self.index(side), decl).into_iter().cloned());
                }
                out
            }
            AutofillKind::Ancestor => {
                let ancestor = rule.ancestor_type.unwrap_or(schema.element_type);
                let mut out = Vec::new();
                for r in &source_ranges {
                    let found = self.index(side).enclosing(r, ancestor).ok_or(AnnotateError::NoAncestorFound(ancestor))?;
                    out.push(found.clone());
                }
                out
            }
        };
        derived.sort_by(|a, b| a.range.cmp(&b.range));
        derived.dedup_by(|a, b| a.range == b.range);
        if !schema.multiple {
            derived.truncate(1);
        }
        let ranges: Vec<TextRange> = derived.iter().map(|e| e.range.clone()).collect();
        self.annotation.parameters.side_mut(side).insert(name.to_string(), ranges.clone());
        let key = ParamKey::new(side, name);
        self.log(EventKind::Autofill, Some(key.clone()), EventPayload::Ranges(ranges));
        Ok(AutofillReport { parameter: key, derived })
    }

    pub fn completeness(&self) -> Completeness {
        let missing: Vec<ParamKey> = self
            .type_def
            .parameters()
            .filter(|p| p.required && self.annotation.parameters.ranges(p.side, &p.name).is_empty())
            .map(|p| ParamKey::new(p.side, p.name.clone()))
            .collect();
        Completeness { verifiable: missing.is_empty(), missing }
    }

    /// Replays every stored value against the schema and the indexes.
    pub fn validate(&self) -> Vec<Violation> {
        validate_parameters(&self.annotation, &self.type_def, &self.index_before, &self.index_after)
    }

    pub fn set_status(&mut self, status: Status) -> Result<&Annotation, AnnotateError> {
        if status == Status::Verified {
            let c = self.completeness();
            if !c.verifiable {
                return Err(AnnotateError::IncompleteAnnotation { missing: c.missing });
            }
            let violations = self.validate();
            if !violations.is_empty() {
                return Err(AnnotateError::InvalidValues(violations));
            }
        }
        self.annotation.status = status;
        self.log(EventKind::StatusChange, None, EventPayload::Status(status));
        Ok(&self.annotation)
    }
}

pub fn candidates_for(index: &ElementIndex, t: ElementType) -> Vec<CodeElement> {
    if t.is_concrete() {
        return index.elements_of_type(t, None).expect("concrete type").into_iter().cloned().collect();
    }
    index
        .files()
        .flat_map(|f| f.method_bodies().iter().map(|b| b.method.clone()))
        .filter_map(|m| index.element_with_range(ElementType::MethodDeclaration, &m).cloned())
        .collect()
}

/// Identifier occurrences that may refer to `decl`, matched by simple name.
///
/// Locals and parameters are searched only inside their declaring method
/// (on the other side: methods with the same name). The declaration's own
/// occurrence is excluded when searching the declaration's side.
pub fn derive_references<'a>(
    source_index: &ElementIndex,
    target_index: &'a ElementIndex,
    decl: &CodeElement,
) -> Vec<&'a CodeElement> {
    let Some(name) = decl.name.as_deref() else { return Vec::new() };
    let same_side = source_index.side() == target_index.side();
    let method_scoped = matches!(decl.element_type, ElementType::VariableDeclaration | ElementType::ParameterDeclaration);
    let found: Vec<&CodeElement> = match (&decl.enclosing_method, method_scoped) {
        (Some(method), true) if same_side => target_index.identifiers_named(name, Some(method)),
        (Some(method), true) => {
            let method_name = source_index
                .element_with_range(ElementType::MethodDeclaration, method)
                .and_then(|m| m.name.clone());
            let scopes: Vec<TextRange> = target_index
                .elements_of_type(ElementType::MethodDeclaration, None)
                .expect("concrete type")
                .into_iter()
                .filter(|m| m.name.is_some() && m.name == method_name)
                .map(|m| m.range.clone())
                .collect();
            let mut hits: Vec<&CodeElement> =
                scopes.iter().flat_map(|s| target_index.identifiers_named(name, Some(s))).collect();
            hits.sort_by(|a, b| a.range.cmp(&b.range));
            hits.dedup_by(|a, b| a.range == b.range);
            hits
        }
        _ => target_index.identifiers_named(name, None),
    };
    found
        .into_iter()
        .filter(|e| !(same_side && decl.range.contains(&e.range)))
        .collect()
}

/// Schema and index checks for every stored value of an annotation.
pub fn validate_parameters(
    annotation: &Annotation,
    def: &RefactoringTypeDefinition,
    before: &ElementIndex,
    after: &ElementIndex,
) -> Vec<Violation> {
    let mut out = schema_violations(annotation, def);
    for (side, name, ranges) in annotation.parameters.iter() {
        let Some(schema) = def.parameter(side, name) else { continue };
        let index = match side {
            RevisionSide::Before => before,
            RevisionSide::After => after,
        };
        for r in ranges {
            let ok = if schema.element_type.is_concrete() {
                index.element_with_range(schema.element_type, r).is_some()
            } else {
                snap_whitespace(index, r).is_ok_and(|s| s == *r) && check_fragment(index, r).is_ok()
            };
            if !ok {
                out.push(Violation {
                    parameter: Some(ParamKey::new(side, name)),
                    message: format!("{side}/{name}: {r} is not a valid {}", schema.element_type),
                });
            }
        }
    }
    out
}

/// Checks that need only the type definition: known keys, multiplicity, and
/// required values when Verified.
pub fn schema_violations(annotation: &Annotation, def: &RefactoringTypeDefinition) -> Vec<Violation> {
    let mut out = Vec::new();
    if annotation.type_name.as_deref() != Some(def.name.as_str()) {
        out.push(Violation { parameter: None, message: format!("annotation is not of type {}", def.name) });
        return out;
    }
    for (side, name, ranges) in annotation.parameters.iter() {
        let key = || Some(ParamKey::new(side, name));
        match def.parameter(side, name) {
            None => out.push(Violation { parameter: key(), message: format!("{side}/{name}: not a parameter of {}", def.name) }),
            Some(p) if !p.multiple && ranges.len() > 1 => {
                out.push(Violation { parameter: key(), message: format!("{side}/{name}: single-valued but holds {}", ranges.len()) })
            }
            Some(_) => {
                let distinct: BTreeSet<&TextRange> = ranges.iter().collect();
                if distinct.len() != ranges.len() {
                    out.push(Violation { parameter: key(), message: format!("{side}/{name}: duplicate ranges") });
                }
            }
        }
    }
    if annotation.status == Status::Verified {
        for p in def.parameters().filter(|p| p.required) {
            if annotation.parameters.ranges(p.side, &p.name).is_empty() {
                out.push(Violation {
                    parameter: Some(ParamKey::new(p.side, p.name.clone())),
                    message: format!("{}/{}: required but empty on a Verified annotation", p.side, p.name),
                });
            }
        }
    }
    out
}
