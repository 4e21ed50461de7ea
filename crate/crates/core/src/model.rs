//! Domain values shared by every other module: text ranges, element types,
//! revision sides, commits and annotations.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("invalid path {0:?}: must be non-empty, relative, '/'-separated and free of '..'")]
    InvalidPath(String),
    #[error("invalid range {0}: start must strictly precede end and positions are 1-based")]
    InvalidRange(String),
    #[error("unknown element type {0:?}")]
    UnknownElementType(String),
    #[error("unknown revision side {0:?}")]
    UnknownSide(String),
    #[error("unknown status {0:?}")]
    UnknownStatus(String),
}

/// A 1-based line/column position. Columns count Unicode scalar values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Position {
    pub line: u32,
    pub column: u32,
}

impl Position {
    pub fn new(line: u32, column: u32) -> Self {
        Position { line, column }
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

pub(crate) fn validate_path(path: &str) -> Result<(), ModelError> {
    let bad = path.is_empty()
        || path.contains('\\')
        || path.starts_with('/')
        || path.split('/').any(|seg| seg.is_empty() || seg == "..");
    if bad {
        Err(ModelError::InvalidPath(path.to_string()))
    } else {
        Ok(())
    }
}

/// A contiguous span of one file. `end` is exclusive.
///
/// Field order matters: the derived `Ord` sorts by path, then start, then end.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawRange", into = "RawRange")]
pub struct TextRange {
    path: String,
    start: Position,
    end: Position,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct RawRange {
    path: String,
    start_line: u32,
    start_column: u32,
    end_line: u32,
    end_column: u32,
}

impl TryFrom<RawRange> for TextRange {
    type Error = ModelError;

    fn try_from(raw: RawRange) -> Result<Self, Self::Error> {
        TextRange::new(
            raw.path,
            Position::new(raw.start_line, raw.start_column),
            Position::new(raw.end_line, raw.end_column),
        )
    }
}

impl From<TextRange> for RawRange {
    fn from(r: TextRange) -> Self {
        RawRange {
            path: r.path,
            start_line: r.start.line,
            start_column: r.start.column,
            end_line: r.end.line,
            end_column: r.end.column,
        }
    }
}

impl TextRange {
    pub fn new(path: impl Into<String>, start: Position, end: Position) -> Result<Self, ModelError> {
        let path = path.into();
        validate_path(&path)?;
        if start.line == 0 || start.column == 0 || end.line == 0 || end.column == 0 || start >= end {
            return Err(ModelError::InvalidRange(format!("{path}@{start}-{end}")));
        }
        Ok(TextRange { path, start, end })
    }

    pub fn path(&self) -> &str {
        &self.path
    }

    pub fn start(&self) -> Position {
        self.start
    }

    pub fn end(&self) -> Position {
        self.end
    }

    pub fn contains(&self, other: &TextRange) -> bool {
        self.path == other.path && self.start <= other.start && other.end <= self.end
    }

    pub fn strictly_contains(&self, other: &TextRange) -> bool {
        self.contains(other) && self != other
    }

    pub fn contains_point(&self, path: &str, pos: Position) -> bool {
        self.path == path && self.start <= pos && pos < self.end
    }

    pub fn overlaps(&self, other: &TextRange) -> bool {
        self.path == other.path && self.start < other.end && other.start < self.end
    }
}

impl fmt::Display for TextRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}-{}", self.path, self.start, self.end)
    }
}

/// A point selection (a click) in a file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct Point {
    pub path: String,
    pub line: u32,
    pub column: u32,
}

impl Point {
    pub fn new(path: impl Into<String>, line: u32, column: u32) -> Self {
        Point { path: path.into(), line, column }
    }

    pub fn position(&self) -> Position {
        Position::new(self.line, self.column)
    }
}

/// Categories of syntactic code elements a parameter may be bound to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ElementType {
    ClassDeclaration,
    MethodDeclaration,
    FieldDeclaration,
    VariableDeclaration,
    ParameterDeclaration,
    MethodInvocation,
    Identifier,
    /// Any text range inside a single method body; never stored in an index.
    CodeFragment,
}

impl ElementType {
    pub const ALL: [ElementType; 8] = [
        ElementType::ClassDeclaration,
        ElementType::MethodDeclaration,
        ElementType::FieldDeclaration,
        ElementType::VariableDeclaration,
        ElementType::ParameterDeclaration,
        ElementType::MethodInvocation,
        ElementType::Identifier,
        ElementType::CodeFragment,
    ];

    /// The seven types that correspond to a single AST node category.
    pub const CONCRETE: [ElementType; 7] = [
        ElementType::ClassDeclaration,
        ElementType::MethodDeclaration,
        ElementType::FieldDeclaration,
        ElementType::VariableDeclaration,
        ElementType::ParameterDeclaration,
        ElementType::MethodInvocation,
        ElementType::Identifier,
    ];

    pub fn is_concrete(self) -> bool {
        self != ElementType::CodeFragment
    }

    pub fn is_declaration(self) -> bool {
        matches!(
            self,
            ElementType::ClassDeclaration
                | ElementType::MethodDeclaration
                | ElementType::FieldDeclaration
                | ElementType::VariableDeclaration
                | ElementType::ParameterDeclaration
        )
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ElementType::ClassDeclaration => "ClassDeclaration",
            ElementType::MethodDeclaration => "MethodDeclaration",
            ElementType::FieldDeclaration => "FieldDeclaration",
            ElementType::VariableDeclaration => "VariableDeclaration",
            ElementType::ParameterDeclaration => "ParameterDeclaration",
            ElementType::MethodInvocation => "MethodInvocation",
            ElementType::Identifier => "Identifier",
            ElementType::CodeFragment => "CodeFragment",
        }
    }
}

impl fmt::Display for ElementType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ElementType {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ElementType::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| ModelError::UnknownElementType(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RevisionSide {
    Before,
    After,
}

impl RevisionSide {
    pub const BOTH: [RevisionSide; 2] = [RevisionSide::Before, RevisionSide::After];

    pub fn as_str(self) -> &'static str {
        match self {
            RevisionSide::Before => "before",
            RevisionSide::After => "after",
        }
    }

    pub fn other(self) -> RevisionSide {
        match self {
            RevisionSide::Before => RevisionSide::After,
            RevisionSide::After => RevisionSide::Before,
        }
    }
}

impl fmt::Display for RevisionSide {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RevisionSide {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "before" => Ok(RevisionSide::Before),
            "after" => Ok(RevisionSide::After),
            _ => Err(ModelError::UnknownSide(s.to_string())),
        }
    }
}

/// A syntactic element surfaced by the index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CodeElement {
    #[serde(rename = "type")]
    pub element_type: ElementType,
    pub range: TextRange,
    pub side: RevisionSide,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub enclosing_method: Option<TextRange>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommitRef {
    pub repository: String,
    pub sha: String,
}

impl CommitRef {
    pub fn new(repository: impl Into<String>, sha: impl Into<String>) -> Self {
        CommitRef { repository: repository.into(), sha: sha.into() }
    }

    /// `{repository}:{sha}`, the identifier used by the store and the HTTP API.
    pub fn id(&self) -> String {
        format!("{}:{}", self.repository, self.sha)
    }
}

impl fmt::Display for CommitRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Status {
    Draft,
    Verified,
    Rejected,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Draft => "Draft",
            Status::Verified => "Verified",
            Status::Rejected => "Rejected",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Status {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "draft" => Ok(Status::Draft),
            "verified" => Ok(Status::Verified),
            "rejected" => Ok(Status::Rejected),
            _ => Err(ModelError::UnknownStatus(s.to_string())),
        }
    }
}

/// Bound parameter values of one annotation, keyed by side then name.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Parameters {
    #[serde(default)]
    pub before: BTreeMap<String, Vec<TextRange>>,
    #[serde(default)]
    pub after: BTreeMap<String, Vec<TextRange>>,
}

impl Parameters {
    pub fn side(&self, side: RevisionSide) -> &BTreeMap<String, Vec<TextRange>> {
        match side {
            RevisionSide::Before => &self.before,
            RevisionSide::After => &self.after,
        }
    }

    pub fn side_mut(&mut self, side: RevisionSide) -> &mut BTreeMap<String, Vec<TextRange>> {
        match side {
            RevisionSide::Before => &mut self.before,
            RevisionSide::After => &mut self.after,
        }
    }

    pub fn get(&self, side: RevisionSide, name: &str) -> Option<&Vec<TextRange>> {
        self.side(side).get(name)
    }

    pub fn ranges(&self, side: RevisionSide, name: &str) -> &[TextRange] {
        self.get(side, name).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Every (side, name, ranges) triple, before side first.
    pub fn iter(&self) -> impl Iterator<Item = (RevisionSide, &str, &[TextRange])> {
        RevisionSide::BOTH.into_iter().flat_map(move |side| {
            self.side(side)
                .iter()
                .map(move |(name, ranges)| (side, name.as_str(), ranges.as_slice()))
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EventKind {
    SetParameter,
    ClearParameter,
    Autofill,
    StatusChange,
    TypeChange,
}

impl EventKind {
    /// Whether the event records work on a parameter value.
    pub fn touches_parameter(self) -> bool {
        matches!(self, EventKind::SetParameter | EventKind::ClearParameter | EventKind::Autofill)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamKey {
    pub side: RevisionSide,
    pub name: String,
}

impl ParamKey {
    pub fn new(side: RevisionSide, name: impl Into<String>) -> Self {
        ParamKey { side, name: name.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum EventPayload {
    Ranges(Vec<TextRange>),
    Status(Status),
    Type(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnotationEvent {
    /// Milliseconds since the Unix epoch.
    pub timestamp: i64,
    pub kind: EventKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parameter: Option<ParamKey>,
    pub payload: EventPayload,
}

/// One refactoring instance on one commit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct Annotation {
    pub id: String,
    pub commit: CommitRef,
    /// `None` until a type is assigned (hints that only carry a description).
    #[serde(rename = "type")]
    pub type_name: Option<String>,
    pub status: Status,
    pub annotator: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub parameters: Parameters,
    #[serde(default)]
    pub events: Vec<AnnotationEvent>,
    pub version: u64,
}

impl Annotation {
    pub fn new_id() -> String {
        uuid::Uuid::new_v4().to_string()
    }
}
