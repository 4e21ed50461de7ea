//! Queryable index of typed code elements for one revision side of a commit.
//!
//! Every changed file on the side is parsed by the grammar chosen from its
//! extension. Files that cannot be parsed are recorded as unindexed and do
//! not affect the others. `CodeFragment` is a selection-only type and is
//! never stored.

mod java;

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;
use thiserror::Error;

use crate::ingest::CommitSnapshot;
use crate::model::{CodeElement, ElementType, Position, RevisionSide, TextRange};
use crate::text::LineIndex;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IndexError {
    #[error("CodeFragment is a free selection type and cannot be enumerated")]
    CodeFragmentNotEnumerable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Language {
    Java,
}

impl Language {
    pub fn for_path(path: &str) -> Option<Language> {
        let ext = path.rsplit_once('.').map(|(_, e)| e)?;
        match ext {
            "java" => Some(Language::Java),
            _ => None,
        }
    }
}

/// The interior of a method body: everything between its braces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MethodBody {
    pub method: TextRange,
    pub interior_start: Position,
    pub interior_end: Position,
}

impl MethodBody {
    pub fn encloses(&self, range: &TextRange) -> bool {
        range.path() == self.method.path() && self.interior_start <= range.start() && range.end() <= self.interior_end
    }
}

#[derive(Debug, Default)]
pub(crate) struct Extracted {
    elements: Vec<CodeElement>,
    bodies: Vec<MethodBody>,
}

#[derive(Debug, Clone)]
pub struct FileIndex {
    path: String,
    text: String,
    lines: LineIndex,
    /// Sorted by range.
    elements: Vec<CodeElement>,
    by_type: HashMap<ElementType, Vec<usize>>,
    identifiers: HashMap<String, Vec<usize>>,
    bodies: Vec<MethodBody>,
}

impl FileIndex {
    fn new(path: &str, text: &str, extracted: Extracted) -> Self {
        let mut elements = extracted.elements;
        elements.sort_by(|a, b| a.range.cmp(&b.range).then(a.element_type.cmp(&b.element_type)));
        elements.dedup_by(|a, b| a.range == b.range && a.element_type == b.element_type);
        let mut by_type: HashMap<ElementType, Vec<usize>> = HashMap::new();
        let mut identifiers: HashMap<String, Vec<usize>> = HashMap::new();
        for (i, e) in elements.iter().enumerate() {
            by_type.entry(e.element_type).or_default().push(i);
            if e.element_type == ElementType::Identifier {
                if let Some(name) = &e.name {
                    identifiers.entry(name.clone()).or_default().push(i);
                }
            }
        }
        FileIndex {
            path: path.to_string(),
            text: text.to_string(),
            lines: LineIndex::new(text),
            elements,
            by_type,
            identifiers,
            bodies: extracted.bodies,
        }
    }

    pub fn path(&self) -> &str {
        &self.path
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn lines(&self) -> &LineIndex {
        &self.lines
    }

    pub fn elements(&self) -> &[CodeElement] {
        &self.elements
    }

    fn of_type(&self, t: ElementType) -> impl Iterator<Item = &CodeElement> {
        self.by_type.get(&t).into_iter().flatten().map(|&i| &self.elements[i])
    }

    pub fn method_bodies(&self) -> &[MethodBody] {
        &self.bodies
    }

    /// Text covered by `range`, if it lies inside this file.
    pub fn slice(&self, range: &TextRange) -> Option<&str> {
        let start = self.lines.offset(&self.text, range.start())?;
        let end = self.lines.offset(&self.text, range.end())?;
        self.text.get(start..end)
    }
}

/// Picks the innermost element of a nested chain: latest start, then earliest end.
fn innermost<'a>(candidates: impl Iterator<Item = &'a CodeElement>) -> Option<&'a CodeElement> {
    candidates.max_by(|a, b| {
        a.range
            .start()
            .cmp(&b.range.start())
            .then(b.range.end().cmp(&a.range.end()))
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Unindexed {
    pub path: String,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct ElementIndex {
    side: RevisionSide,
    files: BTreeMap<String, FileIndex>,
    unindexed: BTreeMap<String, String>,
}

impl ElementIndex {
    pub fn build(snapshot: &CommitSnapshot, side: RevisionSide) -> ElementIndex {
        let mut files = BTreeMap::new();
        let mut unindexed = BTreeMap::new();
        for (path, change) in snapshot.files_on(side) {
            let Some(text) = change.content(side) else { continue };
            if change.binary {
                unindexed.insert(path.to_string(), "binary file".to_string());
                continue;
            }
            let extracted = match Language::for_path(path) {
                Some(Language::Java) => java::extract(text, path, side),
                None => Err("unsupported language".to_string()),
            };
            match extracted {
                Ok(ex) => {
                    files.insert(path.to_string(), FileIndex::new(path, text, ex));
                }
                Err(reason) => {
                    unindexed.insert(path.to_string(), reason);
                }
            }
        }
        ElementIndex { side, files, unindexed }
    }

    pub fn side(&self) -> RevisionSide {
        self.side
    }

    pub fn file(&self, path: &str) -> Option<&FileIndex> {
        self.files.get(path)
    }

    pub fn files(&self) -> impl Iterator<Item = &FileIndex> {
        self.files.values()
    }

    pub fn unindexed(&self) -> Vec<Unindexed> {
        self.unindexed
            .iter()
            .map(|(path, reason)| Unindexed { path: path.clone(), reason: reason.clone() })
            .collect()
    }

    pub fn is_unindexed(&self, path: &str) -> bool {
        self.unindexed.contains_key(path)
    }

    /// All stored elements of `t`, optionally restricted to one file, sorted by (path, range).
    pub fn elements_of_type(&self, t: ElementType, file: Option<&str>) -> Result<Vec<&CodeElement>, IndexError> {
        if !t.is_concrete() {
            return Err(IndexError::CodeFragmentNotEnumerable);
        }
        let out = match file {
            Some(path) => self.files.get(path).into_iter().flat_map(|f| f.of_type(t)).collect(),
            None => self.files.values().flat_map(|f| f.of_type(t)).collect(),
        };
        Ok(out)
    }

    /// The smallest element of `t` whose range contains the point.
    pub fn element_at(&self, t: ElementType, path: &str, pos: Position) -> Option<&CodeElement> {
        let file = self.files.get(path)?;
        innermost(file.of_type(t).filter(|e| e.range.contains_point(path, pos)))
    }

    /// The smallest element of `t` strictly containing `range`.
    pub fn enclosing(&self, range: &TextRange, t: ElementType) -> Option<&CodeElement> {
        let file = self.files.get(range.path())?;
        innermost(file.of_type(t).filter(|e| e.range.strictly_contains(range)))
    }

    /// The element of `t` whose range is exactly `range`.
    pub fn element_with_range(&self, t: ElementType, range: &TextRange) -> Option<&CodeElement> {
        let file = self.files.get(range.path())?;
        file.of_type(t).find(|e| e.range == *range)
    }

    /// Identifier occurrences spelled `name`, within `scope` when given, sorted by position.
    pub fn identifiers_named(&self, name: &str, scope: Option<&TextRange>) -> Vec<&CodeElement> {
        let lookup = |f: &'_ FileIndex| -> Vec<usize> { f.identifiers.get(name).cloned().unwrap_or_default() };
        match scope {
            Some(scope) => match self.files.get(scope.path()) {
                Some(f) => lookup(f)
                    .into_iter()
                    .map(|i| &f.elements[i])
                    .filter(|e| scope.contains(&e.range))
                    .collect(),
                None => Vec::new(),
            },
            None => self
                .files
                .values()
                .flat_map(|f| lookup(f).into_iter().map(move |i| &f.elements[i]))
                .collect(),
        }
    }

    /// Method bodies (innermost first) whose interior contains `range`.
    pub fn bodies_enclosing(&self, range: &TextRange) -> Vec<&MethodBody> {
        let Some(file) = self.files.get(range.path()) else { return Vec::new() };
        let mut bodies: Vec<&MethodBody> = file.bodies.iter().filter(|b| b.encloses(range)).collect();
        bodies.sort_by(|a, b| b.method.start().cmp(&a.method.start()));
        bodies
    }
}
