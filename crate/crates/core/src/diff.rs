//! Line-level diffs of changed files.
//!
//! Lines are compared after splitting on the file's line ending. A file uses
//! CRLF endings only when every `\n` is preceded by `\r`; otherwise any `\r`
//! stays part of the line text. The presence of a final newline is part of
//! the last line's identity, so a change to it shows up as a changed line and
//! the before text plus the hunks always reproduce the after text exactly.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use similar::{capture_diff_slices, group_diff_ops, Algorithm, DiffTag};
use thiserror::Error;

use crate::ingest::FileChange;
use crate::model::RevisionSide;

pub const DEFAULT_CONTEXT_LINES: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiffError {
    #[error("{0} is a binary file")]
    BinaryFile(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LineEnding {
    #[serde(rename = "lf")]
    Lf,
    #[serde(rename = "crlf")]
    CrLf,
}

impl LineEnding {
    pub fn as_str(self) -> &'static str {
        match self {
            LineEnding::Lf => "\n",
            LineEnding::CrLf => "\r\n",
        }
    }
}

/// How a text was split into lines, so it can be joined back byte-exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TextShape {
    pub line_ending: LineEnding,
    pub trailing_newline: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LineTag {
    Context,
    Delete,
    Insert,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiffLine {
    pub tag: LineTag,
    pub text: String,
}

/// `*_start` is the 1-based number of the first line the hunk covers on that
/// side; for an empty side it is the number the next line would have.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Hunk {
    pub before_start: usize,
    pub before_len: usize,
    pub after_start: usize,
    pub after_len: usize,
    pub lines: Vec<DiffLine>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FileDiff {
    pub path_before: Option<String>,
    pub path_after: Option<String>,
    pub before_shape: TextShape,
    pub after_shape: TextShape,
    pub hunks: Vec<Hunk>,
}

pub fn split_lines(text: &str) -> (Vec<&str>, TextShape) {
    let newlines = text.matches('\n').count();
    let line_ending = if newlines > 0 && text.matches("\r\n").count() == newlines {
        LineEnding::CrLf
    } else {
        LineEnding::Lf
    };
    let sep = line_ending.as_str();
    let trailing_newline = text.ends_with(sep);
    let body = if trailing_newline { &text[..text.len() - sep.len()] } else { text };
    let lines = if text.is_empty() { Vec::new() } else { body.split(sep).collect() };
    (lines, TextShape { line_ending, trailing_newline })
}

pub fn compute_diff(change: &FileChange, context_lines: usize) -> Result<FileDiff, DiffError> {
    if change.binary {
        return Err(DiffError::BinaryFile(change.display_path().to_string()));
    }
    let before = change.content_before.as_deref().unwrap_or("");
    let after = change.content_after.as_deref().unwrap_or("");
    let mut diff = diff_texts(before, after, context_lines);
    diff.path_before = change.path_before.clone();
    diff.path_after = change.path_after.clone();
    Ok(diff)
}

/// Diffs two texts; paths are left empty.
pub fn diff_texts(before: &str, after: &str, context_lines: usize) -> FileDiff {
    let (old, before_shape) = split_lines(before);
    let (new, after_shape) = split_lines(after);
    let keyed = |lines: &[&str], shape: TextShape| -> Vec<(String, bool)> {
        let n = lines.len();
        lines
            .iter()
            .enumerate()
            .map(|(i, l)| (l.to_string(), i + 1 < n || shape.trailing_newline))
            .collect()
    };
    let old_keys = keyed(&old, before_shape);
    let new_keys = keyed(&new, after_shape);
    let ops = capture_diff_slices(Algorithm::Myers, &old_keys, &new_keys);

    let mut hunks = Vec::new();
    for group in group_diff_ops(ops, context_lines) {
        let (Some(first), Some(last)) = (group.first(), group.last()) else { continue };
        let old_span = first.old_range().start..last.old_range().end;
        let new_span = first.new_range().start..last.new_range().end;
        let mut lines = Vec::new();
        for op in &group {
            let (tag, o, n) = op.as_tag_tuple();
            match tag {
                DiffTag::Equal => lines.extend(o.map(|i| DiffLine { tag: LineTag::Context, text: old[i].to_string() })),
                DiffTag::Delete => lines.extend(o.map(|i| DiffLine { tag: LineTag::Delete, text: old[i].to_string() })),
                DiffTag::Insert => lines.extend(n.map(|i| DiffLine { tag: LineTag::Insert, text: new[i].to_string() })),
                DiffTag::Replace => {
                    lines.extend(o.map(|i| DiffLine { tag: LineTag::Delete, text: old[i].to_string() }));
                    lines.extend(n.map(|i| DiffLine { tag: LineTag::Insert, text: new[i].to_string() }));
                }
            }
        }
        hunks.push(Hunk {
            before_start: old_span.start + 1,
            before_len: old_span.len(),
            after_start: new_span.start + 1,
            after_len: new_span.len(),
            lines,
        });
    }
    FileDiff { path_before: None, path_after: None, before_shape, after_shape, hunks }
}

/// Line numbers deleted (before side) or inserted (after side).
pub fn changed_line_set(diff: &FileDiff, side: RevisionSide) -> BTreeSet<usize> {
    let mut out = BTreeSet::new();
    for hunk in &diff.hunks {
        let mut before_line = hunk.before_start;
        let mut after_line = hunk.after_start;
        for line in &hunk.lines {
            match line.tag {
                LineTag::Context => {
                    before_line += 1;
                    after_line += 1;
                }
                LineTag::Delete => {
                    if side == RevisionSide::Before {
                        out.insert(before_line);
                    }
                    before_line += 1;
                }
                LineTag::Insert => {
                    if side == RevisionSide::After {
                        out.insert(after_line);
                    }
                    after_line += 1;
                }
            }
        }
    }
    out
}
