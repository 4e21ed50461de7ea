//! Building [`CommitSnapshot`]s from a git clone or a `before/`/`after/`
//! fixture directory.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::process::Command;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use walkdir::WalkDir;

use crate::model::{CommitRef, RevisionSide};

/// Environment variable naming the git executable to use.
pub const GIT_ENV: &str = "REFANN_GIT";

const BINARY_SNIFF_LEN: usize = 8000;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("repository not found at {0}")]
    RepoNotFound(PathBuf),
    #[error("unknown commit {0:?}")]
    UnknownCommit(String),
    #[error("commit {0} has more than one parent; merge commits are not supported")]
    MergeCommitUnsupported(String),
    #[error("malformed fixture {path}: {reason}")]
    MalformedFixture { path: PathBuf, reason: String },
    #[error("git {args} failed: {stderr}")]
    Git { args: String, stderr: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChangeKind {
    Added,
    Removed,
    Modified,
    Renamed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FileChange {
    pub kind: ChangeKind,
    pub path_before: Option<String>,
    pub path_after: Option<String>,
    pub content_before: Option<String>,
    pub content_after: Option<String>,
    /// Binary files are listed but cannot be annotated or diffed.
    #[serde(default)]
    pub binary: bool,
}

impl FileChange {
    pub fn path(&self, side: RevisionSide) -> Option<&str> {
        match side {
            RevisionSide::Before => self.path_before.as_deref(),
            RevisionSide::After => self.path_after.as_deref(),
        }
    }

    pub fn content(&self, side: RevisionSide) -> Option<&str> {
        match side {
            RevisionSide::Before => self.content_before.as_deref(),
            RevisionSide::After => self.content_after.as_deref(),
        }
    }

    /// The after-side path when present, otherwise the before-side path.
    pub fn display_path(&self) -> &str {
        self.path_after.as_deref().or(self.path_before.as_deref()).unwrap_or_default()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommitSnapshot {
    pub commit: CommitRef,
    pub message: String,
    pub files: Vec<FileChange>,
}

impl CommitSnapshot {
    /// Changed files that exist on `side`, with their path and content.
    pub fn files_on(&self, side: RevisionSide) -> impl Iterator<Item = (&str, &FileChange)> {
        self.files.iter().filter_map(move |f| f.path(side).map(|p| (p, f)))
    }

    pub fn file(&self, side: RevisionSide, path: &str) -> Option<&FileChange> {
        self.files.iter().find(|f| f.path(side) == Some(path))
    }

    pub fn content(&self, side: RevisionSide, path: &str) -> Option<&str> {
        self.file(side, path).and_then(|f| f.content(side))
    }
}

fn is_binary(bytes: &[u8]) -> bool {
    bytes[..bytes.len().min(BINARY_SNIFF_LEN)].contains(&0)
}

fn decode(bytes: Vec<u8>) -> String {
    String::from_utf8(bytes).unwrap_or_else(|e| String::from_utf8_lossy(e.as_bytes()).into_owned())
}

struct Git {
    program: String,
    repo: PathBuf,
}

impl Git {
    fn new(repo: &Path) -> Self {
        let program = std::env::var(GIT_ENV).ok().filter(|s| !s.is_empty()).unwrap_or_else(|| "git".into());
        Git { program, repo: repo.to_path_buf() }
    }

    fn run(&self, args: &[&str]) -> Result<Result<Vec<u8>, String>, IngestError> {
        let out = Command::new(&self.program)
            .arg("-C")
            .arg(&self.repo)
            .args(["-c", "core.quotepath=off"])
            .args(args)
            .output()?;
        if out.status.success() {
            Ok(Ok(out.stdout))
        } else {
            Ok(Err(String::from_utf8_lossy(&out.stderr).trim().to_string()))
        }
    }

    fn run_ok(&self, args: &[&str]) -> Result<Vec<u8>, IngestError> {
        self.run(args)?.map_err(|stderr| IngestError::Git { args: args.join(" "), stderr })
    }

    fn blob(&self, rev: &str, path: &str) -> Result<Vec<u8>, IngestError> {
        self.run_ok(&["cat-file", "blob", &format!("{rev}:{path}")])
    }
}

/// Loads the changes introduced by `sha` relative to its single parent.
/// A root commit is compared against the empty tree.
pub fn load_commit(repo_path: &Path, sha: &str) -> Result<CommitSnapshot, IngestError> {
    if !repo_path.is_dir() {
        return Err(IngestError::RepoNotFound(repo_path.to_path_buf()));
    }
    let git = Git::new(repo_path);
    if git.run(&["rev-parse", "--git-dir"])?.is_err() {
        return Err(IngestError::RepoNotFound(repo_path.to_path_buf()));
    }
    if sha.is_empty() || sha.starts_with('-') {
        return Err(IngestError::UnknownCommit(sha.to_string()));
    }
    let full = match git.run(&["rev-parse", "--verify", "--quiet", &format!("{sha}^{{commit}}")])? {
        Ok(out) => String::from_utf8_lossy(&out).trim().to_string(),
        Err(_) => return Err(IngestError::UnknownCommit(sha.to_string())),
    };

    let raw = decode(git.run_ok(&["cat-file", "commit", &full])?);
    let (header, message) = raw.split_once("\n\n").unwrap_or((raw.as_str(), ""));
    let parents: Vec<&str> = header.lines().filter_map(|l| l.strip_prefix("parent ")).collect();
    if parents.len() > 1 {
        return Err(IngestError::MergeCommitUnsupported(full));
    }
    let parent = parents.first().map(|p| p.to_string());

    let listing = match &parent {
        Some(p) => git.run_ok(&["diff-tree", "-r", "-z", "-M", "--no-commit-id", "--name-status", p, &full])?,
        None => git.run_ok(&["diff-tree", "-r", "-z", "--root", "--no-commit-id", "--name-status", &full])?,
    };
    let listing = decode(listing);
    let mut fields = listing.split('\0').filter(|s| !s.is_empty());
    let mut files = Vec::new();
    while let Some(status) = fields.next() {
        let code = status.chars().next().unwrap_or('M');
        let mut next_path = || {
            fields.next().map(str::to_string).ok_or_else(|| IngestError::Git {
                args: "diff-tree".into(),
                stderr: format!("truncated output after status {status}"),
            })
        };
        let (kind, before, after) = match code {
            'A' => (ChangeKind::Added, None, Some(next_path()?)),
            'D' => (ChangeKind::Removed, Some(next_path()?), None),
            'R' => {
                let from = next_path()?;
                let to = next_path()?;
                (ChangeKind::Renamed, Some(from), Some(to))
            }
            'C' => {
                let _source = next_path()?;
                (ChangeKind::Added, None, Some(next_path()?))
            }
            _ => {
                let p = next_path()?;
                (ChangeKind::Modified, Some(p.clone()), Some(p))
            }
        };
        let bytes_before = match (&before, &parent) {
            (Some(p), Some(rev)) => Some(git.blob(rev, p)?),
            _ => None,
        };
        let bytes_after = match &after {
            Some(p) => Some(git.blob(&full, p)?),
            None => None,
        };
        if bytes_before.is_some() && bytes_before == bytes_after && before == after {
            continue;
        }
        files.push(make_change(kind, before, after, bytes_before, bytes_after));
    }
    files.sort_by(|a, b| a.display_path().cmp(b.display_path()));

    let label = repo_path
        .canonicalize()
        .ok()
        .and_then(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
        .unwrap_or_else(|| repo_path.display().to_string());
    Ok(CommitSnapshot { commit: CommitRef::new(label, full), message: message.to_string(), files })
}

fn make_change(
    kind: ChangeKind,
    path_before: Option<String>,
    path_after: Option<String>,
    before: Option<Vec<u8>>,
    after: Option<Vec<u8>>,
) -> FileChange {
    let binary = before.as_deref().is_some_and(is_binary) || after.as_deref().is_some_and(is_binary);
    FileChange {
        kind,
        path_before,
        path_after,
        content_before: before.map(decode),
        content_after: after.map(decode),
        binary,
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FixtureMeta {
    repository: String,
    sha: String,
    #[serde(default)]
    message: String,
}

fn read_tree(root: &Path) -> Result<BTreeMap<String, Vec<u8>>, IngestError> {
    let mut out = BTreeMap::new();
    for entry in WalkDir::new(root).sort_by_file_name() {
        let entry = entry.map_err(|e| IngestError::MalformedFixture {
            path: root.to_path_buf(),
            reason: e.to_string(),
        })?;
        if !entry.file_type().is_file() {
            continue;
        }
        let rel = entry.path().strip_prefix(root).expect("walkdir yields paths under its root");
        let rel = rel.components().map(|c| c.as_os_str().to_string_lossy()).collect::<Vec<_>>().join("/");
        out.insert(rel, fs::read(entry.path())?);
    }
    Ok(out)
}

/// Reads the commit metadata of a fixture directory, defaulting both the
/// repository label and sha to the directory name.
pub fn fixture_commit(dir: &Path) -> Result<(CommitRef, String), IngestError> {
    let meta_path = dir.join("commit.json");
    let malformed = |reason: String| IngestError::MalformedFixture { path: dir.to_path_buf(), reason };
    if meta_path.is_file() {
        let meta: FixtureMeta = serde_json::from_slice(&fs::read(&meta_path)?)
            .map_err(|e| malformed(format!("commit.json: {e}")))?;
        if meta.sha.is_empty() {
            return Err(malformed("commit.json: empty sha".into()));
        }
        Ok((CommitRef::new(meta.repository, meta.sha), meta.message))
    } else {
        let label = dir
            .canonicalize()
            .ok()
            .and_then(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
            .ok_or_else(|| malformed("cannot derive a label from the directory name".into()))?;
        Ok((CommitRef::new(label.clone(), label), String::new()))
    }
}

/// Compares `dir/before` with `dir/after` by path identity (no rename detection).
pub fn load_fixture(dir: &Path) -> Result<CommitSnapshot, IngestError> {
    for sub in ["before", "after"] {
        if !dir.join(sub).is_dir() {
            return Err(IngestError::MalformedFixture {
                path: dir.to_path_buf(),
                reason: format!("missing {sub}/ directory"),
            });
        }
    }
    let (commit, message) = fixture_commit(dir)?;
    let mut before = read_tree(&dir.join("before"))?;
    let mut after = read_tree(&dir.join("after"))?;
    let mut paths: Vec<String> = before.keys().chain(after.keys()).cloned().collect();
    paths.sort();
    paths.dedup();

    let mut files = Vec::new();
    for path in paths {
        let b = before.remove(&path);
        let a = after.remove(&path);
        let change = match (b, a) {
            (Some(b), Some(a)) if b == a => continue,
            (Some(b), Some(a)) => make_change(ChangeKind::Modified, Some(path.clone()), Some(path), Some(b), Some(a)),
            (Some(b), None) => make_change(ChangeKind::Removed, Some(path), None, Some(b), None),
            (None, Some(a)) => make_change(ChangeKind::Added, None, Some(path), None, Some(a)),
            (None, None) => unreachable!("path came from one of the trees"),
        };
        files.push(change);
    }
    Ok(CommitSnapshot { commit, message, files })
}
