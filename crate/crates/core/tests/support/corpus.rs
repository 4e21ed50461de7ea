//! The index corpus and its hand-written element manifests.

use std::collections::BTreeSet;
use std::fs;

use refann_core::{ChangeKind, CommitRef, CommitSnapshot, ElementType, FileChange, Position, TextRange};

use super::fixtures_dir;

pub struct CorpusFile {
    pub path: String,
    pub text: String,
    /// (type, name, range) for every non-identifier element.
    pub expected: Vec<(ElementType, String, TextRange)>,
}

fn char_col(line: &str, byte: usize) -> u32 {
    line[..byte].chars().count() as u32 + 1
}

fn parse_manifest(path: &str, text: &str, manifest: &str) -> Vec<(ElementType, String, TextRange)> {
    let lines: Vec<&str> = text.split('\n').collect();
    let mut out = Vec::new();
    for (n, row) in manifest.lines().enumerate() {
        if row.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = row.split(" | ").collect();
        assert_eq!(f.len(), 6, "{path} manifest line {}: {row}", n + 1);
        let t: ElementType = f[0].parse().unwrap();
        let (sl, el): (usize, usize) = (f[2].parse().unwrap(), f[4].parse().unwrap());
        let start_line = lines[sl - 1];
        let end_line = lines[el - 1];
        let sb = start_line.find(f[3]).unwrap_or_else(|| panic!("{path}:{sl}: no {:?}", f[3]));
        let eb = end_line.rfind(f[5]).unwrap_or_else(|| panic!("{path}:{el}: no {:?}", f[5])) + f[5].len();
        let range = TextRange::new(
            path,
            Position::new(sl as u32, char_col(start_line, sb)),
            Position::new(el as u32, char_col(end_line, eb)),
        )
        .unwrap();
        out.push((t, f[1].to_string(), range));
    }
    out
}

pub fn load() -> Vec<CorpusFile> {
    let dir = fixtures_dir().join("index-corpus");
    let mut names: Vec<String> = fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".java"))
        .collect();
    names.sort();
    names
        .into_iter()
        .map(|path| {
            let text = fs::read_to_string(dir.join(&path)).unwrap();
            let manifest = fs::read_to_string(dir.join(path.replace(".java", ".elements"))).unwrap();
            let expected = parse_manifest(&path, &text, &manifest);
            CorpusFile { path, text, expected }
        })
        .collect()
}

/// All corpus files as additions in one commit, so they live on the after side.
pub fn snapshot(files: &[CorpusFile]) -> CommitSnapshot {
    CommitSnapshot {
        commit: CommitRef::new("corpus", "0000000"),
        message: String::new(),
        files: files
            .iter()
            .map(|f| FileChange {
                kind: ChangeKind::Added,
                path_before: None,
                path_after: Some(f.path.clone()),
                content_before: None,
                content_after: Some(f.text.clone()),
                binary: false,
            })
            .collect(),
    }
}

pub fn expected_of(file: &CorpusFile, t: ElementType) -> BTreeSet<(TextRange, String)> {
    file.expected.iter().filter(|e| e.0 == t).map(|e| (e.2.clone(), e.1.clone())).collect()
}

/// Identifier ranges from the token scan.
pub fn token_ranges(file: &CorpusFile) -> Vec<(TextRange, String)> {
    super::tokens::identifier_tokens(&file.text)
        .into_iter()
        .map(|t| {
            let r = TextRange::new(&file.path, Position::new(t.line, t.column), Position::new(t.line, t.end_column));
            (r.unwrap(), t.name)
        })
        .collect()
}
