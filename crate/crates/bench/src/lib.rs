//! Inputs shared by the benchmarks: the fixture corpus and synthetic Java
//! files of adjustable size.

use std::fmt::Write;
use std::fs;
use std::path::PathBuf;

use refann_core::{ChangeKind, CommitRef, CommitSnapshot, FileChange};

pub fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn added(path: String, text: String) -> FileChange {
    FileChange {
        kind: ChangeKind::Added,
        path_before: None,
        path_after: Some(path),
        content_before: None,
        content_after: Some(text),
        binary: false,
    }
}

/// Every Java file of the index corpus, added in one commit.
pub fn corpus_snapshot() -> CommitSnapshot {
    let mut files: Vec<FileChange> = fs::read_dir(fixtures_dir().join("index-corpus"))
        .expect("corpus directory exists")
        .map(|e| e.expect("readable entry").path())
        .filter(|p| p.extension().is_some_and(|x| x == "java"))
        .map(|p| {
            let name = p.file_name().unwrap().to_string_lossy().into_owned();
            added(name, fs::read_to_string(&p).expect("readable corpus file"))
        })
        .collect();
    files.sort_by(|a, b| a.path_after.cmp(&b.path_after));
    CommitSnapshot { commit: CommitRef::new("bench", "corpus"), message: String::new(), files }
}

/// A class with `methods` small methods that all touch one field.
pub fn synthetic_class(name: &str, methods: usize) -> String {
    let mut s = format!("public class {name} {{\n    private int counter;\n\n");
    for i in 0..methods {
        writeln!(s, "    int step{i}(int x) {{").unwrap();
        writeln!(s, "        int local = x * {i};").unwrap();
        writeln!(s, "        counter += local;").unwrap();
        writeln!(s, "        return helper(counter, local);").unwrap();
        writeln!(s, "    }}\n").unwrap();
    }
    s.push_str("    int helper(int a, int b) {\n        return a + b;\n    }\n}\n");
    s
}

/// One synthetic file modified by renaming the field in every other method.
pub fn synthetic_snapshot(methods: usize) -> CommitSnapshot {
    let before = synthetic_class("Big", methods);
    let after = before
        .split_inclusive('\n')
        .enumerate()
        .map(|(i, line)| if i % 10 == 0 { line.replace("counter", "total") } else { line.to_string() })
        .collect();
    let change = FileChange {
        kind: ChangeKind::Modified,
        path_before: Some("Big.java".into()),
        path_after: Some("Big.java".into()),
        content_before: Some(before),
        content_after: Some(after),
        binary: false,
    };
    CommitSnapshot { commit: CommitRef::new("bench", "synthetic"), message: String::new(), files: vec![change] }
}
