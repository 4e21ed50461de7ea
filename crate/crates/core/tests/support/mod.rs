//! Test-only oracles and fixtures shared by the integration tests and the
//! acceptance runner. Nothing here calls the parser: expected values come
//! from hand-written manifests, a lexical token scan, or brace matching.
#![allow(dead_code)]

pub mod apply;
pub mod cases;
pub mod corpus;
pub mod criteria;
pub mod fragment;

use std::path::PathBuf;

pub fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

/// Every directory under the fixture tree that holds a `before/`/`after/` pair.
pub fn commit_fixture_dirs() -> Vec<PathBuf> {
    let mut out = Vec::new();
    for group in ["autofill", "commits"] {
        let mut dirs: Vec<PathBuf> = std::fs::read_dir(fixtures_dir().join(group))
            .expect("fixture group exists")
            .map(|e| e.unwrap().path())
            .filter(|p| p.join("before").is_dir())
            .collect();
        dirs.sort();
        out.extend(dirs);
    }
    out
}
