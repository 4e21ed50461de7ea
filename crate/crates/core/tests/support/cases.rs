//! Autofill cases: a commit fixture plus `case.json` describing the
//! selections to make and, per autofill target, the hand-determined
//! declaration range, optional method scope (by line span) and count.

use std::collections::BTreeSet;
use std::fs;
use std::path::PathBuf;

use refann_core::{CommitSnapshot, Point, Position, RevisionSide, TextRange};
use serde_json::Value;

use super::tokens::identifier_tokens;

pub struct Select {
    pub side: RevisionSide,
    pub parameter: String,
    pub point: Point,
}

pub struct Scope {
    pub path: String,
    pub from_line: u32,
    pub to_line: u32,
}

pub struct Target {
    pub side: RevisionSide,
    pub parameter: String,
    pub name: String,
    pub declaration: TextRange,
    pub scope: Option<Scope>,
    pub expected_count: usize,
}

pub struct Case {
    pub dir: PathBuf,
    pub description: String,
    pub type_name: String,
    pub selects: Vec<Select>,
    pub targets: Vec<Target>,
}

fn side(v: &Value) -> RevisionSide {
    v.as_str().unwrap().parse().unwrap()
}

pub fn load_all() -> Vec<Case> {
    let root = super::fixtures_dir().join("autofill");
    let mut dirs: Vec<PathBuf> = fs::read_dir(&root).unwrap().map(|e| e.unwrap().path()).filter(|p| p.is_dir()).collect();
    dirs.sort();
    dirs.into_iter()
        .map(|dir| {
            let v: Value = serde_json::from_str(&fs::read_to_string(dir.join("case.json")).unwrap()).unwrap();
            let selects = v["select"]
                .as_array()
                .unwrap()
                .iter()
                .map(|s| Select {
                    side: side(&s["side"]),
                    parameter: s["parameter"].as_str().unwrap().to_string(),
                    point: serde_json::from_value(s["point"].clone()).unwrap(),
                })
                .collect();
            let targets = v["autofill"]
                .as_array()
                .unwrap()
                .iter()
                .map(|t| Target {
                    side: side(&t["side"]),
                    parameter: t["parameter"].as_str().unwrap().to_string(),
                    name: t["name"].as_str().unwrap().to_string(),
                    declaration: serde_json::from_value(t["declaration"].clone()).unwrap(),
                    scope: t.get("scope").map(|s| Scope {
                        path: s["path"].as_str().unwrap().to_string(),
                        from_line: s["fromLine"].as_u64().unwrap() as u32,
                        to_line: s["toLine"].as_u64().unwrap() as u32,
                    }),
                    expected_count: t["expectedCount"].as_u64().unwrap() as usize,
                })
                .collect();
            Case {
                dir,
                description: v["description"].as_str().unwrap().to_string(),
                type_name: v["type"].as_str().unwrap().to_string(),
                selects,
                targets,
            }
        })
        .collect()
}

/// Every identifier token spelled like the declaration on the target side,
/// limited to the scope lines, minus tokens inside the declaration itself.
pub fn reference_oracle(snapshot: &CommitSnapshot, target: &Target) -> BTreeSet<TextRange> {
    let mut out = BTreeSet::new();
    for (path, change) in snapshot.files_on(target.side) {
        if !path.ends_with(".java") {
            continue;
        }
        let Some(text) = change.content(target.side) else { continue };
        for tok in identifier_tokens(text).into_iter().filter(|t| t.name == target.name) {
            if let Some(scope) = &target.scope {
                if scope.path != path || tok.line < scope.from_line || tok.line > scope.to_line {
                    continue;
                }
            }
            let r = TextRange::new(path, Position::new(tok.line, tok.column), Position::new(tok.line, tok.end_column)).unwrap();
            if target.declaration.contains(&r) {
                continue;
            }
            out.insert(r);
        }
    }
    out
}
