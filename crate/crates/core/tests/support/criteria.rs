//! One function per acceptance criterion. Each returns a one-line summary on
//! success and a description of the first discrepancy on failure.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;
use std::sync::Arc;
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
use refann_core::annotate::new_annotation;
use refann_core::storage::to_canonical_string;
use refann_core::{
    agreement_rate, annotation_time, compute_diff, load_fixture, predefined_types, AnnotationSession, CommitRef,
    CommitSource, ElementIndex, ElementType, ManualClock, ParameterSchema, Point, Position, RefactoringTypeDefinition,
    RevisionSide, Selection, Status, Store, TextRange, TypeRegistry, Workbench,
};

use super::cases::{self, reference_oracle};
use super::corpus::{self, expected_of, token_ranges};
use super::fragment::{expected_fragment, method_spans, MethodSpan, Offsets};
use super::{apply, commit_fixture_dirs, fixtures_dir};

pub type Outcome = Result<String, String>;

pub const INDEX_TIME_LIMIT: Duration = Duration::from_secs(5);
pub const GATE_TIME_LIMIT: Duration = Duration::from_secs(30);
pub const GATE_CASES: u32 = 1200;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

// ---------------------------------------------------------------------------

pub fn type_schema_fidelity() -> Outcome {
    let types = predefined_types();
    let names: Vec<&str> = types.iter().map(|t| t.name.as_str()).collect();
    ensure!(names == ["ExtractMethod", "MoveClass", "MoveField", "RenameVariable"], "predefined types are {names:?}");

    let params = |name: &str, side: RevisionSide| -> Vec<(String, ElementType)> {
        let t = types.iter().find(|t| t.name == name).unwrap();
        t.side(side).iter().map(|p| (p.name.clone(), p.element_type)).collect()
    };
    let p = |n: &str, t: ElementType| (n.to_string(), t);
    use ElementType::*;
    ensure!(
        params("ExtractMethod", RevisionSide::Before) == [p("extracted code", CodeFragment)],
        "ExtractMethod before parameters differ"
    );
    ensure!(
        params("ExtractMethod", RevisionSide::After)
            == [p("extracted method", MethodDeclaration), p("invocation", MethodInvocation)],
        "ExtractMethod after parameters differ"
    );
    for side in RevisionSide::BOTH {
        ensure!(
            params("MoveField", side) == [p("moved field", FieldDeclaration), p("references", Identifier)],
            "MoveField {side} parameters differ"
        );
    }

    let rendered: String = types.iter().map(|t| t.to_json() + "\n").collect();
    let snapshot_path = fixtures_dir().join("snapshots/predefined_types.json");
    if std::env::var_os("REFANN_UPDATE_SNAPSHOTS").is_some() {
        fs::write(&snapshot_path, &rendered).map_err(|e| e.to_string())?;
    }
    let expected = fs::read_to_string(&snapshot_path).map_err(|e| format!("{}: {e}", snapshot_path.display()))?;
    ensure!(rendered == expected, "predefined types differ from the snapshot:\n{rendered}");
    Ok(format!("{} types match the snapshot", types.len()))
}

// ---------------------------------------------------------------------------

fn set_of<'a>(elements: impl IntoIterator<Item = &'a refann_core::CodeElement>) -> BTreeSet<(TextRange, String)> {
    elements.into_iter().map(|e| (e.range.clone(), e.name.clone().unwrap_or_default())).collect()
}

pub fn index_equivalence() -> Outcome {
    let started = Instant::now();
    let files = corpus::load();
    ensure!(files.len() >= 10, "corpus has only {} files", files.len());
    for f in &files {
        let lines = f.text.lines().count();
        ensure!(lines <= 100, "{} has {lines} lines", f.path);
    }
    let snapshot = corpus::snapshot(&files);
    let index = ElementIndex::build(&snapshot, RevisionSide::After);
    ensure!(index.unindexed().is_empty(), "unindexed files: {:?}", index.unindexed());

    let mut compared = 0usize;
    let mut all_tokens: BTreeMap<String, BTreeSet<TextRange>> = BTreeMap::new();
    for f in &files {
        for t in ElementType::CONCRETE.into_iter().filter(|t| *t != ElementType::Identifier) {
            let got = set_of(index.elements_of_type(t, Some(&f.path)).unwrap());
            let want = expected_of(f, t);
            if got != want {
                let missing: Vec<_> = want.difference(&got).collect();
                let extra: Vec<_> = got.difference(&want).collect();
                return Err(format!("{} {t}: missing {missing:?}, unexpected {extra:?}", f.path));
            }
            compared += want.len();
        }
        let tokens: BTreeSet<(TextRange, String)> = token_ranges(f).into_iter().collect();
        let got = set_of(index.elements_of_type(ElementType::Identifier, Some(&f.path)).unwrap());
        if got != tokens {
            let missing: Vec<_> = tokens.difference(&got).collect();
            let extra: Vec<_> = got.difference(&tokens).collect();
            return Err(format!("{} identifiers: missing {missing:?}, unexpected {extra:?}", f.path));
        }
        compared += tokens.len();
        for (r, name) in tokens {
            all_tokens.entry(name).or_default().insert(r);
        }
    }

    for (name, want) in &all_tokens {
        let got: BTreeSet<TextRange> = index.identifiers_named(name, None).into_iter().map(|e| e.range.clone()).collect();
        ensure!(&got == want, "identifiers_named({name:?}) differs from the token scan");
    }
    // Scoped queries: every name inside every hand-enumerated method.
    let mut scoped = 0usize;
    for f in &files {
        for (_, _, method) in f.expected.iter().filter(|e| e.0 == ElementType::MethodDeclaration) {
            for (name, ranges) in &all_tokens {
                let want: BTreeSet<TextRange> = ranges.iter().filter(|r| method.contains(r)).cloned().collect();
                let got: BTreeSet<TextRange> =
                    index.identifiers_named(name, Some(method)).into_iter().map(|e| e.range.clone()).collect();
                ensure!(got == want, "identifiers_named({name:?}, {method}) differs from the token scan");
                scoped += 1;
            }
        }
    }
    let elapsed = started.elapsed();
    ensure!(elapsed < INDEX_TIME_LIMIT, "took {elapsed:?}");
    Ok(format!(
        "{} files, {compared} elements, {} names, {scoped} scoped queries, {elapsed:.2?}",
        files.len(),
        all_tokens.len()
    ))
}

// ---------------------------------------------------------------------------

pub fn autofill_equivalence() -> Outcome {
    let registry = TypeRegistry::with_predefined();
    let all = cases::load_all();
    ensure!(all.len() >= 6, "only {} autofill cases", all.len());
    let mut kinds = BTreeSet::new();
    let mut derived = 0usize;
    for case in &all {
        let label = case.dir.file_name().unwrap().to_string_lossy().into_owned();
        let snapshot = Arc::new(load_fixture(&case.dir).map_err(|e| format!("{label}: {e}"))?);
        let def = registry.lookup_type(&case.type_name).map_err(|e| e.to_string())?.clone();
        let annotation = new_annotation(snapshot.commit.clone(), Some(&def), "oracle");
        let clock = Arc::new(ManualClock::new(0));
        let mut session = AnnotationSession::open(annotation, snapshot.clone(), def.clone(), clock)
            .map_err(|e| format!("{label}: {e}"))?;
        for s in &case.selects {
            session
                .set_parameter(s.side, &s.parameter, &Selection::Point(s.point.clone()))
                .map_err(|e| format!("{label}: selecting {}: {e}", s.parameter))?;
        }
        for target in &case.targets {
            let rule = def.parameter(target.side, &target.parameter).and_then(|p| p.autofill.clone()).unwrap();
            let source = def.autofill_source(target.side, &rule).unwrap();
            let bound = session.annotation().parameters.ranges(source.side, &source.name).to_vec();
            ensure!(
                bound == [target.declaration.clone()],
                "{label}: {} resolved to {bound:?}, not the declaration {}",
                source.name,
                target.declaration
            );

            let want = reference_oracle(&snapshot, target);
            ensure!(
                want.len() == target.expected_count,
                "{label}: oracle found {} occurrences, case expects {}",
                want.len(),
                target.expected_count
            );
            let report = session.autofill(target.side, &target.parameter).map_err(|e| format!("{label}: {e}"))?;
            let first = session.annotation().parameters.ranges(target.side, &target.parameter).to_vec();
            let got: BTreeSet<TextRange> = first.iter().cloned().collect();
            ensure!(
                got == want,
                "{label} {}/{}: autofill {got:?} != oracle {want:?}",
                target.side,
                target.parameter
            );
            ensure!(report.derived.len() == first.len(), "{label}: report and value disagree");

            let events = session.annotation().events.len();
            session.autofill(target.side, &target.parameter).map_err(|e| format!("{label}: {e}"))?;
            let second = session.annotation().parameters.ranges(target.side, &target.parameter).to_vec();
            ensure!(first == second, "{label}: autofill is not idempotent");
            ensure!(session.annotation().events.len() == events + 1, "{label}: autofill must log one event");
            derived += want.len();
        }
        kinds.insert(case.type_name.clone());
    }
    ensure!(kinds.len() == 3, "cases cover only {kinds:?}");
    Ok(format!("{} cases over {} types, {derived} derived references", all.len(), kinds.len()))
}

// ---------------------------------------------------------------------------

struct GateFile {
    path: String,
    offsets: Offsets,
    spans: Vec<MethodSpan>,
    exact: BTreeMap<ElementType, Vec<TextRange>>,
}

#[derive(Default)]
struct GateTally {
    total: usize,
    exact: usize,
    accepted: usize,
    false_accepts: Vec<String>,
    false_rejects: Vec<String>,
}

fn gate_files() -> Vec<GateFile> {
    corpus::load()
        .into_iter()
        .map(|f| {
            let offsets = Offsets::new(&f.text);
            let mut exact: BTreeMap<ElementType, Vec<TextRange>> = BTreeMap::new();
            for (t, _, r) in &f.expected {
                exact.entry(*t).or_default().push(r.clone());
            }
            exact.insert(ElementType::Identifier, token_ranges(&f).into_iter().map(|(r, _)| r).collect());
            let methods = exact.get(&ElementType::MethodDeclaration).cloned().unwrap_or_default();
            let spans = method_spans(&offsets, &methods);
            GateFile { path: f.path.clone(), offsets, spans, exact }
        })
        .collect()
}

fn pos(f: &GateFile, offset: usize) -> Position {
    f.offsets.position(offset)
}

/// A fragment with one end inside a method nested in another method's body
/// and the other end elsewhere in that body.
fn nested_cut(files: &[GateFile], r: [u32; 4]) -> Option<(usize, TextRange, bool)> {
    let mut pairs = Vec::new();
    for (fi, f) in files.iter().enumerate() {
        for outer in &f.spans {
            let Some((a, b)) = outer.interior else { continue };
            for inner in f.spans.iter().filter(|m| a <= m.start && m.end <= b) {
                pairs.push((fi, (a, b), (inner.start, inner.end)));
            }
        }
    }
    let &(fi, (a, b), (ms, me)) = pairs.get(r[0] as usize % pairs.len().max(1))?;
    let f = &files[fi];
    let inside = ms + 1 + r[1] as usize % (me - ms - 1);
    let outside_before = ms > a;
    let (s, e) = if r[3].is_multiple_of(2) && outside_before {
        (a + r[2] as usize % (ms - a), inside)
    } else {
        (inside, me + r[2] as usize % (b - me + 1))
    };
    let (s, e) = if s < e { (s, e) } else { return None };
    TextRange::new(&f.path, pos(f, s), pos(f, e)).ok().map(|r| (fi, r, false))
}

/// Builds a candidate range: mode 0-1 exact, 2 perturbed (or a nested-method
/// cut for fragments), 3 random.
fn gate_range(files: &[GateFile], fi: usize, t: ElementType, mode: u8, r: [u32; 4]) -> Option<(usize, TextRange, bool)> {
    if t == ElementType::CodeFragment && mode == 2 && r[3] % 4 < 2 {
        return nested_cut(files, r);
    }
    let exact_in = |fi: usize| -> Option<TextRange> {
        let f = &files[fi];
        if t == ElementType::CodeFragment {
            let bodies: Vec<(usize, usize)> = f.spans.iter().filter_map(|s| s.interior).filter(|(a, b)| b > a).collect();
            let (a, b) = *bodies.get(r[0] as usize % bodies.len().max(1))?;
            let s = a + r[1] as usize % (b - a);
            let e = s + 1 + r[2] as usize % (b - s);
            return TextRange::new(&f.path, pos(f, s), pos(f, e)).ok();
        }
        let list = f.exact.get(&t)?;
        list.get(r[0] as usize % list.len().max(1)).cloned()
    };
    let (fi, exact) = match exact_in(fi) {
        Some(x) => (fi, x),
        None => {
            let other = (0..files.len()).map(|k| (fi + k) % files.len()).find(|&k| exact_in(k).is_some())?;
            (other, exact_in(other)?)
        }
    };
    let f = &files[fi];
    match mode {
        0 | 1 => Some((fi, exact, true)),
        2 => {
            let delta: i64 = if r[3].is_multiple_of(2) { 1 } else { -1 };
            let bump = |p: Position| -> Option<Position> {
                if (r[3] / 2).is_multiple_of(2) {
                    Some(Position::new(p.line, u32::try_from(p.column as i64 + delta).ok().filter(|c| *c > 0)?))
                } else {
                    Some(Position::new(u32::try_from(p.line as i64 + delta).ok().filter(|l| *l > 0)?, p.column))
                }
            };
            let (s, e) = if (r[3] / 4).is_multiple_of(2) {
                (bump(exact.start())?, exact.end())
            } else {
                (exact.start(), bump(exact.end())?)
            };
            TextRange::new(&f.path, s, e).ok().map(|r| (fi, r, false))
        }
        _ => {
            let lines = f.offsets.line_count() as u32;
            let rand_pos = |a: u32, b: u32| {
                let line = 1 + a % lines;
                let len = f.offsets.line_len(line as usize).unwrap() as u32;
                Position::new(line, 1 + b % (len + 2))
            };
            let (p, q) = (rand_pos(r[0], r[1]), rand_pos(r[2], r[3]));
            let (s, e) = if p <= q { (p, q) } else { (q, p) };
            TextRange::new(&f.path, s, e).ok().map(|r| (fi, r, false))
        }
    }
}

fn gate_expected(f: &GateFile, t: ElementType, range: &TextRange) -> Option<TextRange> {
    if t == ElementType::CodeFragment {
        return expected_fragment(&f.offsets, &f.spans, range);
    }
    f.exact.get(&t).is_some_and(|list| list.contains(range)).then(|| range.clone())
}

pub fn validation_gate(cases: u32) -> Outcome {
    let started = Instant::now();
    let files = gate_files();
    let corpus_files = corpus::load();
    let snapshot = Arc::new(corpus::snapshot(&corpus_files));
    let params: Vec<ParameterSchema> =
        ElementType::ALL.iter().map(|t| ParameterSchema::new(t.as_str(), RevisionSide::After, *t)).collect();
    let def = RefactoringTypeDefinition::new("GateCheck", vec![], params);
    let annotation = new_annotation(snapshot.commit.clone(), Some(&def), "gate");
    let session = RefCell::new(
        AnnotationSession::open(annotation, snapshot, def, Arc::new(ManualClock::new(0))).map_err(|e| e.to_string())?,
    );
    let tally = RefCell::new(GateTally::default());

    let config = Config { cases, failure_persistence: None, ..Config::default() };
    let mut runner = TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    let strategy = (0..files.len(), 0..ElementType::ALL.len(), 0u8..4, any::<[u32; 4]>());
    let result = runner.run(&strategy, |(fi, ti, mode, r)| {
        let t = ElementType::ALL[ti];
        let Some((fi, range, exact)) = gate_range(&files, fi, t, mode, r) else { return Ok(()) };
        let expected = gate_expected(&files[fi], t, &range);
        let mut session = session.borrow_mut();
        let actual = session
            .set_parameter(RevisionSide::After, t.as_str(), &Selection::Range(range.clone()))
            .ok()
            .map(|a| a.parameters.ranges(RevisionSide::After, t.as_str())[0].clone());
        let mut tally = tally.borrow_mut();
        tally.total += 1;
        tally.exact += exact as usize;
        tally.accepted += actual.is_some() as usize;
        match (&expected, &actual) {
            (None, Some(got)) => tally.false_accepts.push(format!("{t} {range} stored as {got}")),
            (Some(want), None) => tally.false_rejects.push(format!("{t} {range} (expected {want})")),
            (Some(want), Some(got)) if want != got => {
                tally.false_accepts.push(format!("{t} {range} stored as {got}, expected {want}"))
            }
            _ => {}
        }
        Ok(())
    });
    result.map_err(|e| e.to_string())?;
    let elapsed = started.elapsed();
    let t = tally.into_inner();
    ensure!(
        t.false_accepts.is_empty() && t.false_rejects.is_empty(),
        "{} false accepts {:?}, {} false rejects {:?}",
        t.false_accepts.len(),
        t.false_accepts.iter().take(5).collect::<Vec<_>>(),
        t.false_rejects.len(),
        t.false_rejects.iter().take(5).collect::<Vec<_>>()
    );
    ensure!(t.total >= 1000, "only {} cases ran", t.total);
    ensure!(elapsed < GATE_TIME_LIMIT, "took {elapsed:?}");
    Ok(format!(
        "{} cases ({} exact, {} accepted), 0 false accepts, 0 false rejects, {elapsed:.2?}",
        t.total, t.exact, t.accepted
    ))
}

// ---------------------------------------------------------------------------

pub fn diff_round_trip() -> Outcome {
    let mut changes = 0usize;
    for dir in commit_fixture_dirs() {
        let snapshot = load_fixture(&dir).map_err(|e| e.to_string())?;
        for change in &snapshot.files {
            let before = change.content_before.as_deref().unwrap_or("");
            let after = change.content_after.as_deref().unwrap_or("");
            for context in [0, 3, 10] {
                let diff = compute_diff(change, context).map_err(|e| e.to_string())?;
                let rebuilt = apply::apply(before, &diff).map_err(|e| format!("{}: {e}", change.display_path()))?;
                ensure!(rebuilt.as_bytes() == after.as_bytes(), "{} context {context}: apply differs", change.display_path());
            }
            changes += 1;
        }
    }
    ensure!(changes > 0, "no fixture changes found");
    Ok(format!("{changes} file changes reproduced byte-exactly at context 0, 3 and 10"))
}

// ---------------------------------------------------------------------------

pub fn workbench_at(root: &Path, clock: Arc<ManualClock>) -> Workbench {
    let store = Store::open(root).expect("store opens");
    let mut wb = Workbench::with_clock(store, clock);
    wb.set_source(CommitSource {
        repo: None,
        fixtures: vec![fixtures_dir().join("autofill"), fixtures_dir().join("commits")],
    });
    wb
}

/// ExtractMethod selections on the extract_total fixture.
pub fn extract_method_selections() -> Vec<(RevisionSide, &'static str, Selection)> {
    let fragment = TextRange::new("Invoice.java", Position::new(13, 1), Position::new(16, 10)).unwrap();
    vec![
        (RevisionSide::Before, "extracted code", Selection::Range(fragment)),
        (RevisionSide::After, "extracted method", Selection::Point(Point::new("Invoice.java", 17, 12))),
        (RevisionSide::After, "invocation", Selection::Point(Point::new("Invoice.java", 13, 25))),
    ]
}

/// Populates a store with annotations from hints, every autofill case and
/// the ExtractMethod fixture, across several annotators and statuses.
pub fn populate(wb: &Workbench) -> Result<usize, String> {
    let e = |e: refann_core::Error| e.to_string();
    let hints = fs::read_to_string(fixtures_dir().join("hints/toyshop.json")).unwrap();
    let mut count = 0;
    for annotator in ["alice", "bob"] {
        count += wb.import_hints(&hints, annotator).map_err(e)?.created.len();
    }
    for (i, case) in cases::load_all().iter().enumerate() {
        let (commit, _) = refann_core::ingest::fixture_commit(&case.dir).map_err(|e| e.to_string())?;
        let annotator = if i % 2 == 0 { "carol" } else { "dave" };
        let a = wb.create_annotation(&commit, Some(&case.type_name), annotator, Some(&case.description)).map_err(e)?;
        for s in &case.selects {
            wb.set_parameter(&a.id, None, s.side, &s.parameter, &Selection::Point(s.point.clone())).map_err(e)?;
        }
        for t in &case.targets {
            wb.autofill(&a.id, None, t.side, &t.parameter).map_err(e)?;
        }
        let status = if i == 5 { Status::Rejected } else { Status::Verified };
        wb.set_status(&a.id, None, status).map_err(e)?;
        count += 1;
    }
    let commit = CommitRef::new("toyshop", "d4e0001");
    let a = wb.create_annotation(&commit, Some("ExtractMethod"), "carol", None).map_err(e)?;
    for (side, name, sel) in extract_method_selections() {
        wb.set_parameter(&a.id, None, side, name, &sel).map_err(e)?;
    }
    wb.set_status(&a.id, None, Status::Verified).map_err(e)?;
    Ok(count + 1)
}

pub fn dataset_round_trip() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let first = workbench_at(&tmp.path().join("a"), Arc::new(ManualClock::new(1_000)));
    let created = populate(&first)?;
    ensure!(created >= 10, "only {created} annotations");
    let exported = first.export_dataset(None).map_err(|e| e.to_string())?.to_canonical_json();

    let second = workbench_at(&tmp.path().join("b"), Arc::new(ManualClock::new(1_000)));
    let imported = second.import_dataset(&exported).map_err(|e| e.to_string())?;
    ensure!(imported.len() == created, "imported {} of {created}", imported.len());
    let again = second.export_dataset(None).map_err(|e| e.to_string())?.to_canonical_json();
    ensure!(exported == again, "second export differs from the first");

    let reparsed = refann_core::DatasetFile::parse(&exported).map_err(|e| e.to_string())?;
    ensure!(reparsed.to_canonical_json() == exported, "canonical form is not a fixed point");
    let verified = first.export_dataset(Some(Status::Verified)).map_err(|e| e.to_string())?;
    Ok(format!(
        "{created} annotations ({} Verified), {} bytes identical across export/import/export",
        verified.annotations.len(),
        exported.len()
    ))
}

// ---------------------------------------------------------------------------

pub fn metrics_correctness() -> Outcome {
    let e = |e: refann_core::AnnotateError| e.to_string();
    let dir = fixtures_dir().join("autofill/move_field_counter");
    let snapshot = Arc::new(load_fixture(&dir).map_err(|e| e.to_string())?);
    let def = TypeRegistry::with_predefined().lookup_type("MoveField").unwrap().clone();
    let clock = Arc::new(ManualClock::new(0));
    let open = |who: &str| {
        let a = new_annotation(snapshot.commit.clone(), Some(&def), who);
        AnnotationSession::open(a, snapshot.clone(), def.clone(), clock.clone()).unwrap()
    };
    let field_before = Selection::Point(Point::new("Shop.java", 2, 9));
    let field_after = Selection::Point(Point::new("Stats.java", 2, 9));
    use RevisionSide::{After, Before};

    // u: both fields, both reference sets autofilled.
    let mut u = open("u");
    for (ts, step) in [(1_000, 0), (2_000, 1), (3_000, 2), (4_000, 3)] {
        clock.set(ts);
        match step {
            0 => u.set_parameter(Before, "moved field", &field_before).map(|_| ()).map_err(e)?,
            1 => u.set_parameter(After, "moved field", &field_after).map(|_| ()).map_err(e)?,
            2 => u.autofill(Before, "references").map(|_| ()).map_err(e)?,
            _ => u.autofill(After, "references").map(|_| ()).map_err(e)?,
        }
    }
    // v: the same, then drops one after-side reference and rejects.
    let mut v = open("v");
    clock.set(1_000);
    v.set_parameter(Before, "moved field", &field_before).map_err(e)?;
    clock.set(5_000);
    v.set_parameter(After, "moved field", &field_after).map_err(e)?;
    clock.set(30_000);
    v.autofill(Before, "references").map_err(e)?;
    clock.set(40_000);
    v.autofill(After, "references").map_err(e)?;
    clock.set(69_000);
    let dropped = v.annotation().parameters.ranges(After, "references")[0].clone();
    v.clear_parameter(After, "references", Some(&dropped)).map_err(e)?;
    clock.set(90_000);
    v.set_status(Status::Rejected).map_err(e)?;
    // w: like u but keeps only one before-side reference.
    let mut w = open("w");
    w.set_parameter(Before, "moved field", &field_before).map_err(e)?;
    w.set_parameter(After, "moved field", &field_after).map_err(e)?;
    w.autofill(Before, "references").map_err(e)?;
    w.autofill(After, "references").map_err(e)?;
    for _ in 0..2 {
        let r = w.annotation().parameters.ranges(Before, "references")[0].clone();
        w.clear_parameter(Before, "references", Some(&r)).map_err(e)?;
    }

    let (u, v, w) = (u.into_annotation(), v.into_annotation(), w.into_annotation());
    let pair = agreement_rate(&[u.clone(), v.clone()]).map_err(|e| e.to_string())?;
    // Four parameters; only after/references differs.
    ensure!(pair.overall == 0.75, "u/v agreement {} != 0.75", pair.overall);
    let triple = agreement_rate(&[u.clone(), v.clone(), w]).map_err(|e| e.to_string())?;
    // Pairs: u-v 3/4, u-w 3/4, v-w 2/4.
    ensure!(triple.overall == 2.0 / 3.0, "three-way agreement {} != 2/3", triple.overall);
    ensure!(
        agreement_rate(std::slice::from_ref(&u)).is_err(),
        "a single annotator must be rejected"
    );

    // First parameter event at 1 000 ms, last at 69 000 ms; the status change is ignored.
    ensure!(annotation_time(&v) == Some(68_000), "annotation_time(v) = {:?}", annotation_time(&v));
    ensure!(annotation_time(&u) == Some(3_000), "annotation_time(u) = {:?}", annotation_time(&u));
    let report_json = to_canonical_string(&pair).map_err(|e| e.to_string())?;
    ensure!(report_json.contains("\"overall\": 0.75"), "report JSON lacks the overall rate");
    Ok("0.75 for 3 of 4 matched, 2/3 over three annotators, 68000 ms annotation time".into())
}
