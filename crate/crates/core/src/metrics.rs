//! Inter-annotator agreement and annotation time.
//!
//! Two annotators agree on a parameter when the sets of ranges they bound to
//! it are identical; both leaving a parameter empty counts as agreement. An
//! instance (commit and refactoring type) annotated by more than two people
//! is scored as the mean over all unordered annotator pairs, and the overall
//! rate is the mean over instances.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::model::{Annotation, CommitRef, RevisionSide, TextRange};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("agreement needs at least two annotators on at least one shared instance")]
    InsufficientAnnotators,
}

/// Exact set equality of two parameter values.
pub fn parameter_match(a: &[TextRange], b: &[TextRange]) -> bool {
    a.iter().collect::<BTreeSet<_>>() == b.iter().collect::<BTreeSet<_>>()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParameterMatch {
    pub side: RevisionSide,
    pub name: String,
    pub matched: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairAgreement {
    pub annotators: [String; 2],
    pub matched: usize,
    pub compared: usize,
    pub rate: f64,
    pub parameters: Vec<ParameterMatch>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InstanceAgreement {
    pub commit: CommitRef,
    #[serde(rename = "type")]
    pub type_name: String,
    pub rate: f64,
    pub pairs: Vec<PairAgreement>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct AgreementReport {
    pub overall: f64,
    pub per_type: BTreeMap<String, f64>,
    pub instances: Vec<InstanceAgreement>,
}

fn mean(values: impl IntoIterator<Item = f64>) -> f64 {
    let (sum, n) = values.into_iter().fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    sum / n as f64
}

fn compare(a: &Annotation, b: &Annotation) -> PairAgreement {
    let keys: BTreeSet<(RevisionSide, &str)> =
        a.parameters.iter().chain(b.parameters.iter()).map(|(side, name, _)| (side, name)).collect();
    let parameters: Vec<ParameterMatch> = keys
        .into_iter()
        .map(|(side, name)| ParameterMatch {
            side,
            name: name.to_string(),
            matched: parameter_match(a.parameters.ranges(side, name), b.parameters.ranges(side, name)),
        })
        .collect();
    let matched = parameters.iter().filter(|p| p.matched).count();
    let compared = parameters.len();
    let rate = if compared == 0 { 1.0 } else { matched as f64 / compared as f64 };
    PairAgreement { annotators: [a.annotator.clone(), b.annotator.clone()], matched, compared, rate, parameters }
}

/// Agreement over every instance with two or more annotators. Untyped
/// annotations are ignored; when one annotator has several annotations of
/// an instance, the highest version is used.
pub fn agreement_rate(annotations: &[Annotation]) -> Result<AgreementReport, MetricsError> {
    let mut instances: BTreeMap<(CommitRef, String), BTreeMap<String, &Annotation>> = BTreeMap::new();
    for a in annotations {
        let Some(type_name) = &a.type_name else { continue };
        let slot = instances.entry((a.commit.clone(), type_name.clone())).or_default();
        match slot.get(&a.annotator) {
            Some(prev) if (prev.version, &prev.id) >= (a.version, &a.id) => {}
            _ => {
                slot.insert(a.annotator.clone(), a);
            }
        }
    }

    let mut out = Vec::new();
    for ((commit, type_name), by_annotator) in instances {
        let people: Vec<&Annotation> = by_annotator.into_values().collect();
        if people.len() < 2 {
            continue;
        }
        let mut pairs = Vec::new();
        for i in 0..people.len() {
            for j in i + 1..people.len() {
                pairs.push(compare(people[i], people[j]));
            }
        }
        let rate = mean(pairs.iter().map(|p| p.rate));
        out.push(InstanceAgreement { commit, type_name, rate, pairs });
    }
    if out.is_empty() {
        return Err(MetricsError::InsufficientAnnotators);
    }

    let mut by_type: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for inst in &out {
        by_type.entry(inst.type_name.clone()).or_default().push(inst.rate);
    }
    let per_type = by_type.into_iter().map(|(k, v)| (k, mean(v))).collect();
    let overall = mean(out.iter().map(|i| i.rate));
    Ok(AgreementReport { overall, per_type, instances: out })
}

/// Milliseconds between the first and last parameter event, ignoring status
/// and type changes. `None` when no parameter was ever touched.
pub fn annotation_time(annotation: &Annotation) -> Option<i64> {
    let mut stamps = annotation.events.iter().filter(|e| e.kind.touches_parameter()).map(|e| e.timestamp);
    let first = stamps.next()?;
    let last = stamps.next_back().unwrap_or(first);
    Some(last - first)
}
