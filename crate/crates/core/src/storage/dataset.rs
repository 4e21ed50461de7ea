//! The two JSON interchange files: hints coming in, curated datasets going out.

use serde::{Deserialize, Serialize};

use super::canonical::to_canonical_string;
use super::StoreError;
use crate::model::{Annotation, CommitRef, Parameters, Status};

/// Incomplete input about a possible refactoring.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HintRecord {
    pub commit: CommitRef,
    #[serde(rename = "type", default, skip_serializing_if = "Option::is_none")]
    pub type_name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prefill: Option<Parameters>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HintFile {
    pub hints: Vec<HintRecord>,
}

impl HintFile {
    pub fn parse(text: &str) -> Result<HintFile, StoreError> {
        let file: HintFile = serde_json::from_str(text).map_err(|e| StoreError::SchemaViolation(e.to_string()))?;
        file.check()?;
        Ok(file)
    }

    /// Rejects hints with neither type nor description, prefill without a
    /// type, or an empty sha.
    pub fn check(&self) -> Result<(), StoreError> {
        for (i, h) in self.hints.iter().enumerate() {
            if h.type_name.is_none() && h.description.is_none() {
                return Err(StoreError::SchemaViolation(format!("hint {i}: needs a type or a description")));
            }
            if h.type_name.is_none() && h.prefill.is_some() {
                return Err(StoreError::SchemaViolation(format!("hint {i}: prefill requires a type")));
            }
            if h.commit.sha.is_empty() {
                return Err(StoreError::SchemaViolation(format!("hint {i}: empty commit sha")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetRecord {
    pub commit: CommitRef,
    #[serde(rename = "type")]
    pub type_name: Option<String>,
    pub status: Status,
    pub annotator: String,
    pub parameters: Parameters,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetFile {
    pub annotations: Vec<DatasetRecord>,
}

impl DatasetFile {
    pub fn parse(text: &str) -> Result<DatasetFile, StoreError> {
        serde_json::from_str(text).map_err(|e| StoreError::SchemaViolation(e.to_string()))
    }

    /// Records of the annotations passing `status`, with ranges sorted and
    /// records ordered by commit sha, type, then annotator.
    pub fn from_annotations<'a>(annotations: impl IntoIterator<Item = &'a Annotation>, status: Option<Status>) -> Self {
        let mut keyed: Vec<((String, Option<String>, String, String, String), DatasetRecord)> = annotations
            .into_iter()
            .filter(|a| status.is_none_or(|s| a.status == s))
            .map(|a| {
                let mut parameters = a.parameters.clone();
                for side in crate::model::RevisionSide::BOTH {
                    for ranges in parameters.side_mut(side).values_mut() {
                        ranges.sort();
                    }
                }
                let record = DatasetRecord {
                    commit: a.commit.clone(),
                    type_name: a.type_name.clone(),
                    status: a.status,
                    annotator: a.annotator.clone(),
                    parameters,
                };
                let tiebreak = to_canonical_string(&record).unwrap_or_default();
                let key = (
                    a.commit.sha.clone(),
                    a.type_name.clone(),
                    a.annotator.clone(),
                    a.commit.repository.clone(),
                    tiebreak,
                );
                (key, record)
            })
            .collect();
        keyed.sort_by(|a, b| a.0.cmp(&b.0));
        DatasetFile { annotations: keyed.into_iter().map(|(_, r)| r).collect() }
    }

    pub fn to_canonical_json(&self) -> String {
        to_canonical_string(self).expect("dataset files always serialize")
    }
}
