//! The final knowledge base: line-delimited records plus an in-memory index.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{FacetId, SubjectId};
use crate::checkpoint::write_atomic;
use crate::concepts::Concept;
use crate::ingest::SentId;
use crate::rank::FeatureScores;
use crate::text::normalize_phrase;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KbMember {
    pub sent_id: SentId,
    pub text: String,
    pub source_url: String,
    pub source_host: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KbRecord {
    pub cluster_id: String,
    pub subject: SubjectId,
    pub facet: FacetId,
    pub summary: String,
    pub concepts: Vec<Concept>,
    pub feature_scores: FeatureScores,
    pub members: Vec<KbMember>,
}

#[derive(Debug, Error)]
pub enum KbError {
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("{path} line {line}: {message}")]
    Parse { path: String, line: usize, message: String },
}

/// Storage order: subject, facet, combined score descending, cluster id.
pub fn storage_order(a: &KbRecord, b: &KbRecord) -> Ordering {
    a.subject
        .cmp(&b.subject)
        .then_with(|| a.facet.cmp(&b.facet))
        .then_with(|| b.feature_scores.combined.total_cmp(&a.feature_scores.combined))
        .then_with(|| a.cluster_id.cmp(&b.cluster_id))
}

pub fn encode_kb(records: &[KbRecord]) -> Vec<u8> {
    let mut sorted: Vec<&KbRecord> = records.iter().collect();
    sorted.sort_by(|a, b| storage_order(a, b));
    let mut out = Vec::new();
    for r in sorted {
        serde_json::to_writer(&mut out, r).expect("records serialize");
        out.push(b'\n');
    }
    out
}

/// Writes records in storage order and returns how many were written.
pub fn write_kb(records: &[KbRecord], path: impl AsRef<Path>) -> Result<usize, KbError> {
    let path = path.as_ref();
    write_atomic(path, &encode_kb(records)).map_err(|source| KbError::Io { path: path.display().to_string(), source })?;
    Ok(records.len())
}

pub fn read_kb(path: impl AsRef<Path>) -> Result<Vec<KbRecord>, KbError> {
    let path = path.as_ref();
    let p = path.display().to_string();
    let file = File::open(path).map_err(|source| KbError::Io { path: p.clone(), source })?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|source| KbError::Io { path: p.clone(), source })?;
        if line.trim().is_empty() {
            continue;
        }
        let r = serde_json::from_str(&line).map_err(|e| KbError::Parse { path: p.clone(), line: i + 1, message: e.to_string() })?;
        out.push(r);
    }
    Ok(out)
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct KbQuery {
    pub subject: Option<SubjectId>,
    pub facet: Option<FacetId>,
    pub concept: Option<String>,
    pub min_score: Option<f64>,
}

#[derive(Clone, Debug, Default)]
pub struct KbIndex {
    records: Vec<KbRecord>,
    by_subject: BTreeMap<SubjectId, Vec<usize>>,
    by_facet: BTreeMap<(SubjectId, FacetId), Vec<usize>>,
    by_concept: BTreeMap<String, Vec<usize>>,
}

impl KbIndex {
    pub fn new(records: Vec<KbRecord>) -> Self {
        let mut idx = KbIndex { records, ..Default::default() };
        for (i, r) in idx.records.iter().enumerate() {
            idx.by_subject.entry(r.subject.clone()).or_default().push(i);
            idx.by_facet.entry((r.subject.clone(), r.facet.clone())).or_default().push(i);
            for c in &r.concepts {
                let ids = idx.by_concept.entry(normalize_phrase(&c.phrase)).or_default();
                if ids.last() != Some(&i) {
                    ids.push(i);
                }
            }
        }
        idx
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, KbError> {
        Ok(Self::new(read_kb(path)?))
    }

    pub fn records(&self) -> &[KbRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Records matching every given filter, best combined score first.
    pub fn query(&self, q: &KbQuery) -> Vec<&KbRecord> {
        let candidates: Vec<usize> = match (&q.subject, &q.facet, &q.concept) {
            (Some(s), Some(f), _) => self.by_facet.get(&(s.clone(), f.clone())).cloned().unwrap_or_default(),
            (Some(s), None, _) => self.by_subject.get(s).cloned().unwrap_or_default(),
            (None, _, Some(c)) => self.by_concept.get(&normalize_phrase(c)).cloned().unwrap_or_default(),
            _ => (0..self.records.len()).collect(),
        };
        let concept = q.concept.as_deref().map(normalize_phrase);
        let mut out: Vec<&KbRecord> = candidates
            .into_iter()
            .map(|i| &self.records[i])
            .filter(|r| q.subject.as_ref().is_none_or(|s| &r.subject == s))
            .filter(|r| q.facet.as_ref().is_none_or(|f| &r.facet == f))
            .filter(|r| concept.as_ref().is_none_or(|c| r.concepts.iter().any(|x| &normalize_phrase(&x.phrase) == c)))
            .filter(|r| q.min_score.is_none_or(|m| r.feature_scores.combined >= m))
            .collect();
        out.sort_by(|a, b| {
            b.feature_scores.combined.total_cmp(&a.feature_scores.combined).then_with(|| a.cluster_id.cmp(&b.cluster_id))
        });
        out
    }
}
