//! Groups near-duplicate assertions of one (subject, facet) pair and
//! summarizes each sizeable group with a single sentence.

use std::collections::BTreeMap;

use log::info;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{FacetId, SubjectId};
use crate::ingest::{SentId, Token};
use crate::providers::{Embedder, ProviderError};

pub mod hac;
pub mod summarize;

pub use hac::{hac_cluster, DEFAULT_DISTANCE_THRESHOLD};
pub use summarize::{medoid, summarize_cluster, Summary};

pub const NORM_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClusterError {
    #[error("vector {index} has dimension {found}, expected {expected}")]
    DimensionMismatch { index: usize, expected: usize, found: usize },
    #[error("vector for {0} has zero or non-finite norm")]
    DegenerateVector(String),
    #[error(transparent)]
    Provider(#[from] ProviderError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum SummarySource {
    Generated,
    Medoid,
    None,
}

fn default_pair_cap() -> usize {
    50_000
}
fn default_min_summary_size() -> usize {
    3
}
fn default_max_summarized() -> usize {
    500
}
fn default_threshold() -> f64 {
    DEFAULT_DISTANCE_THRESHOLD
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterParams {
    #[serde(default = "default_threshold")]
    pub distance_threshold: f64,
    #[serde(default = "default_pair_cap")]
    pub pair_cap: usize,
    #[serde(default = "default_min_summary_size")]
    pub min_summary_size: usize,
    #[serde(default = "default_max_summarized")]
    pub max_summarized_clusters: usize,
}

impl Default for ClusterParams {
    fn default() -> Self {
        ClusterParams {
            distance_threshold: default_threshold(),
            pair_cap: default_pair_cap(),
            min_summary_size: default_min_summary_size(),
            max_summarized_clusters: default_max_summarized(),
        }
    }
}

/// One clustered group of assertions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssertionCluster {
    pub cluster_id: String,
    pub subject: SubjectId,
    pub facet: FacetId,
    pub members: Vec<SentId>,
    pub summary: Option<String>,
    pub summary_source: SummarySource,
    /// Annotation of `summary`; empty when there is none.
    #[serde(default)]
    pub summary_tokens: Vec<Token>,
}

pub fn cluster_id(subject: &SubjectId, facet: &FacetId, label: usize) -> String {
    format!("{subject}:{facet}:{label:05}")
}

/// Scales `v` to unit length.
pub fn normalize(v: &mut [f64]) -> bool {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n == 0.0 || !n.is_finite() {
        return false;
    }
    v.iter_mut().for_each(|x| *x /= n);
    true
}

/// Unit-length embedding for every sentence, keyed by id.
pub fn embed_assertions(
    sentences: &[(SentId, &str)],
    embedder: &dyn Embedder,
) -> Result<BTreeMap<SentId, Vec<f64>>, ClusterError> {
    if sentences.is_empty() {
        return Ok(BTreeMap::new());
    }
    let texts: Vec<&str> = sentences.iter().map(|(_, t)| *t).collect();
    let vectors = embedder.embed(&texts)?;
    if vectors.len() != texts.len() {
        return Err(ProviderError::local("embed", format!("{} vectors for {} texts", vectors.len(), texts.len())).into());
    }
    hac::check_dims(&vectors)?;
    let mut out = BTreeMap::new();
    for ((id, _), mut v) in sentences.iter().zip(vectors) {
        if !normalize(&mut v) {
            return Err(ClusterError::DegenerateVector(id.to_string()));
        }
        out.insert(id.clone(), v);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Truncated<T> {
    pub kept: Vec<T>,
    pub dropped: usize,
}

impl<T> Truncated<T> {
    pub fn truncated(&self) -> bool {
        self.dropped > 0
    }
}

/// Keeps the `cap` items with the smallest sentence ids, in id order.
pub fn truncate_pair<T>(mut items: Vec<T>, cap: usize, id: impl Fn(&T) -> &SentId) -> Truncated<T> {
    items.sort_by(|a, b| id(a).cmp(id(b)));
    let dropped = items.len().saturating_sub(cap);
    items.truncate(cap);
    if dropped > 0 {
        info!("truncated pair input: kept {cap}, dropped {dropped}");
    }
    Truncated { kept: items, dropped }
}

/// Member indices per label, in label order.
pub fn groups(labels: &[usize]) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = Vec::new();
    for (i, &l) in labels.iter().enumerate() {
        if l >= out.len() {
            out.resize_with(l + 1, Vec::new);
        }
        out[l].push(i);
    }
    out
}

/// Labels of the clusters to summarize: size at least `min_size`, the
/// `max_count` largest, ties by smaller label.
pub fn summary_candidates(groups: &[Vec<usize>], min_size: usize, max_count: usize) -> Vec<usize> {
    let mut labels: Vec<usize> = (0..groups.len()).filter(|&l| groups[l].len() >= min_size).collect();
    labels.sort_by(|&a, &b| groups[b].len().cmp(&groups[a].len()).then(a.cmp(&b)));
    labels.truncate(max_count);
    labels.sort_unstable();
    labels
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::providers::reference::ReferenceEmbedder;

    #[test]
    fn truncation() {
        let ids: Vec<SentId> = (0..5).rev().map(|i| SentId::new("d", i)).collect();
        let t = truncate_pair(ids.clone(), 3, |s| s);
        assert_eq!(t.kept, vec![SentId::new("d", 0), SentId::new("d", 1), SentId::new("d", 2)]);
        assert_eq!(t.dropped, 2);
        let t = truncate_pair(ids, 10, |s| s);
        assert_eq!((t.kept.len(), t.truncated()), (5, false));
        let big: Vec<SentId> = (0..50_001).map(|i| SentId::new("d", i)).collect();
        let t = truncate_pair(big, 50_000, |s| s);
        assert_eq!((t.kept.len(), t.dropped), (50_000, 1));
    }

    #[test]
    fn embeddings_are_unit_norm() {
        let s = [(SentId::new("d", 0), "Beer is a drink."), (SentId::new("d", 1), "Beer is a drink.")];
        let m = embed_assertions(&s, &ReferenceEmbedder).unwrap();
        for v in m.values() {
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((n - 1.0).abs() <= NORM_TOLERANCE);
        }
        assert_eq!(m[&s[0].0], m[&s[1].0]);
        assert!(embed_assertions(&[], &ReferenceEmbedder).unwrap().is_empty());
    }

    #[test]
    fn candidates_by_size() {
        let g = vec![vec![0, 1, 2], vec![3], vec![4, 5, 6, 7], vec![8, 9, 10]];
        assert_eq!(summary_candidates(&g, 3, 500), vec![0, 2, 3]);
        assert_eq!(summary_candidates(&g, 3, 2), vec![0, 2]);
    }

    #[test]
    fn ids() {
        assert_eq!(cluster_id(&"japan".into(), &"food".into(), 7), "japan:food:00007");
    }
}
