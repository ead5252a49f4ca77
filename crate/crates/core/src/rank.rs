//! Cluster scoring and post-filtering.
//!
//! Four features are combined by their arithmetic mean:
//!
//! * frequency: min-max normalized cluster size within the pair;
//! * distinctiveness: min-max normalized `ln IDF`, where
//!   `IDF(c) = Σ size / Σ size · σ(c, c')` over every cluster of the same
//!   facet and domain, and `σ = 1` when the cosine of the two masked
//!   summary embeddings reaches `theta`;
//! * specificity: share of nouns among the summary's non-punctuation tokens;
//! * domain relevance: mean facet probability of the members.
//!
//! A degenerate min-max (max = min) yields 1.0 for every cluster.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use regex::{Regex, RegexBuilder};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::detect::AliasIndex;
use crate::ingest::{Pos, Token};
use crate::kbstore::KbRecord;
use crate::text::CharIndex;

pub const DEFAULT_MASK_TOKEN: &str = "[MASK]";

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureScores {
    pub frequency: f64,
    pub distinctiveness: f64,
    pub specificity: f64,
    pub domain_relevance: f64,
    pub combined: f64,
}

impl FeatureScores {
    pub fn new(frequency: f64, distinctiveness: f64, specificity: f64, domain_relevance: f64) -> Self {
        let combined = combined_score([frequency, distinctiveness, specificity, domain_relevance]);
        FeatureScores { frequency, distinctiveness, specificity, domain_relevance, combined }
    }

    pub fn features(&self) -> [f64; 4] {
        [self.frequency, self.distinctiveness, self.specificity, self.domain_relevance]
    }
}

pub fn combined_score(features: [f64; 4]) -> f64 {
    features.iter().sum::<f64>() / 4.0
}

/// `(x - min) / (max - min)`, or 1.0 everywhere when max = min.
pub fn min_max(values: &[f64]) -> Vec<f64> {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max <= min {
        return vec![1.0; values.len()];
    }
    values.iter().map(|v| ((v - min) / (max - min)).clamp(0.0, 1.0)).collect()
}

pub fn frequency_scores(sizes: &[usize]) -> Vec<f64> {
    let v: Vec<f64> = sizes.iter().map(|&s| s as f64).collect();
    min_max(&v)
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    dot / (na * nb)
}

/// Raw IDF values; `sizes` and `embeddings` are parallel.
pub fn idf_values(sizes: &[usize], embeddings: &[Vec<f64>], theta: f64) -> Vec<f64> {
    let total: f64 = sizes.iter().map(|&s| s as f64).sum();
    (0..sizes.len())
        .map(|i| {
            let similar: f64 = (0..sizes.len())
                .filter(|&j| j == i || cosine(&embeddings[i], &embeddings[j]) >= theta)
                .map(|j| sizes[j] as f64)
                .sum();
            total / similar
        })
        .collect()
}

pub fn distinctiveness_scores(sizes: &[usize], embeddings: &[Vec<f64>], theta: f64) -> Vec<f64> {
    let logs: Vec<f64> = idf_values(sizes, embeddings, theta).iter().map(|v| v.ln()).collect();
    min_max(&logs)
}

/// Replaces every catalog alias in `text` with `mask`.
pub fn mask_subjects(text: &str, tokens: &[Token], index: &AliasIndex, mask: &str) -> String {
    let ci = CharIndex::new(text);
    let mut out = String::with_capacity(text.len());
    let mut pos = 0;
    for span in index.resolve(text, tokens) {
        let (s, e) = (tokens[span.start].start(), tokens[span.end - 1].end());
        out.push_str(ci.slice(text, pos, s).unwrap_or_default());
        out.push_str(mask);
        pos = e;
    }
    out.push_str(ci.slice(text, pos, ci.char_len()).unwrap_or_default());
    out
}

pub fn specificity(tokens: &[Token]) -> f64 {
    let words = tokens.iter().filter(|t| t.pos != Pos::Punct).count();
    if words == 0 {
        return 0.0;
    }
    tokens.iter().filter(|t| t.pos.is_nominal()).count() as f64 / words as f64
}

pub fn domain_relevance(member_probs: &[f64]) -> f64 {
    if member_probs.is_empty() {
        return 0.0;
    }
    member_probs.iter().sum::<f64>() / member_probs.len() as f64
}

#[derive(Debug, Error)]
pub enum PatternError {
    #[error("cannot read pattern file {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("pattern file line {line}: {message}")]
    Invalid { line: usize, message: String },
}

/// Case-insensitive regular expressions flagging unwanted clusters.
#[derive(Clone, Debug, Default)]
pub struct BadPatterns {
    patterns: Vec<Regex>,
}

impl BadPatterns {
    /// One pattern per line; blank lines and `#` comments are ignored.
    pub fn parse(src: &str) -> Result<Self, PatternError> {
        let mut patterns = Vec::new();
        for (i, line) in src.lines().enumerate() {
            let p = line.trim();
            if p.is_empty() || p.starts_with('#') {
                continue;
            }
            let re = RegexBuilder::new(p)
                .case_insensitive(true)
                .build()
                .map_err(|e| PatternError::Invalid { line: i + 1, message: e.to_string() })?;
            patterns.push(re);
        }
        Ok(BadPatterns { patterns })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, PatternError> {
        let path = path.as_ref();
        let src = fs::read_to_string(path).map_err(|source| PatternError::Io { path: path.display().to_string(), source })?;
        Self::parse(&src)
    }

    pub fn is_match(&self, text: &str) -> bool {
        self.patterns.iter().any(|p| p.is_match(text))
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }
}

fn default_max_clusters() -> usize {
    500
}
fn default_identical_fraction() -> f64 {
    2.0 / 3.0
}
fn default_min_hosts() -> usize {
    2
}
fn default_bad_member_fraction() -> f64 {
    0.5
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PostFilterParams {
    #[serde(default = "default_max_clusters")]
    pub max_clusters_per_pair: usize,
    /// Drop when the most repeated member text exceeds this share.
    #[serde(default = "default_identical_fraction")]
    pub identical_fraction: f64,
    #[serde(default = "default_min_hosts")]
    pub min_source_hosts: usize,
    /// Drop when at least this share of members match a bad pattern.
    #[serde(default = "default_bad_member_fraction")]
    pub bad_member_fraction: f64,
}

impl Default for PostFilterParams {
    fn default() -> Self {
        PostFilterParams {
            max_clusters_per_pair: default_max_clusters(),
            identical_fraction: default_identical_fraction(),
            min_source_hosts: default_min_hosts(),
            bad_member_fraction: default_bad_member_fraction(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PostFilterCounts {
    pub no_concepts: usize,
    pub repeated: usize,
    pub few_hosts: usize,
    pub bad_pattern: usize,
    pub over_cap: usize,
}

/// Why a record was dropped, if it was.
pub fn rejection(record: &KbRecord, patterns: &BadPatterns, params: &PostFilterParams) -> Option<&'static str> {
    let m = record.members.len();
    if record.concepts.is_empty() {
        return Some("no_concepts");
    }
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for mem in &record.members {
        *counts.entry(mem.text.as_str()).or_default() += 1;
    }
    let top = counts.values().copied().max().unwrap_or(0);
    if m > 0 && top as f64 / m as f64 > params.identical_fraction {
        return Some("repeated");
    }
    let mut hosts: Vec<&str> = record.members.iter().map(|x| x.source_host.as_str()).collect();
    hosts.sort_unstable();
    hosts.dedup();
    if hosts.len() < params.min_source_hosts {
        return Some("few_hosts");
    }
    let bad = record.members.iter().filter(|x| patterns.is_match(&x.text)).count();
    if patterns.is_match(&record.summary) || (m > 0 && bad as f64 / m as f64 >= params.bad_member_fraction) {
        return Some("bad_pattern");
    }
    None
}

/// Filters one pair's records and keeps the best `max_clusters_per_pair`
/// by combined score (ties by smaller cluster id), in that order.
pub fn post_filter(records: Vec<KbRecord>, patterns: &BadPatterns, params: &PostFilterParams) -> (Vec<KbRecord>, PostFilterCounts) {
    let mut counts = PostFilterCounts::default();
    let mut kept: Vec<KbRecord> = records
        .into_iter()
        .filter(|r| match rejection(r, patterns, params) {
            None => true,
            Some(reason) => {
                match reason {
                    "no_concepts" => counts.no_concepts += 1,
                    "repeated" => counts.repeated += 1,
                    "few_hosts" => counts.few_hosts += 1,
                    _ => counts.bad_pattern += 1,
                }
                false
            }
        })
        .collect();
    kept.sort_by(|a, b| {
        b.feature_scores.combined.total_cmp(&a.feature_scores.combined).then_with(|| a.cluster_id.cmp(&b.cluster_id))
    });
    counts.over_cap = kept.len().saturating_sub(params.max_clusters_per_pair);
    kept.truncate(params.max_clusters_per_pair);
    (kept, counts)
}
