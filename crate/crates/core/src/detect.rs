//! Finds sentences that mention catalog subjects.
//!
//! Matching is exact-phrase over token boundaries on case-folded,
//! whitespace-collapsed text. A match is reported as [`MatchMethod::NerTag`]
//! when the span is exactly an NER entity whose tag the subject's domain
//! accepts, and as [`MatchMethod::AliasMatch`] otherwise; either way the
//! surface must be one of the subject's aliases.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catalog::{DomainId, SubjectCatalog, SubjectId};
use crate::ingest::{AnnotatedSentence, SentId, Token};
use crate::text::{normalize_phrase, CharIndex};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum MatchMethod {
    #[serde(rename = "NER_TAG")]
    NerTag,
    #[serde(rename = "ALIAS_MATCH")]
    AliasMatch,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubjectMatch {
    pub sentence: SentId,
    pub subject: SubjectId,
    pub method: MatchMethod,
    pub char_span: [usize; 2],
    pub matched_surface: String,
}

/// A token range `[start, end)` whose text equals an alias of `subjects`.
#[derive(Clone, Debug, PartialEq)]
pub struct AliasSpan {
    pub start: usize,
    pub end: usize,
    pub subjects: Vec<SubjectId>,
}

/// Normalized alias → subjects lookup built from a catalog.
#[derive(Clone, Debug, Default)]
pub struct AliasIndex {
    aliases: HashMap<String, Vec<SubjectId>>,
    domains: HashMap<SubjectId, DomainId>,
    ner_tags: HashMap<DomainId, Vec<String>>,
    max_len: usize,
}

impl AliasIndex {
    pub fn new(catalog: &SubjectCatalog) -> Self {
        let mut idx = AliasIndex::default();
        for s in catalog.subjects() {
            idx.domains.insert(s.id.clone(), s.domain.clone());
            for a in &s.aliases {
                let norm = normalize_phrase(a);
                idx.max_len = idx.max_len.max(norm.chars().count());
                let entry = idx.aliases.entry(norm).or_default();
                if !entry.contains(&s.id) {
                    entry.push(s.id.clone());
                }
            }
        }
        for list in idx.aliases.values_mut() {
            list.sort();
        }
        for d in catalog.domains() {
            idx.ner_tags.insert(d.id.clone(), d.ner_tags.iter().cloned().collect());
        }
        idx
    }

    /// Every token range matching an alias, overlapping ranges included,
    /// ordered by (start, end).
    pub fn find_all(&self, text: &str, tokens: &[Token]) -> Vec<AliasSpan> {
        let ci = CharIndex::new(text);
        let mut out = Vec::new();
        for i in 0..tokens.len() {
            for j in i..tokens.len() {
                let Some(slice) = ci.slice(text, tokens[i].start(), tokens[j].end()) else { break };
                let norm = normalize_phrase(slice);
                if norm.chars().count() > self.max_len {
                    break;
                }
                if let Some(subjects) = self.aliases.get(&norm) {
                    out.push(AliasSpan { start: i, end: j + 1, subjects: subjects.clone() });
                }
            }
        }
        out
    }

    /// Longest-first, then leftmost, non-overlapping alias spans, returned
    /// in text order. Identical spans for different subjects are one entry.
    pub fn resolve(&self, text: &str, tokens: &[Token]) -> Vec<AliasSpan> {
        let mut all = self.find_all(text, tokens);
        all.sort_by(|a, b| (b.end - b.start).cmp(&(a.end - a.start)).then(a.start.cmp(&b.start)));
        let mut kept: Vec<AliasSpan> = Vec::new();
        for s in all {
            if kept.iter().all(|k| s.end <= k.start || s.start >= k.end) {
                kept.push(s);
            }
        }
        kept.sort_by_key(|s| s.start);
        kept
    }

    fn ner_method(&self, subject: &SubjectId, tokens: &[Token], start: usize, end: usize) -> MatchMethod {
        let Some(tag) = tokens[start].ner.as_deref() else { return MatchMethod::AliasMatch };
        let same = |t: &Token| t.ner.as_deref() == Some(tag);
        let exact = tokens[start..end].iter().all(same)
            && (start == 0 || !same(&tokens[start - 1]))
            && (end == tokens.len() || !same(&tokens[end]));
        let accepted = self
            .domains
            .get(subject)
            .and_then(|d| self.ner_tags.get(d))
            .is_some_and(|tags| tags.iter().any(|t| t == tag));
        if exact && accepted {
            MatchMethod::NerTag
        } else {
            MatchMethod::AliasMatch
        }
    }

    pub fn domain_of(&self, subject: &SubjectId) -> Option<&DomainId> {
        self.domains.get(subject)
    }
}

/// Subject mentions in one sentence, sorted by span start then subject id.
pub fn detect_subjects(sentence: &AnnotatedSentence, index: &AliasIndex) -> Vec<SubjectMatch> {
    let ci = CharIndex::new(&sentence.text);
    let mut out = Vec::new();
    for span in index.resolve(&sentence.text, &sentence.tokens) {
        let cs = [sentence.tokens[span.start].start(), sentence.tokens[span.end - 1].end()];
        let surface = ci.slice(&sentence.text, cs[0], cs[1]).unwrap_or_default().to_string();
        for subject in span.subjects {
            out.push(SubjectMatch {
                sentence: sentence.sent_id.clone(),
                method: index.ner_method(&subject, &sentence.tokens, span.start, span.end),
                subject,
                char_span: cs,
                matched_surface: surface.clone(),
            });
        }
    }
    out
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct DetectStats {
    pub input: usize,
    pub output: usize,
    pub matches_per_domain: BTreeMap<DomainId, usize>,
}

/// Keeps sentences with at least one match, in input order.
pub fn run_detect_stage(
    sentences: Vec<AnnotatedSentence>,
    index: &AliasIndex,
) -> (Vec<(AnnotatedSentence, Vec<SubjectMatch>)>, DetectStats) {
    let mut stats = DetectStats { input: sentences.len(), ..Default::default() };
    let out: Vec<_> = sentences
        .into_par_iter()
        .filter_map(|s| {
            let m = detect_subjects(&s, index);
            (!m.is_empty()).then_some((s, m))
        })
        .collect();
    for (_, ms) in &out {
        for m in ms {
            if let Some(d) = index.domain_of(&m.subject) {
                *stats.matches_per_domain.entry(d.clone()).or_default() += 1;
            }
        }
    }
    stats.output = out.len();
    (out, stats)
}
