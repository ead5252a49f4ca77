//! Cluster summaries: the first sentence of a generated summary, or the
//! medoid member when generation is unavailable.

use log::warn;

use super::SummarySource;
use crate::ingest::Token;
use crate::providers::{Annotator, Summarizer};

#[derive(Clone, Debug, PartialEq)]
pub struct Summary {
    pub text: String,
    pub source: SummarySource,
    pub tokens: Vec<Token>,
}

/// Index of the member nearest the centroid (squared Euclidean); ties go
/// to the earliest member. `members` must be non-empty.
pub fn medoid(vectors: &[&[f64]]) -> usize {
    let dim = vectors[0].len();
    let mut centroid = vec![0.0; dim];
    for v in vectors {
        for (c, x) in centroid.iter_mut().zip(v.iter()) {
            *c += x;
        }
    }
    let n = vectors.len() as f64;
    centroid.iter_mut().for_each(|c| *c /= n);
    let mut best = (0, f64::INFINITY);
    for (i, v) in vectors.iter().enumerate() {
        let d: f64 = v.iter().zip(&centroid).map(|(x, c)| (x - c) * (x - c)).sum();
        if d < best.1 {
            best = (i, d);
        }
    }
    best.0
}

/// Member texts and tokens must be in member (sentence id) order.
pub fn summarize_cluster(
    texts: &[&str],
    tokens: &[&[Token]],
    vectors: &[&[f64]],
    summarizer: &dyn Summarizer,
    annotator: &dyn Annotator,
) -> Summary {
    match summarizer.summarize(texts) {
        Ok(Some(raw)) if !raw.trim().is_empty() => match annotator.annotate(raw.trim()) {
            Ok(sents) if !sents.is_empty() => {
                let first = sents.into_iter().next().expect("non-empty");
                return Summary { text: first.text.trim().to_string(), source: SummarySource::Generated, tokens: first.tokens };
            }
            Ok(_) => warn!("summary {raw:?} has no sentences; using medoid"),
            Err(e) => warn!("annotating summary failed: {e}; using medoid"),
        },
        Ok(_) => {}
        Err(e) => warn!("summarizer failed: {e}; using medoid"),
    }
    let m = medoid(vectors);
    Summary { text: texts[m].to_string(), source: SummarySource::Medoid, tokens: tokens[m].to_vec() }
}
