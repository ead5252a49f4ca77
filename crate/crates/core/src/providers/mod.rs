//! Model provider interfaces and their implementations.
//!
//! The pipeline talks to four capabilities through separate traits:
//! sentence annotation, sentence embedding, NLI entailment and cluster
//! summarization. [`reference`] holds deterministic in-process versions;
//! [`remote`] speaks the HTTP wire protocol described in [`wire`].

use std::sync::Arc;

use thiserror::Error;

use crate::ingest::SentenceAnnotation;

pub mod reference;
pub mod remote;
pub mod wire;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProviderError {
    #[error("{endpoint}: request {request_id} timed out")]
    Timeout { endpoint: String, request_id: String },
    #[error("{endpoint}: request {request_id} transport failure: {message}")]
    Transport { endpoint: String, request_id: String, message: String },
    #[error("{endpoint}: request {request_id} returned HTTP {code}: {body}")]
    Status { endpoint: String, request_id: String, code: u16, body: String },
    #[error("{endpoint}: request {request_id} schema mismatch: {message}")]
    SchemaMismatch { endpoint: String, request_id: String, message: String },
}

impl ProviderError {
    pub fn request_id(&self) -> &str {
        match self {
            ProviderError::Timeout { request_id, .. }
            | ProviderError::Transport { request_id, .. }
            | ProviderError::Status { request_id, .. }
            | ProviderError::SchemaMismatch { request_id, .. } => request_id,
        }
    }

    /// Failures worth retrying: network trouble and 5xx responses.
    pub fn is_transient(&self) -> bool {
        match self {
            ProviderError::Timeout { .. } | ProviderError::Transport { .. } => true,
            // 501 means the capability is disabled, which will not change.
            ProviderError::Status { code, .. } => *code >= 500 && *code != 501,
            ProviderError::SchemaMismatch { .. } => false,
        }
    }

    pub(crate) fn local(endpoint: &str, message: impl Into<String>) -> Self {
        ProviderError::SchemaMismatch {
            endpoint: endpoint.to_string(),
            request_id: "local".to_string(),
            message: message.into(),
        }
    }
}

/// Segments text into sentences and annotates their tokens.
pub trait Annotator: Send + Sync {
    fn annotate(&self, text: &str) -> Result<Vec<SentenceAnnotation>, ProviderError>;

    /// One result per input text, in order.
    fn annotate_batch(&self, texts: &[&str]) -> Result<Vec<Vec<SentenceAnnotation>>, ProviderError> {
        texts.iter().map(|t| self.annotate(t)).collect()
    }

    fn health(&self) -> Result<(), ProviderError> {
        Ok(())
    }
}

/// Maps texts to fixed-dimension vectors, one per input, in order.
pub trait Embedder: Send + Sync {
    fn embed(&self, texts: &[&str]) -> Result<Vec<Vec<f64>>, ProviderError>;

    fn health(&self) -> Result<(), ProviderError> {
        Ok(())
    }
}

/// Entailment probability of `premise` for each hypothesis, in order.
pub trait NliModel: Send + Sync {
    fn entail(&self, premise: &str, hypotheses: &[String]) -> Result<Vec<f64>, ProviderError>;

    fn health(&self) -> Result<(), ProviderError> {
        Ok(())
    }
}

/// Writes a summary for a group of sentences. `Ok(None)` means the
/// provider declines and the caller should fall back to the medoid.
pub trait Summarizer: Send + Sync {
    fn summarize(&self, sentences: &[&str]) -> Result<Option<String>, ProviderError>;

    fn health(&self) -> Result<(), ProviderError> {
        Ok(())
    }
}

#[derive(Clone)]
pub struct ProviderSet {
    pub annotator: Arc<dyn Annotator>,
    pub embedder: Arc<dyn Embedder>,
    pub nli: Arc<dyn NliModel>,
    pub summarizer: Arc<dyn Summarizer>,
}

impl ProviderSet {
    /// All four reference providers; `template` is the hypothesis template
    /// used to recover labels in the reference NLI scorer.
    pub fn reference(template: &str) -> Self {
        ProviderSet {
            annotator: Arc::new(reference::ReferenceAnnotator::new()),
            embedder: Arc::new(reference::ReferenceEmbedder),
            nli: Arc::new(reference::ReferenceNli::new(template)),
            summarizer: Arc::new(reference::ReferenceSummarizer),
        }
    }
}

/// Interface checks every provider implementation must pass.
pub mod contract {
    use super::*;

    pub const NORM_TOLERANCE: f64 = 1e-6;

    pub fn check_embedder(e: &dyn Embedder, texts: &[&str]) -> Result<(), String> {
        let vs = e.embed(texts).map_err(|e| e.to_string())?;
        if vs.len() != texts.len() {
            return Err(format!("{} vectors for {} texts", vs.len(), texts.len()));
        }
        let dim = vs.first().map(Vec::len);
        for (t, v) in texts.iter().zip(&vs) {
            if Some(v.len()) != dim || v.is_empty() {
                return Err(format!("non-uniform dimension for {t:?}"));
            }
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if (n - 1.0).abs() > NORM_TOLERANCE {
                return Err(format!("norm {n} for {t:?}"));
            }
        }
        let again = e.embed(texts).map_err(|e| e.to_string())?;
        if again != vs {
            return Err("embeddings are not deterministic".into());
        }
        Ok(())
    }

    pub fn check_nli(n: &dyn NliModel, premise: &str, hypotheses: &[String]) -> Result<(), String> {
        let ps = n.entail(premise, hypotheses).map_err(|e| e.to_string())?;
        if ps.len() != hypotheses.len() {
            return Err(format!("{} probabilities for {} hypotheses", ps.len(), hypotheses.len()));
        }
        if let Some(p) = ps.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(format!("probability {p} outside [0,1]"));
        }
        let selfp = n.entail(premise, &[premise.to_string()]).map_err(|e| e.to_string())?;
        if selfp.first().copied().unwrap_or(0.0) < 0.5 {
            return Err(format!("self-entailment {selfp:?} below 0.5"));
        }
        Ok(())
    }

    pub fn check_annotator(a: &dyn Annotator, texts: &[&str]) -> Result<(), String> {
        let rs = a.annotate_batch(texts).map_err(|e| e.to_string())?;
        if rs.len() != texts.len() {
            return Err(format!("{} results for {} texts", rs.len(), texts.len()));
        }
        for (t, sents) in texts.iter().zip(&rs) {
            if t.trim().is_empty() != sents.is_empty() {
                return Err(format!("sentence count {} for {t:?}", sents.len()));
            }
            for s in sents {
                s.validate().map_err(|m| format!("{t:?}: {m}"))?;
            }
        }
        Ok(())
    }

    pub fn check_all(p: &ProviderSet) -> Result<(), String> {
        let texts = ["Beer is a drink.", "Fried rice is a popular Chinese dish.", "aaa", "zzz"];
        check_embedder(p.embedder.as_ref(), &texts)?;
        let hyps: Vec<String> = ["drinks", "food", "politics"].iter().map(|l| format!("This text is about {l}")).collect();
        check_nli(p.nli.as_ref(), "Beer is a drink.", &hyps)?;
        check_annotator(p.annotator.as_ref(), &["Lawyers wear suits. They look professional.", ""])?;
        if let Some(s) = p.summarizer.summarize(&texts[..2]).map_err(|e| e.to_string())? {
            if s.trim().is_empty() {
                return Err("empty summary".into());
            }
        }
        Ok(())
    }
}
