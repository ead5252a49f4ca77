//! Deterministic in-process providers used for tests and offline runs.

mod annotator;
mod embedder;
mod lexicon;
mod nli;

pub use annotator::{annotate_text, first_sentence, ReferenceAnnotator};
pub use embedder::{reference_embedding, ReferenceEmbedder, REFERENCE_DIM};
pub use nli::{cue_hits, ReferenceNli, BASE_PROBABILITY, CUE_LEXICON, CUE_WEIGHT};

use super::{ProviderError, Summarizer};

/// Always declines, so clusters are summarized by their medoid.
#[derive(Clone, Copy, Debug, Default)]
pub struct ReferenceSummarizer;

impl Summarizer for ReferenceSummarizer {
    fn summarize(&self, _sentences: &[&str]) -> Result<Option<String>, ProviderError> {
        Ok(None)
    }
}
