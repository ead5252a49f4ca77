//! Corpus reading and sentence annotation.
//!
//! A corpus is a line-delimited JSON file (or a directory of such files).
//! Each line is one document in one of two shapes:
//!
//! ```text
//! {"id": "d1", "url": "https://example.org/a", "text": "Raw document text."}
//! {"id": "d2", "url": "https://example.org/b", "sentences": [SentenceAnnotation, ...]}
//! ```
//!
//! The second, pre-annotated shape bypasses the annotation provider. See
//! `docs/formats.md` for the token layout.

use std::cmp::Ordering;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::providers::{Annotator, ProviderError};
use crate::text::CharIndex;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read corpus {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Coarse universal part-of-speech tag set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Pos {
    Adj,
    Adp,
    Adv,
    Aux,
    Cconj,
    Det,
    Intj,
    Noun,
    Num,
    Part,
    Pron,
    Propn,
    Punct,
    Sconj,
    Sym,
    Verb,
    X,
}

impl Pos {
    pub fn is_nominal(self) -> bool {
        matches!(self, Pos::Noun | Pos::Propn)
    }

    pub fn is_verbal(self) -> bool {
        matches!(self, Pos::Verb | Pos::Aux)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Token {
    pub surface: String,
    pub lemma: String,
    pub pos: Pos,
    /// Fine-grained Penn Treebank tag (e.g. `VBD`), when the annotator has one.
    #[serde(default)]
    pub tag: Option<String>,
    #[serde(default)]
    pub ner: Option<String>,
    #[serde(default)]
    pub is_stop: bool,
    /// Char offsets `[start, end)` relative to the sentence text.
    pub char_span: [usize; 2],
}

impl Token {
    pub fn start(&self) -> usize {
        self.char_span[0]
    }

    pub fn end(&self) -> usize {
        self.char_span[1]
    }
}

/// One annotated sentence as produced by an annotation provider, before it
/// is bound to a document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SentenceAnnotation {
    pub text: String,
    pub tokens: Vec<Token>,
    /// Index of the dependency root token.
    #[serde(default)]
    pub root: Option<usize>,
}

impl SentenceAnnotation {
    /// Checks that tokens lie inside the text in increasing, non-overlapping
    /// order and that every surface equals the text at its span.
    pub fn validate(&self) -> Result<(), String> {
        let idx = CharIndex::new(&self.text);
        let mut prev_end = 0;
        for (i, t) in self.tokens.iter().enumerate() {
            let [s, e] = t.char_span;
            if s >= e || s < prev_end || e > idx.char_len() {
                return Err(format!("token {i} has invalid span [{s}, {e})"));
            }
            if idx.slice(&self.text, s, e) != Some(t.surface.as_str()) {
                return Err(format!("token {i} surface {:?} does not match text at span", t.surface));
            }
            prev_end = e;
        }
        if let Some(r) = self.root {
            if r >= self.tokens.len() {
                return Err(format!("root index {r} out of range"));
            }
        }
        Ok(())
    }
}

/// Sentence identifier of the form `<doc_id>:<index>`.
///
/// Ordered by document id, then numerically by sentence index, so that
/// `d:2` sorts before `d:10`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SentId(pub String);

impl SentId {
    pub fn new(doc_id: &str, index: usize) -> Self {
        SentId(format!("{doc_id}:{index}"))
    }

    fn parts(&self) -> (&str, Option<u64>) {
        match self.0.rsplit_once(':') {
            Some((doc, idx)) => match idx.parse() {
                Ok(n) => (doc, Some(n)),
                Err(_) => (&self.0, None),
            },
            None => (&self.0, None),
        }
    }

    pub fn doc_id(&self) -> &str {
        self.parts().0
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl Ord for SentId {
    fn cmp(&self, other: &Self) -> Ordering {
        let (da, ia) = self.parts();
        let (db, ib) = other.parts();
        da.cmp(db).then(ia.cmp(&ib)).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for SentId {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for SentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnotatedSentence {
    pub sent_id: SentId,
    pub text: String,
    pub tokens: Vec<Token>,
    pub root: Option<usize>,
    pub source_url: String,
    pub source_host: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Document {
    pub doc_id: String,
    pub url: String,
    pub text: String,
    /// Present for pre-annotated corpus records.
    pub annotations: Option<Vec<SentenceAnnotation>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRecord {
    id: String,
    url: String,
    #[serde(default)]
    text: Option<String>,
    #[serde(default)]
    sentences: Option<Vec<SentenceAnnotation>>,
}

fn parse_record(line: &str) -> Result<Document, String> {
    let rec: RawRecord = serde_json::from_str(line).map_err(|e| e.to_string())?;
    if rec.id.trim().is_empty() {
        return Err("empty document id".into());
    }
    match (rec.text, rec.sentences) {
        (Some(text), None) => Ok(Document { doc_id: rec.id, url: rec.url, text, annotations: None }),
        (None, Some(sentences)) => {
            for (i, s) in sentences.iter().enumerate() {
                s.validate().map_err(|e| format!("sentence {i}: {e}"))?;
            }
            let text = sentences.iter().map(|s| s.text.as_str()).collect::<Vec<_>>().join(" ");
            Ok(Document { doc_id: rec.id, url: rec.url, text, annotations: Some(sentences) })
        }
        (Some(_), Some(_)) => Err("record has both `text` and `sentences`".into()),
        (None, None) => Err("record has neither `text` nor `sentences`".into()),
    }
}

/// Streaming reader over one corpus file or a directory of corpus files.
///
/// Malformed lines are logged and counted, never fatal.
pub struct CorpusReader {
    files: std::vec::IntoIter<PathBuf>,
    current: Option<(PathBuf, std::io::Lines<BufReader<File>>, usize)>,
    skipped: usize,
}

impl CorpusReader {
    pub fn skipped(&self) -> usize {
        self.skipped
    }

    fn open_next(&mut self) -> Result<bool, IngestError> {
        match self.files.next() {
            None => Ok(false),
            Some(p) => {
                let f = File::open(&p).map_err(|source| IngestError::Io { path: p.clone(), source })?;
                self.current = Some((p, BufReader::new(f).lines(), 0));
                Ok(true)
            }
        }
    }
}

impl Iterator for CorpusReader {
    type Item = Result<Document, IngestError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            if self.current.is_none() {
                match self.open_next() {
                    Ok(true) => {}
                    Ok(false) => return None,
                    Err(e) => return Some(Err(e)),
                }
            }
            let (path, lines, lineno) = self.current.as_mut()?;
            match lines.next() {
                None => self.current = None,
                Some(Err(source)) => {
                    let path = path.clone();
                    self.current = None;
                    return Some(Err(IngestError::Io { path, source }));
                }
                Some(Ok(line)) => {
                    *lineno += 1;
                    if line.trim().is_empty() {
                        continue;
                    }
                    match parse_record(&line) {
                        Ok(doc) => return Some(Ok(doc)),
                        Err(e) => {
                            log::warn!("{}:{}: skipping malformed record: {e}", path.display(), lineno);
                            self.skipped += 1;
                        }
                    }
                }
            }
        }
    }
}

/// Opens a corpus file, or every regular non-hidden file of a directory in
/// name order.
pub fn read_corpus(path: impl AsRef<Path>) -> Result<CorpusReader, IngestError> {
    let path = path.as_ref();
    let io = |source| IngestError::Io { path: path.to_path_buf(), source };
    let meta = std::fs::metadata(path).map_err(io)?;
    let files = if meta.is_dir() {
        let mut files = Vec::new();
        for entry in std::fs::read_dir(path).map_err(io)? {
            let entry = entry.map_err(io)?;
            let hidden = entry.file_name().to_string_lossy().starts_with('.');
            if entry.file_type().map_err(io)?.is_file() && !hidden {
                files.push(entry.path());
            }
        }
        files.sort();
        files
    } else {
        // Fail early on unreadable files.
        File::open(path).map_err(io)?;
        vec![path.to_path_buf()]
    };
    Ok(CorpusReader { files: files.into_iter(), current: None, skipped: 0 })
}

/// Registrable (public-suffix aware) domain of a URL's host. Falls back to
/// the bare host for IPs and unknown suffixes, and to the empty string when
/// the URL has no host.
pub fn registrable_host(url: &str) -> String {
    let parsed = url::Url::parse(url).or_else(|_| url::Url::parse(&format!("http://{url}")));
    let host = match parsed.as_ref().ok().and_then(|u| u.host()) {
        Some(url::Host::Domain(d)) => d.trim_end_matches('.').to_lowercase(),
        Some(other) => return other.to_string(),
        None => return String::new(),
    };
    match psl::domain_str(&host) {
        Some(d) => d.to_string(),
        None => host,
    }
}

/// Splits a document into annotated sentences, in document order.
///
/// Pre-annotated documents use their embedded annotations; otherwise the
/// provider is called once for the whole text.
pub fn annotate(document: &Document, annotator: &dyn Annotator) -> Result<Vec<AnnotatedSentence>, ProviderError> {
    let sentences = match &document.annotations {
        Some(a) => a.clone(),
        None if document.text.trim().is_empty() => Vec::new(),
        None => annotator.annotate(&document.text)?,
    };
    let host = registrable_host(&document.url);
    Ok(bind_sentences(document, sentences, &host))
}

pub(crate) fn bind_sentences(
    document: &Document,
    sentences: Vec<SentenceAnnotation>,
    host: &str,
) -> Vec<AnnotatedSentence> {
    sentences
        .into_iter()
        .filter(|s| !s.tokens.is_empty())
        .enumerate()
        .map(|(i, s)| AnnotatedSentence {
            sent_id: SentId::new(&document.doc_id, i),
            text: s.text,
            tokens: s.tokens,
            root: s.root,
            source_url: document.url.clone(),
            source_host: host.to_string(),
        })
        .collect()
}
