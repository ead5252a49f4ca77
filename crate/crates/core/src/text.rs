//! Small text utilities shared by the stages: alias normalization,
//! the shipped stop word list, and char/byte offset conversion.

use std::collections::HashSet;
use std::sync::OnceLock;

const STOPWORDS_TXT: &str = include_str!("../data/stopwords.txt");

/// Case-folds and collapses internal whitespace runs to a single space.
///
/// This is the only normalization applied to aliases and to candidate
/// spans during matching; there is no stemming.
pub fn normalize_phrase(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for word in s.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        for c in word.chars() {
            out.extend(c.to_lowercase());
        }
    }
    out
}

/// The repo-shipped English stop word list.
pub fn stopwords() -> &'static HashSet<&'static str> {
    static SET: OnceLock<HashSet<&'static str>> = OnceLock::new();
    SET.get_or_init(|| {
        STOPWORDS_TXT
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .collect()
    })
}

pub fn is_stopword(word: &str) -> bool {
    stopwords().contains(word.to_lowercase().as_str())
}

/// Maps char offsets of `text` to byte offsets. Index `text.chars().count()`
/// maps to `text.len()`.
#[derive(Debug, Clone)]
pub struct CharIndex {
    // None when the text is ASCII and offsets coincide.
    bytes: Option<Vec<usize>>,
    len: usize,
}

impl CharIndex {
    pub fn new(text: &str) -> Self {
        if text.is_ascii() {
            return CharIndex { bytes: None, len: text.len() };
        }
        let mut bytes: Vec<usize> = text.char_indices().map(|(b, _)| b).collect();
        bytes.push(text.len());
        CharIndex { len: bytes.len() - 1, bytes: Some(bytes) }
    }

    /// Number of chars in the indexed text.
    pub fn char_len(&self) -> usize {
        self.len
    }

    pub fn byte(&self, char_offset: usize) -> Option<usize> {
        match &self.bytes {
            None => (char_offset <= self.len).then_some(char_offset),
            Some(b) => b.get(char_offset).copied(),
        }
    }

    pub fn slice<'a>(&self, text: &'a str, start: usize, end: usize) -> Option<&'a str> {
        let (s, e) = (self.byte(start)?, self.byte(end)?);
        text.get(s..e)
    }

    pub fn char_offset(&self, byte_offset: usize) -> usize {
        match &self.bytes {
            None => byte_offset,
            Some(b) => b.partition_point(|&x| x < byte_offset),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization_folds_case_and_whitespace() {
        assert_eq!(normalize_phrase("  The   U.S. "), "the u.s.");
        assert_eq!(normalize_phrase("East\tAsian"), "east asian");
        assert_eq!(normalize_phrase(""), "");
    }

    #[test]
    fn stopword_list_is_loaded() {
        assert_eq!(stopwords().len(), 179);
        assert!(is_stopword("The"));
        assert!(!is_stopword("beer"));
    }

    #[test]
    fn char_index_handles_multibyte() {
        let t = "Café au lait";
        let idx = CharIndex::new(t);
        assert_eq!(idx.char_len(), 12);
        assert_eq!(idx.slice(t, 0, 4), Some("Café"));
        assert_eq!(idx.slice(t, 5, 7), Some("au"));
        assert_eq!(idx.char_offset(6), 5);
        let a = CharIndex::new("abc");
        assert_eq!(a.slice("abc", 1, 3), Some("bc"));
        assert_eq!(a.byte(4), None);
    }
}
