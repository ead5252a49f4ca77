//! Salient n-grams shared by most members of a cluster.
//!
//! Candidates are 1- to 3-grams of lowercased token surfaces that do not
//! cross punctuation, do not touch a subject-alias token, and neither start
//! nor end with a stop word. Noun phrases (nominal last token, no verb or
//! auxiliary) have their head replaced by its singular form. A phrase is
//! kept when it occurs in more than `min_support` of the members, and is
//! dropped again if it is a contiguous part of a longer kept phrase.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::catalog::SubjectId;
use crate::detect::AliasIndex;
use crate::inflect::singularize_word;
use crate::ingest::{Pos, Token};
use crate::text::is_stopword;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Concept {
    pub phrase: String,
    pub n: usize,
    pub support: f64,
}

fn default_min_support() -> f64 {
    0.6
}
fn default_max_n() -> usize {
    3
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConceptParams {
    #[serde(default = "default_min_support")]
    pub min_support: f64,
    #[serde(default = "default_max_n")]
    pub max_n: usize,
}

impl Default for ConceptParams {
    fn default() -> Self {
        ConceptParams { min_support: default_min_support(), max_n: default_max_n() }
    }
}

/// Tokens of one cluster member, with `masked[i]` set for tokens inside a
/// subject alias.
#[derive(Clone, Debug)]
pub struct ConceptMember<'a> {
    pub tokens: &'a [Token],
    pub masked: Vec<bool>,
}

/// Marks the tokens covered by any alias of `subject`.
pub fn alias_mask(text: &str, tokens: &[Token], index: &AliasIndex, subject: &SubjectId) -> Vec<bool> {
    let mut mask = vec![false; tokens.len()];
    for span in index.find_all(text, tokens) {
        if span.subjects.contains(subject) {
            mask[span.start..span.end].iter_mut().for_each(|m| *m = true);
        }
    }
    mask
}

/// Singular form used for the head of a noun phrase.
pub fn singular_head(token: &Token) -> String {
    let lemma = token.lemma.trim().to_lowercase();
    if !lemma.is_empty() && !lemma.contains(' ') {
        lemma
    } else {
        singularize_word(&token.surface.to_lowercase())
    }
}

/// The normalized phrase for a token window, or `None` when the window is
/// not a candidate.
pub fn candidate(window: &[Token], masked: &[bool]) -> Option<String> {
    if window.iter().any(|t| t.pos == Pos::Punct) || masked.iter().any(|&m| m) {
        return None;
    }
    let words: Vec<String> = window.iter().map(|t| t.surface.to_lowercase()).collect();
    if is_stopword(&words[0]) || is_stopword(&words[words.len() - 1]) {
        return None;
    }
    let last = &window[window.len() - 1];
    let noun_phrase = last.pos.is_nominal() && !window.iter().any(|t| t.pos.is_verbal());
    let mut out = words;
    if noun_phrase {
        let n = out.len();
        out[n - 1] = singular_head(last);
    }
    Some(out.join(" "))
}

fn contains_seq(longer: &[&str], shorter: &[&str]) -> bool {
    shorter.len() < longer.len() && longer.windows(shorter.len()).any(|w| w == shorter)
}

pub fn extract_concepts(members: &[ConceptMember<'_>], params: &ConceptParams) -> Vec<Concept> {
    if members.is_empty() {
        return Vec::new();
    }
    let mut counts: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    for m in members {
        let mut seen: BTreeSet<(String, usize)> = BTreeSet::new();
        for n in 1..=params.max_n {
            for s in 0..m.tokens.len().saturating_sub(n - 1) {
                if let Some(p) = candidate(&m.tokens[s..s + n], &m.masked[s..s + n]) {
                    seen.insert((p, n));
                }
            }
        }
        for (p, n) in seen {
            counts.entry(p).or_insert((0, n)).0 += 1;
        }
    }
    let total = members.len() as f64;
    let kept: Vec<Concept> = counts
        .into_iter()
        .filter(|(_, (c, _))| *c as f64 / total > params.min_support)
        .map(|(phrase, (c, n))| Concept { phrase, n, support: c as f64 / total })
        .collect();
    let words: Vec<Vec<&str>> = kept.iter().map(|c| c.phrase.split(' ').collect()).collect();
    let mut out: Vec<Concept> = kept
        .iter()
        .enumerate()
        .filter(|(i, _)| !words.iter().any(|w| contains_seq(w, &words[*i])))
        .map(|(_, c)| c.clone())
        .collect();
    out.sort_by(|a, b| b.support.total_cmp(&a.support).then_with(|| a.phrase.cmp(&b.phrase)));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::providers::reference::annotate_text;

    fn members(texts: &[&str]) -> Vec<Vec<Token>> {
        texts.iter().map(|t| annotate_text(t).remove(0).tokens).collect()
    }

    fn run(tokens: &[Vec<Token>], mask_first: usize) -> Vec<Concept> {
        let ms: Vec<ConceptMember> = tokens
            .iter()
            .map(|t| ConceptMember { tokens: t, masked: (0..t.len()).map(|i| i < mask_first).collect() })
            .collect();
        extract_concepts(&ms, &ConceptParams::default())
    }

    #[test]
    fn singularized_compound() {
        let t = members(&[
            "Germans love beer festivals.",
            "Germans enjoy beer festivals in autumn.",
            "Germans hold beer festivals every year.",
        ]);
        let c = run(&t, 1);
        assert_eq!(c[0], Concept { phrase: "beer festival".into(), n: 2, support: 1.0 });
        assert!(c.iter().all(|c| c.phrase != "beer" && c.phrase != "festival" && !c.phrase.contains("german")));
    }

    #[test]
    fn two_of_three_is_enough() {
        let t = members(&["Tofu is a major ingredient.", "Tofu is common.", "Rice is common."]);
        let c = run(&t, 0);
        let tofu = c.iter().find(|c| c.phrase == "tofu").unwrap();
        assert!((tofu.support - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn strict_support_boundary() {
        let yes = ["Miso soup is common.", "Miso soup is cheap.", "Miso soup is hot.", "Rice is cheap.", "Tea is hot."];
        assert!(run(&members(&yes), 0).iter().all(|c| c.phrase != "miso soup"));
        let four = ["Miso soup is common.", "Miso soup is cheap.", "Miso soup is hot.", "Miso soup is good.", "Tea is hot."];
        let c = run(&members(&four), 0);
        assert_eq!(c[0].phrase, "miso soup");
        assert!((c[0].support - 0.8).abs() < 1e-12);
        assert!(c.iter().all(|c| c.phrase != "miso" && c.phrase != "soup"));
    }

    #[test]
    fn verb_phrases_keep_their_form() {
        let t = members(&["Firefighters save lives.", "Firefighters save lives daily.", "Firefighters save lives at night."]);
        let c = run(&t, 1);
        assert!(c.iter().any(|c| c.phrase == "save lives" && c.support == 1.0), "{c:?}");
        assert!(c.iter().all(|c| c.phrase != "save"));
    }

    #[test]
    fn alias_mask_covers_subject_tokens() {
        let cat = crate::catalog::SubjectCatalog::from_toml_str(
            "[[domains]]\nid = \"occupation\"\nfacets = [{ id = \"clothing\", hypothesis = \"clothing\" }]\n[[domains.subjects]]\nid = \"lawyer\"\nname = \"lawyer\"\n",
        )
        .unwrap();
        let idx = AliasIndex::new(&cat);
        let s = annotate_text("Lawyers wear suits.").remove(0);
        assert_eq!(alias_mask(&s.text, &s.tokens, &idx, &"lawyer".into()), vec![true, false, false, false]);
    }
}
