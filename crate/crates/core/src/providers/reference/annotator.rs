//! Deterministic rule-based English annotator.
//!
//! Pipeline per document: tokenize → segment on terminal punctuation →
//! gazetteer NER → lexicon lookup with left-to-right contextual
//! disambiguation → root selection (first finite verb, or the main verb
//! after an auxiliary chain, or the copula).
//!
//! It is a test double for a statistical annotator, tuned for short
//! declarative web sentences. It never fails.

use crate::ingest::{Pos, SentenceAnnotation, Token};
use crate::inflect::singularize_word;
use crate::providers::{Annotator, ProviderError};
use crate::text::is_stopword;

use super::lexicon::{Entry, Lexicon, DO_HAVE_FORMS, ENTITIES, MODALS, POSSESSIVES};

const ABBREVIATIONS: &[&str] = &[
    "mr", "mrs", "ms", "dr", "st", "jr", "sr", "vs", "etc", "prof", "inc", "ltd", "co", "mt", "no",
];

#[derive(Clone, Debug)]
struct RawToken {
    start: usize,
    end: usize,
    text: String,
}

fn is_initialism(chars: &[char]) -> bool {
    // "U.S", "e.g": single letters separated by dots
    chars.len() >= 3
        && chars.iter().enumerate().all(|(i, c)| if i % 2 == 0 { c.is_alphabetic() } else { *c == '.' })
}

fn tokenize(text: &str) -> Vec<RawToken> {
    let chars: Vec<char> = text.chars().collect();
    let n = chars.len();
    let mut out = Vec::new();
    let mut i = 0;
    let push = |out: &mut Vec<RawToken>, s: usize, e: usize| {
        out.push(RawToken { start: s, end: e, text: chars[s..e].iter().collect() });
    };
    while i < n {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let rest: String = chars[i..n.min(i + 8)].iter().collect::<String>().to_lowercase();
        if rest.starts_with("http://") || rest.starts_with("https://") || rest.starts_with("www.") {
            let mut j = i;
            while j < n && !chars[j].is_whitespace() {
                j += 1;
            }
            while j > i + 1 && matches!(chars[j - 1], '.' | ',' | ';' | ':' | '!' | '?' | ')' | '"' | '\'') {
                j -= 1;
            }
            push(&mut out, i, j);
            i = j;
            continue;
        }
        if c.is_alphanumeric() {
            let mut j = i + 1;
            while j < n {
                let d = chars[j];
                let next_alnum = j + 1 < n && chars[j + 1].is_alphanumeric();
                if d.is_alphanumeric() || (matches!(d, '-' | '\'' | '’' | '.') && next_alnum) {
                    j += 1;
                } else {
                    break;
                }
            }
            let word: String = chars[i..j].iter().collect();
            if j < n && chars[j] == '.' {
                let lower = word.to_lowercase();
                if is_initialism(&chars[i..j]) || ABBREVIATIONS.contains(&lower.as_str()) {
                    j += 1;
                }
            }
            let lower = word.to_lowercase();
            // Clitics split like a typical statistical tokenizer.
            let split = if (lower.ends_with("'s") || lower.ends_with("’s")) && j - i > 2 {
                Some(j - 2)
            } else if lower.ends_with("n't") && j - i > 3 {
                Some(j - 3)
            } else {
                None
            };
            match split {
                Some(k) => {
                    push(&mut out, i, k);
                    push(&mut out, k, j);
                }
                None => push(&mut out, i, j),
            }
            i = j;
            continue;
        }
        // punctuation; runs of dots stay together
        let mut j = i + 1;
        if c == '.' {
            while j < n && chars[j] == '.' {
                j += 1;
            }
        }
        push(&mut out, i, j);
        i = j;
    }
    out
}

fn is_terminal(t: &str) -> bool {
    !t.is_empty() && t.chars().all(|c| matches!(c, '.' | '!' | '?'))
}

fn is_closing(t: &str) -> bool {
    matches!(t, "\"" | "'" | ")" | "]" | "”" | "’")
}

/// Groups tokens into sentences. A sentence ends at terminal punctuation
/// (plus trailing closing quotes/brackets) when the next token does not
/// start with a lowercase letter, and at blank lines.
fn segment(text: &str, tokens: &[RawToken]) -> Vec<(usize, usize)> {
    let chars: Vec<char> = text.chars().collect();
    let mut spans = Vec::new();
    let mut start = 0;
    let mut i = 0;
    while i < tokens.len() {
        let mut end = i + 1;
        let mut boundary = false;
        if is_terminal(&tokens[i].text) {
            while end < tokens.len() && is_closing(&tokens[end].text) {
                end += 1;
            }
            boundary = match tokens.get(end) {
                None => true,
                Some(next) => !next.text.chars().next().is_some_and(char::is_lowercase),
            };
        } else if let Some(next) = tokens.get(i + 1) {
            let gap: String = chars[tokens[i].end..next.start].iter().collect();
            boundary = gap.matches('\n').count() >= 2;
        }
        if boundary || end >= tokens.len() {
            spans.push((start, end));
            start = end;
        }
        i = end;
    }
    spans
}

/// First sentence of `text`, trimmed; empty when the text has no tokens.
pub fn first_sentence(text: &str) -> String {
    let tokens = tokenize(text);
    match segment(text, &tokens).first() {
        Some(&(s, e)) => {
            let chars: Vec<char> = text.chars().collect();
            chars[tokens[s].start..tokens[e - 1].end].iter().collect::<String>().trim().to_string()
        }
        None => String::new(),
    }
}

#[derive(Clone, Debug)]
struct Tagged {
    pos: Pos,
    tag: String,
    lemma: String,
    ner: Option<String>,
}

fn tagged(pos: Pos, tag: &str, lemma: impl Into<String>) -> Tagged {
    Tagged { pos, tag: tag.to_string(), lemma: lemma.into(), ner: None }
}

fn from_entry(e: &Entry) -> Tagged {
    tagged(e.pos, e.tag, e.lemma.clone())
}

fn is_capitalized(w: &str) -> bool {
    w.chars().next().is_some_and(char::is_uppercase)
}

fn is_punct(w: &str) -> bool {
    w.chars().all(|c| !c.is_alphanumeric())
}

fn unknown_word(lower: &str) -> Tagged {
    if lower.chars().all(|c| c.is_ascii_digit() || matches!(c, '.' | ',' | '-')) {
        return tagged(Pos::Num, "CD", lower);
    }
    if lower.starts_with("http") || lower.starts_with("www.") {
        return tagged(Pos::X, "ADD", lower);
    }
    let ends = |s: &str| lower.len() > s.len() + 2 && lower.ends_with(s);
    if ends("ly") {
        return tagged(Pos::Adv, "RB", lower);
    }
    if ["ous", "ful", "ive", "able", "ible", "al", "ic", "less", "ish", "ary", "ese", "ian"].iter().any(|s| ends(s)) {
        return tagged(Pos::Adj, "JJ", lower);
    }
    if ends("ing") {
        return tagged(Pos::Verb, "VBG", &lower[..lower.len() - 3]);
    }
    if ends("ed") {
        return tagged(Pos::Verb, "VBD", &lower[..lower.len() - 2]);
    }
    let sg = singularize_word(lower);
    if sg != lower {
        tagged(Pos::Noun, "NNS", sg)
    } else {
        tagged(Pos::Noun, "NN", lower)
    }
}

fn has_verb_base(lower: &str) -> bool {
    Lexicon::get().lookup(lower).iter().any(|e| e.pos == Pos::Verb && e.tag == "VB")
}

fn has_verb(lower: &str) -> bool {
    Lexicon::get().lookup(lower).iter().any(|e| e.pos == Pos::Verb)
}

/// Marks gazetteer entities, longest match first, case-sensitive.
fn entities(words: &[&str]) -> Vec<Option<(&'static str, usize)>> {
    // (tag, entity length) on the first token of each match; continuation
    // tokens carry the same tag with length 0.
    let mut out = vec![None; words.len()];
    let mut i = 0;
    while i < words.len() {
        let mut best: Option<(&'static str, usize)> = None;
        for &(name, tag) in ENTITIES {
            let parts: Vec<&str> = name.split(' ').collect();
            if i + parts.len() <= words.len()
                && parts.iter().zip(&words[i..]).all(|(a, b)| a == b)
                && best.is_none_or(|(_, l)| parts.len() > l)
            {
                best = Some((tag, parts.len()));
            }
        }
        // honorific + capitalized name
        if best.is_none()
            && ["Mr.", "Mrs.", "Ms.", "Dr.", "Saint", "St."].contains(&words[i])
            && words.get(i + 1).is_some_and(|w| is_capitalized(w))
        {
            let mut len = 2;
            while words.get(i + len).is_some_and(|w| is_capitalized(w) && Lexicon::get().lookup(&w.to_lowercase()).is_empty()) {
                len += 1;
            }
            best = Some(("PERSON", len));
        }
        match best {
            Some((tag, len)) => {
                out[i] = Some((tag, len));
                for slot in out.iter_mut().skip(i + 1).take(len - 1) {
                    *slot = Some((tag, 0));
                }
                i += len;
            }
            None => i += 1,
        }
    }
    out
}

fn tag_sentence(words: &[&str]) -> Vec<Tagged> {
    let lx = Lexicon::get();
    let ents = entities(words);
    let lowers: Vec<String> = words.iter().map(|w| w.to_lowercase()).collect();
    let mut out: Vec<Tagged> = Vec::with_capacity(words.len());
    let mut finite_seen = false;

    for (i, word) in words.iter().enumerate() {
        let lower = lowers[i].as_str();
        let prev = out.last().map(|t: &Tagged| t.pos);
        let prev_lower = i.checked_sub(1).map(|p| lowers[p].as_str());
        let next_lower = lowers.get(i + 1).map(String::as_str);

        let t = if is_punct(word) {
            tagged(Pos::Punct, if is_terminal(word) { "." } else { "," }, *word)
        } else if let Some((tag, _)) = ents[i] {
            let mut t = entity_tag(words, &ents, i, tag);
            t.ner = Some(tag.to_string());
            t
        } else if lower == "'s" || lower == "’s" {
            if matches!(prev_lower, Some("it" | "that" | "there" | "what" | "he" | "she" | "who")) {
                tagged(Pos::Aux, "VBZ", "be")
            } else {
                tagged(Pos::Part, "POS", "'s")
            }
        } else if lower == "i" {
            tagged(Pos::Pron, "PRP", "I")
        } else if i > 0 && is_capitalized(word) && !lx.lookup(lower).iter().any(|e| is_closed(e.pos)) {
            tagged(Pos::Propn, "NNP", *word)
        } else if word.len() > 1 && word.chars().all(|c| c.is_uppercase() || c == '.') {
            tagged(Pos::Propn, "NNP", *word)
        } else if lower == "to" {
            if next_lower.is_some_and(has_verb_base) {
                tagged(Pos::Part, "TO", "to")
            } else {
                tagged(Pos::Adp, "IN", "to")
            }
        } else if lower == "that" {
            if i == 0 || matches!(prev, Some(Pos::Adp)) {
                tagged(Pos::Det, "DT", "that")
            } else {
                tagged(Pos::Sconj, "IN", "that")
            }
        } else if lower == "like" && !finite_seen && matches!(prev, Some(Pos::Noun | Pos::Propn | Pos::Pron | Pos::Adv)) {
            tagged(Pos::Verb, "VBP", "like")
        } else if lower == "like" {
            tagged(Pos::Adp, "IN", "like")
        } else if let Some(&(_, lemma, tag)) = DO_HAVE_FORMS.iter().find(|(w, _, _)| *w == lower) {
            // auxiliary when a verb follows (possibly after not/adverbs)
            let mut j = i + 1;
            while j < lowers.len()
                && lx.lookup(&lowers[j]).iter().any(|e| matches!(e.pos, Pos::Adv | Pos::Part))
            {
                j += 1;
            }
            if lowers.get(j).is_some_and(|w| has_verb(w)) {
                tagged(Pos::Aux, tag, lemma)
            } else {
                tagged(Pos::Verb, tag, lemma)
            }
        } else {
            let entries = lx.lookup(lower);
            if entries.is_empty() {
                let mut t = unknown_word(lower);
                if t.pos == Pos::Verb && t.tag == "VBD" && (finite_seen || matches!(prev, Some(Pos::Aux))) {
                    t.tag = "VBN".into();
                }
                t
            } else {
                choose(entries, prev, prev_lower, finite_seen, &out)
            }
        };

        if t.pos == Pos::Aux || (t.pos == Pos::Verb && matches!(t.tag.as_str(), "VBZ" | "VBP" | "VBD")) {
            finite_seen = true;
        }
        out.push(t);
    }
    out
}

// Demonym adjectives ("German beer") are ADJ; other entity tokens PROPN.
fn entity_tag(words: &[&str], ents: &[Option<(&'static str, usize)>], i: usize, tag: &str) -> Tagged {
    let mut end = i;
    while matches!(ents.get(end + 1), Some(Some((_, 0)))) {
        end += 1;
    }
    let last = words[end];
    let adjectival = tag == "NORP"
        && !last.ends_with('s')
        && words.get(end + 1).is_some_and(|w| {
            w.chars().next().is_some_and(char::is_lowercase) && !verb_only(&w.to_lowercase())
        });
    if adjectival {
        tagged(Pos::Adj, "JJ", words[i])
    } else if last.ends_with('s') && tag == "NORP" {
        tagged(Pos::Propn, "NNPS", words[i])
    } else {
        tagged(Pos::Propn, "NNP", words[i])
    }
}

fn verb_only(lower: &str) -> bool {
    let entries = Lexicon::get().lookup(lower);
    !entries.is_empty() && entries.iter().all(|e| !matches!(e.pos, Pos::Noun | Pos::Adj))
}

fn is_closed(p: Pos) -> bool {
    matches!(p, Pos::Det | Pos::Pron | Pos::Adp | Pos::Cconj | Pos::Sconj | Pos::Aux | Pos::Part)
}

fn choose(entries: &[Entry], prev: Option<Pos>, prev_lower: Option<&str>, finite_seen: bool, out: &[Tagged]) -> Tagged {
    let has = |p: Pos| entries.iter().any(|e| e.pos == p);
    let first_of = |p: Pos| entries.iter().find(|e| e.pos == p).map(from_entry);
    if entries.len() == 1 {
        return fix_verb_tag(from_entry(&entries[0]), prev, prev_lower, finite_seen);
    }
    let possessive = prev_lower.is_some_and(|w| POSSESSIVES.split_whitespace().any(|p| p == w));
    let modal_or_to = prev_lower.is_some_and(|w| w == "to" || MODALS.split_whitespace().any(|m| m == w))
        || matches!(prev, Some(Pos::Aux | Pos::Part));
    let want_verb = if has(Pos::Verb) {
        if possessive || matches!(prev, Some(Pos::Det | Pos::Adj | Pos::Adp | Pos::Num)) || prev_lower == Some("'s") {
            false
        } else if modal_or_to {
            true
        } else if matches!(prev, Some(Pos::Noun | Pos::Propn | Pos::Pron | Pos::Adv)) {
            !finite_seen
        } else if prev == Some(Pos::Cconj) {
            // coordinated with whatever came before the conjunction
            out.iter().rev().nth(1).is_some_and(|t| t.pos == Pos::Verb)
        } else {
            false
        }
    } else {
        false
    };
    if want_verb {
        let verb_entries: Vec<&Entry> = entries.iter().filter(|e| e.pos == Pos::Verb).collect();
        let pick = if modal_or_to {
            verb_entries.iter().find(|e| e.tag == "VB" || e.tag == "VBN").or(verb_entries.first())
        } else {
            verb_entries
                .iter()
                .find(|e| matches!(e.tag, "VBZ" | "VB"))
                .or_else(|| verb_entries.iter().find(|e| e.tag == "VBD"))
                .or(verb_entries.first())
        };
        return fix_verb_tag(from_entry(pick.expect("has verb")), prev, prev_lower, finite_seen);
    }
    for p in [Pos::Noun, Pos::Adj, Pos::Adv, Pos::Num, Pos::Det, Pos::Pron, Pos::Adp] {
        if let Some(t) = first_of(p) {
            return t;
        }
    }
    fix_verb_tag(from_entry(&entries[0]), prev, prev_lower, finite_seen)
}

fn fix_verb_tag(mut t: Tagged, prev: Option<Pos>, prev_lower: Option<&str>, finite_seen: bool) -> Tagged {
    if t.pos != Pos::Verb {
        return t;
    }
    let after_to_or_modal = prev_lower.is_some_and(|w| w == "to" || MODALS.split_whitespace().any(|m| m == w))
        || matches!(prev, Some(Pos::Part));
    match t.tag.as_str() {
        "VB" if !after_to_or_modal && prev != Some(Pos::Aux) => t.tag = "VBP".into(),
        "VBD" if finite_seen || prev == Some(Pos::Aux) => t.tag = "VBN".into(),
        _ => {}
    }
    t
}

fn find_root(tags: &[Tagged]) -> Option<usize> {
    let first = tags.iter().enumerate().position(|(i, t)| {
        t.pos == Pos::Aux
            || (t.pos == Pos::Verb
                && matches!(t.tag.as_str(), "VBP" | "VBZ" | "VBD")
                && !(i > 0 && tags[i - 1].tag == "TO"))
    });
    match first {
        Some(i) if tags[i].pos == Pos::Aux => {
            let mut j = i + 1;
            while j < tags.len() && matches!(tags[j].pos, Pos::Aux | Pos::Adv | Pos::Part) {
                j += 1;
            }
            if tags.get(j).is_some_and(|t| t.pos == Pos::Verb) {
                Some(j)
            } else {
                Some(i)
            }
        }
        Some(i) => Some(i),
        None => tags.iter().position(|t| t.pos == Pos::Verb),
    }
}

pub fn annotate_text(text: &str) -> Vec<SentenceAnnotation> {
    let tokens = tokenize(text);
    let chars: Vec<char> = text.chars().collect();
    segment(text, &tokens)
        .into_iter()
        .map(|(s, e)| {
            let toks = &tokens[s..e];
            let base = toks[0].start;
            let sent_text: String = chars[base..toks[toks.len() - 1].end].iter().collect();
            let words: Vec<&str> = toks.iter().map(|t| t.text.as_str()).collect();
            let tags = tag_sentence(&words);
            let root = find_root(&tags);
            let tokens = toks
                .iter()
                .zip(tags)
                .map(|(rt, t)| Token {
                    is_stop: is_stopword(&rt.text),
                    surface: rt.text.clone(),
                    lemma: t.lemma,
                    pos: t.pos,
                    tag: Some(t.tag),
                    ner: t.ner,
                    char_span: [rt.start - base, rt.end - base],
                })
                .collect();
            SentenceAnnotation { text: sent_text, tokens, root }
        })
        .collect()
}

/// The reference annotation provider.
#[derive(Clone, Copy, Debug, Default)]
pub struct ReferenceAnnotator;

impl ReferenceAnnotator {
    pub fn new() -> Self {
        ReferenceAnnotator
    }
}

impl Annotator for ReferenceAnnotator {
    fn annotate(&self, text: &str) -> Result<Vec<SentenceAnnotation>, ProviderError> {
        Ok(annotate_text(text))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one(text: &str) -> SentenceAnnotation {
        let mut s = annotate_text(text);
        assert_eq!(s.len(), 1, "{text}: {s:?}");
        s.remove(0)
    }

    fn pos(s: &SentenceAnnotation) -> Vec<Pos> {
        s.tokens.iter().map(|t| t.pos).collect()
    }

    #[test]
    fn tokenizes_initialisms_clitics_and_urls() {
        let words: Vec<String> = tokenize("In the U.S., Japan's chefs don't visit www.x.com today.")
            .into_iter()
            .map(|t| t.text)
            .collect();
        assert_eq!(words, ["In", "the", "U.S.", ",", "Japan", "'s", "chefs", "do", "n't", "visit", "www.x.com", "today", "."]);
    }

    #[test]
    fn lawyers_sentence() {
        let s = one("Lawyers wear suits to look professional.");
        use Pos::*;
        assert_eq!(pos(&s), [Noun, Verb, Noun, Part, Verb, Adj, Punct]);
        assert_eq!(s.root, Some(1));
        assert_eq!(s.tokens[2].lemma, "suit");
        assert_eq!(s.tokens[0].lemma, "lawyer");
        s.validate().unwrap();
    }

    #[test]
    fn roots_and_entities() {
        let s = one("Firefighters use ladders to reach fires.");
        assert_eq!(s.root, Some(1));
        assert_eq!(s.tokens[5].pos, Pos::Noun);

        let s = one("Germans like their currywurst.");
        assert_eq!(s.tokens[0].ner.as_deref(), Some("NORP"));
        assert_eq!(s.tokens[0].pos, Pos::Propn);
        assert_eq!(s.tokens[1].pos, Pos::Verb);
        assert_eq!(s.root, Some(1));

        let s = one("Tofu is a major ingredient in many East Asian cuisines.");
        assert_eq!(s.root, Some(1));
        assert_eq!(s.tokens[7].ner.as_deref(), Some("NORP"));
        assert_eq!(s.tokens[8].ner.as_deref(), Some("NORP"));
        assert_eq!(s.tokens[0].pos, Pos::Noun);

        let s = one("Buddhists honor Buddha with offerings.");
        assert_eq!(s.tokens[2].ner.as_deref(), Some("PERSON"));
        assert_eq!(s.tokens[1].pos, Pos::Verb);
    }

    #[test]
    fn past_tense_and_aux_chains() {
        let s = one("Lawyers wore suits in the past.");
        assert_eq!(s.tokens[1].tag.as_deref(), Some("VBD"));
        let s = one("Beer festivals are celebrated every autumn.");
        assert_eq!(s.root, Some(3));
        assert_eq!(s.tokens[3].tag.as_deref(), Some("VBN"));
        let s = one("Sushi is popular.");
        assert_eq!(s.root, Some(1));
        assert_eq!(s.tokens[1].pos, Pos::Aux);
    }

    #[test]
    fn noun_verb_disambiguation() {
        let s = one("Germans drink beer and eat sausages.");
        assert_eq!(s.tokens[1].pos, Pos::Verb);
        assert_eq!(s.tokens[4].pos, Pos::Verb);
        let s = one("Their drinks are cold.");
        assert_eq!(s.tokens[1].pos, Pos::Noun);
    }

    #[test]
    fn segmentation() {
        let s = annotate_text("Germans like beer. The French drink wine! Is it good? yes.");
        let texts: Vec<&str> = s.iter().map(|x| x.text.as_str()).collect();
        assert_eq!(texts, ["Germans like beer.", "The French drink wine!", "Is it good? yes."]);
        assert!(annotate_text("the U.S. Army is big.").len() == 1);
        assert!(annotate_text("").is_empty());
        for sent in &s {
            sent.validate().unwrap();
        }
        assert_eq!(first_sentence(" Fried rice is tasty. It is cheap. "), "Fried rice is tasty.");
        assert_eq!(first_sentence(""), "");
    }

    #[test]
    fn offsets_are_chars_relative_to_sentence() {
        let s = annotate_text("Thé is nice. Café au lait is popular.");
        assert_eq!(s[1].text, "Café au lait is popular.");
        assert_eq!(s[1].tokens[0].char_span, [0, 4]);
        for sent in &s {
            sent.validate().unwrap();
        }
    }
}
