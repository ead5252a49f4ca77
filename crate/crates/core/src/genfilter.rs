//! Generic-sentence filter: a fixed registry of lexical and syntactic rules
//! that keep generic statements and drop episodic or personal ones.
//!
//! Rules are evaluated in id order and the first failing rule is reported.
//! Which rules are active depends on the (domain, facet) pair; see
//! [`active_rules_for`].

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{Domain, Facet};
use crate::ingest::{AnnotatedSentence, Pos};

#[derive(Debug, Error, PartialEq, Eq)]
#[error("unknown rule id `{0}`")]
pub struct UnknownRule(pub String);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RuleId {
    Len,
    Cap,
    FirstWord,
    EndPeriod,
    NoUrl,
    NoPronoun,
    NoQuestion,
    RootVerb,
    NounBeforeRoot,
    NoPastRoot,
    NoPerson,
    NoDeictic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RuleKind {
    Lexical,
    Syntactic,
}

#[derive(Clone, Copy, Debug)]
pub struct Rule {
    pub id: RuleId,
    pub description: &'static str,
    pub kind: RuleKind,
    pub default_on: bool,
}

pub const RULES: &[Rule] = &[
    Rule { id: RuleId::Len, description: "at most 30 non-punctuation tokens", kind: RuleKind::Lexical, default_on: true },
    Rule { id: RuleId::Cap, description: "starts with an uppercase character", kind: RuleKind::Lexical, default_on: true },
    Rule { id: RuleId::FirstWord, description: "first token is not a determiner", kind: RuleKind::Lexical, default_on: true },
    Rule { id: RuleId::EndPeriod, description: "ends with a period", kind: RuleKind::Lexical, default_on: true },
    Rule { id: RuleId::NoUrl, description: "contains no URL-like snippet", kind: RuleKind::Lexical, default_on: true },
    Rule { id: RuleId::NoPronoun, description: "no first- or second-person pronoun", kind: RuleKind::Lexical, default_on: true },
    Rule { id: RuleId::NoQuestion, description: "contains no question mark", kind: RuleKind::Lexical, default_on: true },
    Rule { id: RuleId::RootVerb, description: "root is a verb and not the first token", kind: RuleKind::Syntactic, default_on: true },
    Rule { id: RuleId::NounBeforeRoot, description: "a noun precedes the root", kind: RuleKind::Syntactic, default_on: true },
    Rule { id: RuleId::NoPastRoot, description: "root is not a past-tense verb", kind: RuleKind::Syntactic, default_on: true },
    Rule { id: RuleId::NoPerson, description: "no PERSON entity", kind: RuleKind::Syntactic, default_on: true },
    Rule { id: RuleId::NoDeictic, description: "first token is not this/that/these/those", kind: RuleKind::Lexical, default_on: true },
];

impl RuleId {
    pub fn as_str(self) -> &'static str {
        match self {
            RuleId::Len => "R01-LEN",
            RuleId::Cap => "R02-CAP",
            RuleId::FirstWord => "R03-FIRSTWORD",
            RuleId::EndPeriod => "R04-ENDPERIOD",
            RuleId::NoUrl => "R05-NOURL",
            RuleId::NoPronoun => "R06-NOPRONOUN",
            RuleId::NoQuestion => "R07-NOQUESTION",
            RuleId::RootVerb => "R08-ROOTVERB",
            RuleId::NounBeforeRoot => "R09-NOUNBEFOREROOT",
            RuleId::NoPastRoot => "R10-NOPASTROOT",
            RuleId::NoPerson => "R11-NOPERSON",
            RuleId::NoDeictic => "R12-NODEICTIC",
        }
    }

    pub fn rule(self) -> &'static Rule {
        RULES.iter().find(|r| r.id == self).expect("every id is registered")
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RuleId {
    type Err = UnknownRule;

    /// Accepts the full id (`R03-FIRSTWORD`) or its numeric prefix (`R03`).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        RULES
            .iter()
            .map(|r| r.id)
            .find(|id| {
                let full = id.as_str();
                full.eq_ignore_ascii_case(s) || full.split('-').next().is_some_and(|p| p.eq_ignore_ascii_case(s))
            })
            .ok_or_else(|| UnknownRule(s.to_string()))
    }
}

impl Serialize for RuleId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for RuleId {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

pub type RuleSet = BTreeSet<RuleId>;

pub fn default_rules() -> RuleSet {
    RULES.iter().filter(|r| r.default_on).map(|r| r.id).collect()
}

/// Parses a list of rule ids; an unknown id is a configuration error.
pub fn parse_rule_set<'a>(ids: impl IntoIterator<Item = &'a str>) -> Result<RuleSet, UnknownRule> {
    ids.into_iter().map(str::parse).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterDecision {
    pub accepted: bool,
    pub failed_rule: Option<RuleId>,
}

impl FilterDecision {
    pub const ACCEPT: FilterDecision = FilterDecision { accepted: true, failed_rule: None };

    fn reject(rule: RuleId) -> Self {
        FilterDecision { accepted: false, failed_rule: Some(rule) }
    }
}

/// Rule parameters that are not on/off toggles.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FilterParams {
    pub max_tokens: usize,
}

impl Default for FilterParams {
    fn default() -> Self {
        FilterParams { max_tokens: 30 }
    }
}

const PERSONAL_PRONOUNS: &[&str] = &[
    "i", "me", "my", "mine", "myself", "we", "us", "our", "ours", "ourselves", "you", "your", "yours",
    "yourself", "yourselves",
];

const DEICTICS: &[&str] = &["this", "that", "these", "those"];

/// URL-like snippet: an explicit scheme or `www.`, or a token made of at
/// least two dot-separated alphanumeric runs ending in a 2–4 letter TLD.
pub fn looks_like_url(text: &str) -> bool {
    let lower = text.to_lowercase();
    if lower.contains("http://") || lower.contains("https://") || lower.contains("www.") {
        return true;
    }
    lower.split_whitespace().any(|word| {
        let word = word.trim_matches(|c: char| !c.is_alphanumeric());
        let parts: Vec<&str> = word.split('.').collect();
        if parts.len() < 2 || parts.iter().any(|p| p.is_empty() || !p.chars().all(char::is_alphanumeric)) {
            return false;
        }
        let tld = parts[parts.len() - 1];
        (2..=4).contains(&tld.len()) && tld.chars().all(|c| c.is_ascii_alphabetic())
            // "U.S" style initialisms are not domains.
            && parts[..parts.len() - 1].iter().any(|p| p.chars().count() > 1)
    })
}

fn check(rule: RuleId, s: &AnnotatedSentence, params: &FilterParams) -> bool {
    let tokens = &s.tokens;
    let first = tokens.first();
    match rule {
        RuleId::Len => tokens.iter().filter(|t| t.pos != Pos::Punct).count() <= params.max_tokens,
        RuleId::Cap => s.text.trim_start().chars().next().is_some_and(char::is_uppercase),
        RuleId::FirstWord => first.is_some_and(|t| t.pos != Pos::Det),
        RuleId::EndPeriod => s.text.trim_end().ends_with('.'),
        RuleId::NoUrl => !looks_like_url(&s.text),
        RuleId::NoPronoun => !tokens
            .iter()
            .any(|t| t.pos == Pos::Pron && PERSONAL_PRONOUNS.contains(&t.surface.to_lowercase().as_str())),
        RuleId::NoQuestion => !s.text.contains('?'),
        RuleId::RootVerb => s.root.is_some_and(|r| r > 0 && tokens.get(r).is_some_and(|t| t.pos.is_verbal())),
        RuleId::NounBeforeRoot => s.root.is_some_and(|r| tokens[..r.min(tokens.len())].iter().any(|t| t.pos.is_nominal())),
        RuleId::NoPastRoot => !s
            .root
            .and_then(|r| tokens.get(r))
            .is_some_and(|t| t.tag.as_deref() == Some("VBD")),
        RuleId::NoPerson => !tokens.iter().any(|t| t.ner.as_deref() == Some("PERSON")),
        RuleId::NoDeictic => first.is_some_and(|t| !DEICTICS.contains(&t.surface.to_lowercase().as_str())),
    }
}

/// Evaluates the active rules in id order; returns the first failure.
pub fn is_generic(sentence: &AnnotatedSentence, active: &RuleSet, params: &FilterParams) -> FilterDecision {
    for &rule in active {
        if !check(rule, sentence, params) {
            return FilterDecision::reject(rule);
        }
    }
    FilterDecision::ACCEPT
}

/// Default rules with the domain's toggles applied, then the facet's.
pub fn active_rules_for(domain: &Domain, facet: &Facet) -> RuleSet {
    let mut rules = default_rules();
    for toggles in [&domain.rule_toggles, &facet.rule_toggles] {
        for (&id, &on) in toggles {
            if on {
                rules.insert(id);
            } else {
                rules.remove(&id);
            }
        }
    }
    rules
}
