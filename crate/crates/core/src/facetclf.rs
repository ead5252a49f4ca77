//! Zero-shot facet gate.
//!
//! A sentence is accepted for a facet when the NLI provider gives
//! `p_facet >= rho_plus` and every counter label stays at or below
//! `rho_minus`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::catalog::{Domain, Facet, FacetId};
use crate::ingest::SentId;
use crate::providers::{NliModel, ProviderError};

pub const DEFAULT_TEMPLATE: &str = "This text is about {label}";

fn default_rho_plus() -> f64 {
    0.5
}
fn default_rho_minus() -> f64 {
    0.3
}
fn default_counter_labels() -> Vec<String> {
    vec!["politics".into(), "business".into()]
}
fn default_template() -> String {
    DEFAULT_TEMPLATE.into()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifierConfig {
    #[serde(default = "default_rho_plus")]
    pub rho_plus: f64,
    #[serde(default = "default_rho_minus")]
    pub rho_minus: f64,
    #[serde(default = "default_counter_labels")]
    pub counter_labels: Vec<String>,
    #[serde(default = "default_template")]
    pub hypothesis_template: String,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        ClassifierConfig {
            rho_plus: default_rho_plus(),
            rho_minus: default_rho_minus(),
            counter_labels: default_counter_labels(),
            hypothesis_template: default_template(),
        }
    }
}

impl ClassifierConfig {
    pub fn validate(&self) -> Result<(), String> {
        for (name, v) in [("rho_plus", self.rho_plus), ("rho_minus", self.rho_minus)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(format!("{name} = {v} is outside [0, 1]"));
            }
        }
        if !self.hypothesis_template.contains("{label}") {
            return Err(format!("hypothesis_template {:?} has no {{label}} placeholder", self.hypothesis_template));
        }
        Ok(())
    }

    pub fn hypothesis(&self, label: &str) -> String {
        self.hypothesis_template.replace("{label}", label)
    }

    /// The acceptance rule on raw probabilities.
    pub fn gate(&self, p_facet: f64, counters: impl IntoIterator<Item = f64>) -> bool {
        p_facet >= self.rho_plus && counters.into_iter().all(|p| p <= self.rho_minus)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FacetDecision {
    pub sentence: SentId,
    pub facet: FacetId,
    pub p_facet: f64,
    pub counter_probs: BTreeMap<String, f64>,
    pub accepted: bool,
}

impl FacetDecision {
    pub fn new(sentence: SentId, facet: FacetId, p_facet: f64, counter_probs: BTreeMap<String, f64>, config: &ClassifierConfig) -> Self {
        let accepted = config.gate(p_facet, counter_probs.values().copied());
        FacetDecision { sentence, facet, p_facet, counter_probs, accepted }
    }
}

fn check_probs(premise: &str, n: usize, probs: &[f64]) -> Result<(), ProviderError> {
    if probs.len() != n {
        return Err(ProviderError::local("nli", format!("{} probabilities for {n} hypotheses on {premise:?}", probs.len())));
    }
    if let Some(p) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(ProviderError::local("nli", format!("probability {p} outside [0,1]")));
    }
    Ok(())
}

pub fn entail_probability(premise: &str, hypothesis: &str, nli: &dyn NliModel) -> Result<f64, ProviderError> {
    let p = nli.entail(premise, &[hypothesis.to_string()])?;
    check_probs(premise, 1, &p)?;
    Ok(p[0])
}

fn counter_probs(config: &ClassifierConfig, probs: &[f64]) -> BTreeMap<String, f64> {
    config.counter_labels.iter().cloned().zip(probs.iter().copied()).collect()
}

pub fn classify(
    sent_id: &SentId,
    text: &str,
    facet: &Facet,
    config: &ClassifierConfig,
    nli: &dyn NliModel,
) -> Result<FacetDecision, ProviderError> {
    let mut hyps = vec![config.hypothesis(&facet.hypothesis_text)];
    hyps.extend(config.counter_labels.iter().map(|l| config.hypothesis(l)));
    let probs = nli.entail(text, &hyps)?;
    check_probs(text, hyps.len(), &probs)?;
    let counters = counter_probs(config, &probs[1..]);
    Ok(FacetDecision::new(sent_id.clone(), facet.id.clone(), probs[0], counters, config))
}

/// One decision per classified facet of `domain`, from a single NLI call
/// whose counter-label probabilities are shared by every facet.
///
/// When the domain lists an "other" facet and no classified facet reaches
/// `rho_plus`, a decision for "other" is appended with
/// `p_facet = 1 - max(p)`, gated like any other facet.
pub fn classify_all_facets(
    sent_id: &SentId,
    text: &str,
    domain: &Domain,
    config: &ClassifierConfig,
    nli: &dyn NliModel,
) -> Result<Vec<FacetDecision>, ProviderError> {
    let facets: Vec<&Facet> = domain.classified_facets().collect();
    let mut hyps: Vec<String> = facets.iter().map(|f| config.hypothesis(&f.hypothesis_text)).collect();
    hyps.extend(config.counter_labels.iter().map(|l| config.hypothesis(l)));
    let probs = nli.entail(text, &hyps)?;
    check_probs(text, hyps.len(), &probs)?;
    let counters = counter_probs(config, &probs[facets.len()..]);
    let mut out: Vec<FacetDecision> = facets
        .iter()
        .zip(&probs)
        .map(|(f, &p)| FacetDecision::new(sent_id.clone(), f.id.clone(), p, counters.clone(), config))
        .collect();
    let max = probs[..facets.len()].iter().copied().fold(0.0, f64::max);
    if domain.has_other() && max < config.rho_plus {
        let other = domain.facets.iter().find(|f| f.is_other()).expect("has_other");
        out.push(FacetDecision::new(sent_id.clone(), other.id.clone(), 1.0 - max, counters, config));
    }
    Ok(out)
}
