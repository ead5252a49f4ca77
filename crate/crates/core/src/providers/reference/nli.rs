//! Keyword-lexicon entailment scorer.
//!
//! For a hypothesis `"<prefix>{label}<suffix>"` built from the configured
//! template, the probability is `min(1, 0.25 * hits + 0.05)` where `hits`
//! counts premise words (lowercased alphanumeric runs, with repetition)
//! found in the cue list of `label`. Labels without a cue list score the
//! base 0.05. A premise identical to the hypothesis (after case and
//! whitespace normalization) scores 1.0.

use std::collections::HashSet;
use std::sync::OnceLock;

use crate::providers::{NliModel, ProviderError};
use crate::text::normalize_phrase;

pub const CUE_WEIGHT: f64 = 0.25;
pub const BASE_PROBABILITY: f64 = 0.05;

/// (label names, cue words)
pub const CUE_LEXICON: &[(&[&str], &str)] = &[
    (
        &["food", "foods", "cuisine"],
        "food foods dish dishes cuisine cuisines meal meals eat eats eating ate rice noodle noodles soup soups tofu sushi bread cheese sausage sausages currywurst ingredient ingredients cook cooks cooking cooked recipe recipes spicy delicious flavor flavors breakfast lunch dinner snack snacks dessert desserts meat pork beef chicken fish seafood vegetables fruit kimchi dumplings curry ramen miso tempura sauerkraut pretzel pretzels chopsticks fried baked grilled sauce spices tasty",
    ),
    (
        &["drinks", "drink", "beverages"],
        "drink drinks drinking beer beers wine wines tea coffee sake soju vodka whiskey alcohol beverage beverages brewery breweries pub pubs bar bars toast juice milk liquor cocktail cocktails festival festivals oktoberfest brew brewed matcha",
    ),
    (
        &["clothing", "clothes", "clothing habits"],
        "wear wears wearing wore clothing clothes dress dresses suit suits shirt shirts jacket jackets kimono kimonos robe robes hat hats scarf costume costumes uniform uniforms shoes boots helmet helmets dirndl lederhosen hanbok sari turban hijab veil fashion outfit outfits tie ties gear",
    ),
    (
        &["rituals", "ritual"],
        "ritual rituals pray prays praying prayer prayers worship temple temples shrine shrines meditate meditation chant chanting incense offering offerings altar ceremony ceremonies monk monks blessing bless monastery baptism funeral funerals sacred vow vows alms",
    ),
    (
        &["traditions", "tradition"],
        "tradition traditions traditional traditionally custom customs celebrate celebrates celebrated celebration celebrations festival festivals holiday holidays wedding weddings lantern lanterns parade parades annual heritage ancestors gift gifts",
    ),
    (
        &["behaviors", "behaviours", "behavior"],
        "behavior behaviors behaviour behave polite politeness punctual respect respectful greet greeting greetings bow bows shake hands habit habits manners etiquette work works working hard quiet humble friendly help helps tend tip rescue rescues protect protects save saves argue argues defend defends represent represents clients",
    ),
    (
        &["politics", "political"],
        "politics political election elections government governments vote votes voting parliament president minister ministers policy policies party parties senate congress tax taxes protest protests campaign",
    ),
    (
        &["business", "economy"],
        "business businesses company companies market markets price prices sale sales sell sells selling discount discounts profit profits customer customers shop shops store stores brand brands economy economic industry revenue online delivery",
    ),
];

fn cue_sets() -> &'static Vec<(&'static [&'static str], HashSet<&'static str>)> {
    static SETS: OnceLock<Vec<(&'static [&'static str], HashSet<&'static str>)>> = OnceLock::new();
    SETS.get_or_init(|| CUE_LEXICON.iter().map(|(labels, cues)| (*labels, cues.split_whitespace().collect())).collect())
}

fn cues_for(label: &str) -> Option<&'static HashSet<&'static str>> {
    let label = normalize_phrase(label);
    cue_sets().iter().find(|(labels, _)| labels.contains(&label.as_str())).map(|(_, s)| s)
}

pub fn cue_hits(premise: &str, label: &str) -> usize {
    let Some(cues) = cues_for(label) else { return 0 };
    premise
        .to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|w| cues.contains(w))
        .count()
}

#[derive(Clone, Debug)]
pub struct ReferenceNli {
    prefix: String,
    suffix: String,
}

impl ReferenceNli {
    /// `template` must contain `{label}`.
    pub fn new(template: &str) -> Self {
        let (prefix, suffix) = template.split_once("{label}").unwrap_or((template, ""));
        ReferenceNli { prefix: prefix.to_string(), suffix: suffix.to_string() }
    }

    fn label<'h>(&self, hypothesis: &'h str) -> &'h str {
        hypothesis
            .strip_prefix(self.prefix.as_str())
            .and_then(|h| h.strip_suffix(self.suffix.as_str()))
            .unwrap_or(hypothesis)
            .trim()
    }

    pub fn probability(&self, premise: &str, hypothesis: &str) -> f64 {
        if normalize_phrase(premise) == normalize_phrase(hypothesis) {
            return 1.0;
        }
        let hits = cue_hits(premise, self.label(hypothesis));
        (CUE_WEIGHT * hits as f64 + BASE_PROBABILITY).min(1.0)
    }
}

impl Default for ReferenceNli {
    fn default() -> Self {
        ReferenceNli::new(crate::facetclf::DEFAULT_TEMPLATE)
    }
}

impl NliModel for ReferenceNli {
    fn entail(&self, premise: &str, hypotheses: &[String]) -> Result<Vec<f64>, ProviderError> {
        Ok(hypotheses.iter().map(|h| self.probability(premise, h)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(premise: &str, label: &str) -> f64 {
        ReferenceNli::default().probability(premise, &format!("This text is about {label}"))
    }

    #[test]
    fn formula_values() {
        assert!((p("Germans love beer.", "drinks") - 0.30).abs() < 1e-12);
        assert_eq!(p("The sky is blue.", "drinks"), 0.05);
        assert_eq!(p("beer wine tea coffee sake", "drinks"), 1.0);
        assert_eq!(p("beer beer", "drinks"), 0.55);
        assert_eq!(p("beer", "astronomy"), 0.05);
    }

    #[test]
    fn self_entailment() {
        let nli = ReferenceNli::default();
        assert!(nli.probability("Beer is a drink.", "Beer is a drink.") >= 0.5);
    }

    #[test]
    fn oktoberfest_sentence_is_about_drinks() {
        let s = "German October festivals are a celebration of beer and fun";
        assert!(p(s, "drinks") >= 0.5);
        assert!(p(s, "politics") <= 0.3);
        assert!(p(s, "business") <= 0.3);
    }
}
