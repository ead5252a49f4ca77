//! English noun inflection: pluralization of subject names and the
//! inverse rules used as a lemma fallback.

// (singular, plural) pairs that the suffix rules get wrong.
const IRREGULAR: &[(&str, &str)] = &[
    ("child", "children"),
    ("person", "people"),
    ("foot", "feet"),
    ("tooth", "teeth"),
    ("goose", "geese"),
    ("mouse", "mice"),
    ("louse", "lice"),
    ("ox", "oxen"),
    ("knife", "knives"),
    ("wife", "wives"),
    ("life", "lives"),
    ("leaf", "leaves"),
    ("loaf", "loaves"),
    ("half", "halves"),
    ("calf", "calves"),
    ("wolf", "wolves"),
    ("shelf", "shelves"),
    ("thief", "thieves"),
    ("elf", "elves"),
    ("hero", "heroes"),
    ("potato", "potatoes"),
    ("tomato", "tomatoes"),
    ("echo", "echoes"),
    ("veto", "vetoes"),
    ("cactus", "cacti"),
    ("analysis", "analyses"),
    ("crisis", "crises"),
    ("thesis", "theses"),
    ("diagnosis", "diagnoses"),
    ("criterion", "criteria"),
    ("phenomenon", "phenomena"),
];

// Words with identical singular and plural.
const INVARIANT: &[&str] = &[
    "sheep", "fish", "deer", "series", "species", "aircraft", "news", "clothes", "police",
    "staff", "people", "salmon", "moose", "offspring",
];

// Words ending in "man" that take a regular plural.
const MAN_REGULAR: &[&str] = &["human", "german", "shaman", "talisman", "caiman", "ottoman", "roman"];

// Plurals ending in "ies" whose singular ends in "ie".
const IE_PLURALS: &[&str] = &[
    "cookies", "movies", "pies", "ties", "lies", "zombies", "calories", "brownies", "smoothies",
    "rookies", "hippies", "genies", "prairies", "goalies",
];

fn is_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u')
}

fn match_case(template: &str, word: String) -> String {
    if template.chars().next().is_some_and(char::is_uppercase) {
        let mut c = word.chars();
        match c.next() {
            Some(f) => f.to_uppercase().chain(c).collect(),
            None => word,
        }
    } else {
        word
    }
}

/// Plural of a single lowercase-compared word, preserving a leading capital.
pub fn pluralize_word(word: &str) -> String {
    let lower = word.to_lowercase();
    if lower.is_empty() {
        return word.to_string();
    }
    if INVARIANT.contains(&lower.as_str()) {
        return word.to_string();
    }
    if let Some((_, pl)) = IRREGULAR.iter().find(|(sg, _)| *sg == lower) {
        return match_case(word, pl.to_string());
    }
    // Compounds like "fisherman", "chairwoman".
    if lower.ends_with("man") && !MAN_REGULAR.contains(&lower.as_str()) {
        return format!("{}en", &word[..word.len() - 2]);
    }
    let ends = |s: &str| lower.ends_with(s);
    if ends("s") || ends("x") || ends("z") || ends("sh") || ends("ch") {
        return format!("{word}es");
    }
    let mut chars = lower.chars().rev();
    if let (Some('y'), Some(prev)) = (chars.next(), chars.next()) {
        if !is_vowel(prev) {
            return format!("{}ies", &word[..word.len() - 1]);
        }
    }
    format!("{word}s")
}

/// Pluralizes the head noun of a phrase.
///
/// The head is the last word, or the word before the first "of"
/// ("minister of finance" → "ministers of finance").
pub fn pluralize(phrase: &str) -> String {
    let words: Vec<&str> = phrase.split_whitespace().collect();
    if words.is_empty() {
        return phrase.to_string();
    }
    let head = words
        .iter()
        .position(|w| w.eq_ignore_ascii_case("of"))
        .filter(|&p| p > 0)
        .map(|p| p - 1)
        .unwrap_or(words.len() - 1);
    words
        .iter()
        .enumerate()
        .map(|(i, w)| if i == head { pluralize_word(w) } else { w.to_string() })
        .collect::<Vec<_>>()
        .join(" ")
}

/// Singular of a lowercase plural noun; returns the input when it does not
/// look plural.
pub fn singularize_word(word: &str) -> String {
    let lower = word.to_lowercase();
    if INVARIANT.contains(&lower.as_str()) {
        return lower;
    }
    if let Some((sg, _)) = IRREGULAR.iter().find(|(_, pl)| *pl == lower) {
        return sg.to_string();
    }
    if lower.ends_with("men") && lower.len() > 3 {
        let sg = format!("{}man", &lower[..lower.len() - 3]);
        if !MAN_REGULAR.contains(&sg.as_str()) {
            return sg;
        }
    }
    if lower.ends_with("ies") && lower.len() > 4 {
        if IE_PLURALS.contains(&lower.as_str()) {
            return lower[..lower.len() - 1].to_string();
        }
        return format!("{}y", &lower[..lower.len() - 3]);
    }
    for suffix in ["sses", "shes", "ches", "xes", "zzes"] {
        if lower.ends_with(suffix) {
            return lower[..lower.len() - 2].to_string();
        }
    }
    if lower.ends_with("ss") || lower.ends_with("us") || lower.ends_with("is") || lower.len() < 3 {
        return lower;
    }
    if let Some(stem) = lower.strip_suffix('s') {
        return stem.to_string();
    }
    lower
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regular_and_sibilant_plurals() {
        assert_eq!(pluralize("lawyer"), "lawyers");
        assert_eq!(pluralize("actress"), "actresses");
        assert_eq!(pluralize("church"), "churches");
        assert_eq!(pluralize("box"), "boxes");
        assert_eq!(pluralize("bush"), "bushes");
        assert_eq!(pluralize("baby"), "babies");
        assert_eq!(pluralize("attorney"), "attorneys");
    }

    #[test]
    fn irregular_plurals() {
        assert_eq!(pluralize("fisherman"), "fishermen");
        assert_eq!(pluralize("policewoman"), "policewomen");
        assert_eq!(pluralize("child"), "children");
        assert_eq!(pluralize("chef"), "chefs");
        assert_eq!(pluralize("knife"), "knives");
        assert_eq!(pluralize("German"), "Germans");
        assert_eq!(pluralize("sheep"), "sheep");
    }

    #[test]
    fn phrase_head_is_pluralized() {
        assert_eq!(pluralize("taxi driver"), "taxi drivers");
        assert_eq!(pluralize("web developer"), "web developers");
        assert_eq!(pluralize("minister of finance"), "ministers of finance");
        assert_eq!(pluralize("Firefighter"), "Firefighters");
    }

    #[test]
    fn singular_inverts_the_rules() {
        for (sg, pl) in [
            ("festival", "festivals"),
            ("suit", "suits"),
            ("actress", "actresses"),
            ("fisherman", "fishermen"),
            ("city", "cities"),
            ("cookie", "cookies"),
            ("dish", "dishes"),
            ("knife", "knives"),
            ("child", "children"),
        ] {
            assert_eq!(singularize_word(pl), sg, "{pl}");
        }
        assert_eq!(singularize_word("rice"), "rice");
        assert_eq!(singularize_word("glass"), "glass");
        assert_eq!(singularize_word("bus"), "bus");
    }
}
