//! Subject catalog: cultural domains, their subjects with aliases, the
//! facets classified per domain, and per-domain/per-facet rule toggles.
//!
//! The catalog is a TOML file. See `docs/formats.md` for the schema; every
//! table rejects unknown keys.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::genfilter::RuleId;
use crate::text::normalize_phrase;

pub use crate::inflect::pluralize;

/// Facet id reserved for the fallback "other" bucket.
pub const OTHER_FACET: &str = "other";

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("cannot read catalog {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("catalog parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("invalid catalog: {0}")]
    Validation(String),
}

macro_rules! id_newtype {
    ($name:ident) => {
        #[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub String);

        impl $name {
            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                $name(s.to_string())
            }
        }
    };
}

id_newtype!(DomainId);
id_newtype!(SubjectId);
id_newtype!(FacetId);

#[derive(Clone, Debug, PartialEq)]
pub struct Facet {
    pub id: FacetId,
    /// Label inserted into the hypothesis template, e.g. "drinks".
    pub hypothesis_text: String,
    pub rule_toggles: BTreeMap<RuleId, bool>,
}

impl Facet {
    pub fn is_other(&self) -> bool {
        self.id.as_str() == OTHER_FACET
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Domain {
    pub id: DomainId,
    pub facets: Vec<Facet>,
    pub rule_toggles: BTreeMap<RuleId, bool>,
    pub ner_tags: BTreeSet<String>,
}

impl Domain {
    pub fn facet(&self, id: &FacetId) -> Option<&Facet> {
        self.facets.iter().find(|f| &f.id == id)
    }

    /// Facets scored by the classifier, i.e. everything but "other".
    pub fn classified_facets(&self) -> impl Iterator<Item = &Facet> {
        self.facets.iter().filter(|f| !f.is_other())
    }

    pub fn has_other(&self) -> bool {
        self.facets.iter().any(Facet::is_other)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Subject {
    pub id: SubjectId,
    pub domain: DomainId,
    pub canonical_name: String,
    pub aliases: Vec<String>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SubjectCatalog {
    domains: Vec<Domain>,
    subjects: Vec<Subject>,
    subject_index: HashMap<SubjectId, usize>,
    domain_index: HashMap<DomainId, usize>,
}

impl SubjectCatalog {
    pub fn domains(&self) -> &[Domain] {
        &self.domains
    }

    pub fn subjects(&self) -> &[Subject] {
        &self.subjects
    }

    pub fn domain(&self, id: &DomainId) -> Option<&Domain> {
        self.domain_index.get(id).map(|&i| &self.domains[i])
    }

    pub fn subject(&self, id: &SubjectId) -> Option<&Subject> {
        self.subject_index.get(id).map(|&i| &self.subjects[i])
    }

    pub fn subject_domain(&self, id: &SubjectId) -> Option<&Domain> {
        self.subject(id).and_then(|s| self.domain(&s.domain))
    }

    pub fn subjects_in<'a>(&'a self, domain: &'a DomainId) -> impl Iterator<Item = &'a Subject> + 'a {
        self.subjects.iter().filter(move |s| &s.domain == domain)
    }

    pub fn is_empty(&self) -> bool {
        self.subjects.is_empty()
    }

    pub fn from_toml_str(src: &str) -> Result<Self, CatalogError> {
        let file: CatalogFile = toml::from_str(src).map_err(|e| {
            let (line, column) = e.span().map(|s| line_col(src, s.start)).unwrap_or((0, 0));
            CatalogError::Parse { line, column, message: e.message().to_string() }
        })?;
        build(file)
    }
}

fn line_col(src: &str, offset: usize) -> (usize, usize) {
    let before = &src[..offset.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CatalogFile {
    #[serde(default)]
    domains: Vec<DomainFile>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DomainFile {
    id: String,
    #[serde(default)]
    ner_tags: Vec<String>,
    #[serde(default)]
    pluralize_aliases: Option<bool>,
    #[serde(default)]
    rule_toggles: BTreeMap<RuleId, bool>,
    facets: Vec<FacetFile>,
    #[serde(default)]
    subjects: Vec<SubjectFile>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FacetFile {
    id: String,
    hypothesis: String,
    #[serde(default)]
    rule_toggles: BTreeMap<RuleId, bool>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SubjectFile {
    id: String,
    name: String,
    #[serde(default)]
    aliases: Vec<String>,
}

fn is_occupation(domain_id: &str) -> bool {
    domain_id == "occupation" || domain_id.starts_with("occupation.")
}

fn build(file: CatalogFile) -> Result<SubjectCatalog, CatalogError> {
    let invalid = |m: String| CatalogError::Validation(m);
    let mut catalog = SubjectCatalog::default();

    for d in file.domains {
        let domain_id = d.id.trim().to_string();
        if domain_id.is_empty() {
            return Err(invalid("domain with empty id".into()));
        }
        if catalog.domain_index.contains_key(&DomainId(domain_id.clone())) {
            return Err(invalid(format!("duplicate domain id `{domain_id}`")));
        }
        if d.facets.is_empty() {
            return Err(invalid(format!("domain `{domain_id}` has no facets")));
        }
        let mut facets: Vec<Facet> = Vec::with_capacity(d.facets.len());
        for f in d.facets {
            let id = f.id.trim().to_string();
            if id.is_empty() {
                return Err(invalid(format!("domain `{domain_id}`: facet with empty id")));
            }
            if f.hypothesis.trim().is_empty() {
                return Err(invalid(format!("domain `{domain_id}`: facet `{id}` has an empty hypothesis")));
            }
            if facets.iter().any(|x| x.id.0 == id) {
                return Err(invalid(format!("domain `{domain_id}`: duplicate facet id `{id}`")));
            }
            facets.push(Facet { id: FacetId(id), hypothesis_text: f.hypothesis.trim().to_string(), rule_toggles: f.rule_toggles });
        }

        let pluralize_aliases = d.pluralize_aliases.unwrap_or_else(|| is_occupation(&domain_id));
        // normalized alias -> subject id, for the within-domain uniqueness check
        let mut seen_alias: HashMap<String, String> = HashMap::new();
        for s in d.subjects {
            let id = s.id.trim().to_string();
            if id.is_empty() {
                return Err(invalid(format!("domain `{domain_id}`: subject with empty id")));
            }
            if catalog.subject_index.contains_key(&SubjectId(id.clone())) {
                return Err(invalid(format!("duplicate subject id `{id}`")));
            }
            let name = s.name.trim().to_string();
            if name.is_empty() {
                return Err(invalid(format!("subject `{id}` has an empty name")));
            }
            let mut aliases: Vec<String> = Vec::new();
            let mut normalized: BTreeSet<String> = BTreeSet::new();
            let mut push = |a: &str, aliases: &mut Vec<String>| -> Result<(), CatalogError> {
                let a = a.split_whitespace().collect::<Vec<_>>().join(" ");
                if a.is_empty() {
                    return Err(CatalogError::Validation(format!("subject `{id}` has an empty alias")));
                }
                if normalized.insert(normalize_phrase(&a)) {
                    aliases.push(a);
                }
                Ok(())
            };
            push(&name, &mut aliases)?;
            for a in &s.aliases {
                push(a, &mut aliases)?;
            }
            if pluralize_aliases {
                let plurals: Vec<String> = aliases.iter().map(|a| pluralize(a)).collect();
                for p in plurals {
                    push(&p, &mut aliases)?;
                }
            }
            for a in &aliases {
                if let Some(other) = seen_alias.insert(normalize_phrase(a), id.clone()) {
                    return Err(invalid(format!(
                        "domain `{domain_id}`: alias `{a}` is shared by subjects `{other}` and `{id}`"
                    )));
                }
            }
            catalog.subject_index.insert(SubjectId(id.clone()), catalog.subjects.len());
            catalog.subjects.push(Subject {
                id: SubjectId(id),
                domain: DomainId(domain_id.clone()),
                canonical_name: name,
                aliases,
            });
        }

        catalog.domain_index.insert(DomainId(domain_id.clone()), catalog.domains.len());
        catalog.domains.push(Domain {
            id: DomainId(domain_id),
            facets,
            rule_toggles: d.rule_toggles,
            ner_tags: d.ner_tags.into_iter().map(|t| t.trim().to_uppercase()).collect(),
        });
    }
    Ok(catalog)
}

pub fn load_catalog(path: impl AsRef<Path>) -> Result<SubjectCatalog, CatalogError> {
    let path = path.as_ref();
    let src = std::fs::read_to_string(path)
        .map_err(|source| CatalogError::Io { path: path.display().to_string(), source })?;
    SubjectCatalog::from_toml_str(&src)
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
[[domains]]
id = "geography.country"
ner_tags = ["GPE", "NORP"]
rule_toggles = { "R03-FIRSTWORD" = false }
facets = [{ id = "food", hypothesis = "food" }]

[[domains.subjects]]
id = "us"
name = "United States"
aliases = ["United States", "the U.S.", "the States"]

[[domains]]
id = "occupation"
facets = [{ id = "behaviors", hypothesis = "behaviors" }, { id = "other", hypothesis = "other" }]

[[domains.subjects]]
id = "lawyer"
name = "lawyer"
"#;

    #[test]
    fn loads_aliases_and_plurals() {
        let c = SubjectCatalog::from_toml_str(BASE).unwrap();
        let us = c.subject(&"us".into()).unwrap();
        assert_eq!(us.aliases, ["United States", "the U.S.", "the States"]);
        let lawyer = c.subject(&"lawyer".into()).unwrap();
        assert_eq!(lawyer.aliases, ["lawyer", "lawyers"]);
        let geo = c.domain(&"geography.country".into()).unwrap();
        assert_eq!(geo.rule_toggles.get(&RuleId::FirstWord), Some(&false));
        assert!(geo.ner_tags.contains("GPE"));
        assert!(!geo.has_other());
        assert!(c.domain(&"occupation".into()).unwrap().has_other());
    }

    #[test]
    fn canonical_name_appears_exactly_once() {
        let c = SubjectCatalog::from_toml_str(BASE).unwrap();
        for s in c.subjects() {
            let n = s.aliases.iter().filter(|a| normalize_phrase(a) == normalize_phrase(&s.canonical_name)).count();
            assert_eq!(n, 1, "{}", s.id);
        }
    }

    #[test]
    fn empty_catalog_loads() {
        let c = SubjectCatalog::from_toml_str("").unwrap();
        assert!(c.is_empty());
        assert!(c.domains().is_empty());
    }

    #[test]
    fn duplicate_alias_in_domain_names_both_subjects() {
        let src = format!("{BASE}\n[[domains.subjects]]\nid = \"attorney\"\nname = \"attorney\"\naliases = [\"Lawyer\"]\n");
        let err = SubjectCatalog::from_toml_str(&src).unwrap_err().to_string();
        assert!(err.contains("lawyer") && err.contains("attorney"), "{err}");
    }

    #[test]
    fn duplicate_alias_across_domains_is_allowed() {
        let src = format!(
            "{BASE}\n[[domains]]\nid = \"religion\"\nfacets = [{{ id = \"rituals\", hypothesis = \"rituals\" }}]\n[[domains.subjects]]\nid = \"states-religion\"\nname = \"the States\"\n"
        );
        assert!(SubjectCatalog::from_toml_str(&src).is_ok());
    }

    #[test]
    fn duplicate_subject_id_is_rejected() {
        let src = format!("{BASE}\n[[domains.subjects]]\nid = \"lawyer\"\nname = \"solicitor\"\n");
        assert!(matches!(SubjectCatalog::from_toml_str(&src), Err(CatalogError::Validation(_))));
    }

    #[test]
    fn unknown_keys_and_rules_report_position() {
        let src = BASE.replace("ner_tags", "ner_tagz");
        match SubjectCatalog::from_toml_str(&src) {
            Err(CatalogError::Parse { line, message, .. }) => {
                assert_eq!(line, 4, "{message}");
                assert!(message.contains("ner_tagz"), "{message}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
        let src = BASE.replace("R03-FIRSTWORD", "R42-NOPE");
        assert!(matches!(SubjectCatalog::from_toml_str(&src), Err(CatalogError::Parse { line: 5, .. })));
    }

    #[test]
    fn empty_facets_or_hypothesis_rejected() {
        let src = BASE.replace(r#"facets = [{ id = "food", hypothesis = "food" }]"#, "facets = []");
        assert!(SubjectCatalog::from_toml_str(&src).is_err());
        let src = BASE.replace(r#"hypothesis = "food""#, r#"hypothesis = " ""#);
        assert!(SubjectCatalog::from_toml_str(&src).is_err());
    }

    #[test]
    fn loading_is_deterministic() {
        assert_eq!(SubjectCatalog::from_toml_str(BASE).unwrap(), SubjectCatalog::from_toml_str(BASE).unwrap());
    }
}
