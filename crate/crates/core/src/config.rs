//! Engine configuration file.
//!
//! A flat TOML table. Relative paths resolve against the directory holding
//! the config file. Every hyperparameter has a default, so a minimal file
//! lists only `corpus_path`, `catalog_path` and `checkpoint_dir`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cluster::ClusterParams;
use crate::concepts::ConceptParams;
use crate::facetclf::{ClassifierConfig, DEFAULT_TEMPLATE};
use crate::genfilter::FilterParams;
use crate::providers::remote::{ProviderEndpointConfig, RemoteProvider};
use crate::providers::{ProviderError, ProviderSet};
use crate::rank::{PostFilterParams, DEFAULT_MASK_TOKEN};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}:{line}:{column}: {message}")]
    Parse { path: String, line: usize, column: usize, message: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ProviderSpec {
    #[default]
    Reference,
    Remote(ProviderEndpointConfig),
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProvidersConfig {
    #[serde(default)]
    pub annotator: ProviderSpec,
    #[serde(default)]
    pub embedder: ProviderSpec,
    #[serde(default)]
    pub nli: ProviderSpec,
    #[serde(default)]
    pub summarizer: ProviderSpec,
}

macro_rules! defaults {
    ($($name:ident: $ty:ty = $val:expr;)*) => {
        $(fn $name() -> $ty { $val })*
    };
}

defaults! {
    d_rho_plus: f64 = 0.5;
    d_rho_minus: f64 = 0.3;
    d_counter_labels: Vec<String> = vec!["politics".into(), "business".into()];
    d_template: String = DEFAULT_TEMPLATE.into();
    d_max_tokens: usize = 30;
    d_distance_threshold: f64 = 1.5;
    d_pair_cap: usize = 50_000;
    d_min_summary_size: usize = 3;
    d_max_summarized: usize = 500;
    d_min_support: f64 = 0.6;
    d_max_ngram: usize = 3;
    d_theta: f64 = 0.8;
    d_mask_token: String = DEFAULT_MASK_TOKEN.into();
    d_max_clusters: usize = 500;
    d_min_hosts: usize = 2;
    d_identical_fraction: f64 = 2.0 / 3.0;
    d_bad_member_fraction: f64 = 0.5;
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub corpus_path: PathBuf,
    pub catalog_path: PathBuf,
    pub checkpoint_dir: PathBuf,
    /// Final knowledge base; defaults to `<checkpoint_dir>/kb.jsonl`.
    #[serde(default)]
    pub kb_path: Option<PathBuf>,
    /// Bad-pattern file for the rank post-filter; none means no patterns.
    #[serde(default)]
    pub pattern_file: Option<PathBuf>,
    /// Worker threads; 0 picks one per core.
    #[serde(default)]
    pub threads: usize,

    #[serde(default = "d_rho_plus")]
    pub rho_plus: f64,
    #[serde(default = "d_rho_minus")]
    pub rho_minus: f64,
    #[serde(default = "d_counter_labels")]
    pub counter_labels: Vec<String>,
    #[serde(default = "d_template")]
    pub hypothesis_template: String,

    #[serde(default = "d_max_tokens")]
    pub max_tokens: usize,

    #[serde(default = "d_distance_threshold")]
    pub distance_threshold: f64,
    #[serde(default = "d_pair_cap")]
    pub pair_cap: usize,
    #[serde(default = "d_min_summary_size")]
    pub min_summary_size: usize,
    #[serde(default = "d_max_summarized")]
    pub max_summarized_clusters: usize,

    #[serde(default = "d_min_support")]
    pub min_support: f64,
    #[serde(default = "d_max_ngram")]
    pub max_ngram: usize,

    #[serde(default = "d_theta")]
    pub theta: f64,
    #[serde(default = "d_mask_token")]
    pub mask_token: String,
    #[serde(default = "d_max_clusters")]
    pub max_clusters_per_pair: usize,
    #[serde(default = "d_min_hosts")]
    pub min_source_hosts: usize,
    #[serde(default = "d_identical_fraction")]
    pub identical_fraction: f64,
    #[serde(default = "d_bad_member_fraction")]
    pub bad_member_fraction: f64,

    #[serde(default)]
    pub providers: ProvidersConfig,
}

fn line_col(src: &str, offset: usize) -> (usize, usize) {
    let before = &src[..offset.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

impl PipelineConfig {
    /// A configuration with every default, for the given paths.
    pub fn new(corpus_path: impl Into<PathBuf>, catalog_path: impl Into<PathBuf>, checkpoint_dir: impl Into<PathBuf>) -> Self {
        let mut t = toml::Table::new();
        t.insert("corpus_path".into(), toml::Value::String(corpus_path.into().display().to_string()));
        t.insert("catalog_path".into(), toml::Value::String(catalog_path.into().display().to_string()));
        t.insert("checkpoint_dir".into(), toml::Value::String(checkpoint_dir.into().display().to_string()));
        toml::Value::Table(t).try_into().expect("defaults deserialize")
    }

    pub fn from_toml_str(src: &str, origin: &str) -> Result<Self, ConfigError> {
        toml::from_str(src).map_err(|e| {
            let (line, column) = e.span().map(|s| line_col(src, s.start)).unwrap_or((0, 0));
            ConfigError::Parse { path: origin.to_string(), line, column, message: e.message().to_string() }
        })
    }

    /// Reads, resolves relative paths against the file's directory and
    /// validates.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let src = fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        let mut cfg = Self::from_toml_str(&src, &path.display().to_string())?;
        let base = path.parent().unwrap_or(Path::new("")).to_path_buf();
        cfg.resolve_paths(&base);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.corpus_path);
        fix(&mut self.catalog_path);
        fix(&mut self.checkpoint_dir);
        if let Some(p) = self.kb_path.as_mut() {
            fix(p);
        }
        if let Some(p) = self.pattern_file.as_mut() {
            fix(p);
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        self.classifier().validate().map_err(ConfigError::Invalid)?;
        for (name, v) in [
            ("theta", self.theta),
            ("min_support", self.min_support),
            ("identical_fraction", self.identical_fraction),
            ("bad_member_fraction", self.bad_member_fraction),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return bad(format!("{name} = {v} is outside [0, 1]"));
            }
        }
        if !(self.distance_threshold >= 0.0 && self.distance_threshold.is_finite()) {
            return bad(format!("distance_threshold = {} must be a non-negative number", self.distance_threshold));
        }
        for (name, v) in [
            ("max_tokens", self.max_tokens),
            ("pair_cap", self.pair_cap),
            ("min_summary_size", self.min_summary_size),
            ("max_ngram", self.max_ngram),
        ] {
            if v == 0 {
                return bad(format!("{name} must be at least 1"));
            }
        }
        if self.mask_token.trim().is_empty() {
            return bad("mask_token must not be empty".into());
        }
        for spec in [&self.providers.annotator, &self.providers.embedder, &self.providers.nli, &self.providers.summarizer] {
            if let ProviderSpec::Remote(e) = spec {
                e.validate().map_err(ConfigError::Invalid)?;
            }
        }
        Ok(())
    }

    pub fn kb_path(&self) -> PathBuf {
        self.kb_path.clone().unwrap_or_else(|| self.checkpoint_dir.join("kb.jsonl"))
    }

    pub fn classifier(&self) -> ClassifierConfig {
        ClassifierConfig {
            rho_plus: self.rho_plus,
            rho_minus: self.rho_minus,
            counter_labels: self.counter_labels.clone(),
            hypothesis_template: self.hypothesis_template.clone(),
        }
    }

    pub fn filter_params(&self) -> FilterParams {
        FilterParams { max_tokens: self.max_tokens }
    }

    pub fn cluster_params(&self) -> ClusterParams {
        ClusterParams {
            distance_threshold: self.distance_threshold,
            pair_cap: self.pair_cap,
            min_summary_size: self.min_summary_size,
            max_summarized_clusters: self.max_summarized_clusters,
        }
    }

    pub fn concept_params(&self) -> ConceptParams {
        ConceptParams { min_support: self.min_support, max_n: self.max_ngram }
    }

    pub fn post_filter_params(&self) -> PostFilterParams {
        PostFilterParams {
            max_clusters_per_pair: self.max_clusters_per_pair,
            identical_fraction: self.identical_fraction,
            min_source_hosts: self.min_source_hosts,
            bad_member_fraction: self.bad_member_fraction,
        }
    }

    /// Instantiates the configured providers. Remote clients are created
    /// but not contacted.
    pub fn build_providers(&self) -> Result<ProviderSet, ProviderError> {
        let mut set = ProviderSet::reference(&self.hypothesis_template);
        let p = &self.providers;
        if let ProviderSpec::Remote(e) = &p.annotator {
            set.annotator = std::sync::Arc::new(RemoteProvider::new(e.clone())?);
        }
        if let ProviderSpec::Remote(e) = &p.embedder {
            set.embedder = std::sync::Arc::new(RemoteProvider::new(e.clone())?);
        }
        if let ProviderSpec::Remote(e) = &p.nli {
            set.nli = std::sync::Arc::new(RemoteProvider::new(e.clone())?);
        }
        if let ProviderSpec::Remote(e) = &p.summarizer {
            set.summarizer = std::sync::Arc::new(RemoteProvider::new(e.clone())?);
        }
        Ok(set)
    }
}
