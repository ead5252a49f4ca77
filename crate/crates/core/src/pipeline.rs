//! Stage orchestration over a checkpoint directory.
//!
//! Every stage reads the previous stage's checkpoint, writes its own files
//! atomically and then a `_SUCCESS` marker. A stage refuses to start when
//! its predecessor has no marker and is not scheduled earlier in the same
//! run.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt::Write as _;
use std::time::Instant;

use log::{info, warn};
use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{load_catalog, DomainId, FacetId, SubjectCatalog, SubjectId};
use crate::checkpoint::{read_jsonl, write_atomic, write_jsonl, CheckpointDir, CheckpointError, Stage};
use crate::cluster::summarize::summarize_cluster;
use crate::cluster::{
    cluster_id, embed_assertions, groups, hac::hac_cluster, normalize, summary_candidates, truncate_pair, AssertionCluster,
    ClusterError, SummarySource,
};
use crate::concepts::{alias_mask, extract_concepts, Concept, ConceptMember};
use crate::config::PipelineConfig;
use crate::detect::{run_detect_stage, AliasIndex, MatchMethod};
use crate::facetclf::classify_all_facets;
use crate::genfilter::{active_rules_for, is_generic, RuleId, RuleSet};
use crate::ingest::{annotate, read_corpus, AnnotatedSentence, SentId};
use crate::kbstore::{storage_order, write_kb, KbError, KbMember, KbRecord};
use crate::providers::{ProviderError, ProviderSet};
use crate::rank::{
    distinctiveness_scores, domain_relevance, frequency_scores, mask_subjects, post_filter, specificity, BadPatterns,
    FeatureScores,
};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("stage `{stage}` needs a completed `{needs}` checkpoint; run `candle run --stages {needs}` first")]
    MissingCheckpoint { stage: Stage, needs: Stage },
    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),
    #[error(transparent)]
    Kb(#[from] KbError),
    #[error("provider failure: {0}")]
    Provider(#[from] ProviderError),
    #[error("stage `{stage}` failed: {message}")]
    Stage { stage: Stage, message: String },
}

impl PipelineError {
    /// Process exit code: 1 configuration, 2 stage failure, 3 provider.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) => 1,
            PipelineError::Provider(_) => 3,
            _ => 2,
        }
    }

    fn stage(stage: Stage, message: impl ToString) -> Self {
        PipelineError::Stage { stage, message: message.to_string() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageReport {
    pub stage: String,
    pub input_count: usize,
    pub output_count: usize,
    pub duration_ms: u64,
    #[serde(default)]
    pub warnings: Vec<String>,
    /// Stage-specific counters, e.g. post-filter drops per reason.
    #[serde(default)]
    pub details: BTreeMap<String, usize>,
}

impl StageReport {
    /// Share of inputs removed by the stage, when it had any input.
    pub fn reduction(&self) -> Option<f64> {
        (self.input_count > 0).then(|| 1.0 - self.output_count as f64 / self.input_count as f64)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectRecord {
    pub sent_id: SentId,
    pub subject_id: SubjectId,
    pub method: MatchMethod,
    pub span: [usize; 2],
    pub matched_surface: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenfilterRecord {
    pub sent_id: SentId,
    pub subject_id: SubjectId,
    pub facet: FacetId,
    pub accepted: bool,
    pub failed_rule: Option<RuleId>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FacetRecord {
    pub sent_id: SentId,
    pub subject_id: SubjectId,
    pub facet: FacetId,
    pub p_facet: f64,
    pub counter_probs: BTreeMap<String, f64>,
    pub accepted: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConceptRecord {
    #[serde(flatten)]
    pub cluster: AssertionCluster,
    pub concepts: Vec<Concept>,
}

struct StageOutput {
    input: usize,
    output: usize,
    warnings: Vec<String>,
    details: BTreeMap<String, usize>,
    files: Vec<String>,
}

impl StageOutput {
    fn new(input: usize, output: usize, files: Vec<String>) -> Self {
        StageOutput { input, output, warnings: Vec::new(), details: BTreeMap::new(), files }
    }
}

pub struct Pipeline {
    config: PipelineConfig,
    catalog: SubjectCatalog,
    index: AliasIndex,
    providers: ProviderSet,
    patterns: BadPatterns,
    checkpoints: CheckpointDir,
}

fn distinct<'a>(ids: impl IntoIterator<Item = &'a SentId>) -> usize {
    ids.into_iter().collect::<HashSet<_>>().len()
}

impl Pipeline {
    /// Builds the pipeline with the providers named in the configuration.
    pub fn new(config: PipelineConfig) -> Result<Self, PipelineError> {
        let providers = config.build_providers()?;
        Self::with_providers(config, providers)
    }

    pub fn with_providers(config: PipelineConfig, providers: ProviderSet) -> Result<Self, PipelineError> {
        config.validate().map_err(|e| PipelineError::Config(e.to_string()))?;
        let catalog = load_catalog(&config.catalog_path).map_err(|e| PipelineError::Config(e.to_string()))?;
        let patterns = match &config.pattern_file {
            Some(p) => BadPatterns::load(p).map_err(|e| PipelineError::Config(e.to_string()))?,
            None => BadPatterns::default(),
        };
        let index = AliasIndex::new(&catalog);
        let checkpoints = CheckpointDir::new(&config.checkpoint_dir);
        Ok(Pipeline { config, catalog, index, providers, patterns, checkpoints })
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    pub fn catalog(&self) -> &SubjectCatalog {
        &self.catalog
    }

    pub fn checkpoints(&self) -> &CheckpointDir {
        &self.checkpoints
    }

    pub fn run_all(&self) -> Result<Vec<StageReport>, PipelineError> {
        self.run(&Stage::ALL)
    }

    /// Runs the given stages in pipeline order.
    pub fn run(&self, stages: &[Stage]) -> Result<Vec<StageReport>, PipelineError> {
        let mut order = stages.to_vec();
        order.sort();
        order.dedup();
        for (i, &st) in order.iter().enumerate() {
            if let Some(prev) = st.previous() {
                if !order[..i].contains(&prev) && !self.checkpoints.is_complete(prev) {
                    return Err(PipelineError::MissingCheckpoint { stage: st, needs: prev });
                }
            }
        }
        let work = || -> Result<Vec<StageReport>, PipelineError> {
            let mut reports = Vec::new();
            for &st in &order {
                let r = self.run_stage(st)?;
                save_report(&self.checkpoints, &r)?;
                reports.push(r);
            }
            Ok(reports)
        };
        if self.config.threads > 0 {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(self.config.threads)
                .build()
                .map_err(|e| PipelineError::Config(format!("thread pool: {e}")))?;
            pool.install(work)
        } else {
            work()
        }
    }

    fn health(&self, stage: Stage) -> Result<(), ProviderError> {
        let p = &self.providers;
        match stage {
            Stage::Ingest => p.annotator.health(),
            Stage::Facetclf => p.nli.health(),
            Stage::Cluster => {
                p.embedder.health()?;
                p.summarizer.health()?;
                p.annotator.health()
            }
            Stage::Rank => p.embedder.health(),
            _ => Ok(()),
        }
    }

    fn run_stage(&self, stage: Stage) -> Result<StageReport, PipelineError> {
        self.health(stage)?;
        self.checkpoints.begin(stage)?;
        info!("stage {stage}: start");
        let t = Instant::now();
        let out = match stage {
            Stage::Ingest => self.ingest()?,
            Stage::Detect => self.detect()?,
            Stage::Genfilter => self.genfilter()?,
            Stage::Facetclf => self.facetclf()?,
            Stage::Cluster => self.cluster()?,
            Stage::Concepts => self.concepts()?,
            Stage::Rank => self.rank()?,
        };
        self.checkpoints.finish(stage, &out.files)?;
        let report = StageReport {
            stage: stage.name().to_string(),
            input_count: out.input,
            output_count: out.output,
            duration_ms: t.elapsed().as_millis() as u64,
            warnings: out.warnings,
            details: out.details,
        };
        info!("stage {stage}: {} in, {} out, {} ms", report.input_count, report.output_count, report.duration_ms);
        Ok(report)
    }

    fn write_domains<T: Serialize>(&self, stage: Stage, mut by_domain: BTreeMap<DomainId, Vec<T>>) -> Result<Vec<String>, PipelineError> {
        let mut files = Vec::new();
        for d in self.catalog.domains() {
            let rows = by_domain.remove(&d.id).unwrap_or_default();
            write_jsonl(&self.checkpoints.domain_file(stage, d.id.as_str()), &rows)?;
            files.push(format!("{}.jsonl", d.id));
        }
        Ok(files)
    }

    fn read_domains<T: DeserializeOwned>(&self, stage: Stage) -> Result<Vec<T>, PipelineError> {
        let mut out = Vec::new();
        for d in self.catalog.domains() {
            out.extend(read_jsonl(&self.checkpoints.domain_file(stage, d.id.as_str()))?);
        }
        Ok(out)
    }

    fn domain_of(&self, stage: Stage, subject: &SubjectId) -> Result<DomainId, PipelineError> {
        self.index
            .domain_of(subject)
            .cloned()
            .ok_or_else(|| PipelineError::stage(stage, format!("checkpoint names subject `{subject}`, which is not in the catalog")))
    }

    /// Ingested sentences whose id is in `keep`.
    fn sentences(&self, keep: &HashSet<&SentId>) -> Result<HashMap<SentId, AnnotatedSentence>, PipelineError> {
        let all: Vec<AnnotatedSentence> = read_jsonl(&self.checkpoints.sentences())?;
        Ok(all.into_iter().filter(|s| keep.contains(&s.sent_id)).map(|s| (s.sent_id.clone(), s)).collect())
    }

    fn sentence<'a>(
        map: &'a HashMap<SentId, AnnotatedSentence>,
        stage: Stage,
        id: &SentId,
    ) -> Result<&'a AnnotatedSentence, PipelineError> {
        map.get(id).ok_or_else(|| PipelineError::stage(stage, format!("sentence {id} is missing from the ingest checkpoint")))
    }

    fn ingest(&self) -> Result<StageOutput, PipelineError> {
        let mut reader = read_corpus(&self.config.corpus_path).map_err(|e| PipelineError::stage(Stage::Ingest, e))?;
        let mut docs = Vec::new();
        let mut seen = HashSet::new();
        let mut duplicates = 0;
        for doc in &mut reader {
            let doc = doc.map_err(|e| PipelineError::stage(Stage::Ingest, e))?;
            if !seen.insert(doc.doc_id.clone()) {
                warn!("duplicate document id {}; keeping the first", doc.doc_id);
                duplicates += 1;
                continue;
            }
            docs.push(doc);
        }
        let annotator = &*self.providers.annotator;
        let results: Vec<_> = docs.par_iter().map(|d| annotate(d, annotator)).collect();
        let mut sentences = Vec::new();
        let mut failed = 0;
        for (doc, r) in docs.iter().zip(results) {
            match r {
                Ok(s) => sentences.extend(s),
                Err(e) => {
                    warn!("document {}: annotation failed: {e} (request {})", doc.doc_id, e.request_id());
                    failed += 1;
                }
            }
        }
        write_jsonl(&self.checkpoints.sentences(), &sentences)?;
        let skipped = reader.skipped();
        let mut out = StageOutput::new(docs.len() + duplicates + skipped, sentences.len(), vec!["sentences.jsonl".into()]);
        for (n, what) in [(skipped, "malformed corpus records skipped"), (duplicates, "duplicate documents skipped"), (failed, "documents failed annotation")] {
            if n > 0 {
                out.warnings.push(format!("{n} {what}"));
            }
        }
        out.details.insert("documents".into(), docs.len());
        Ok(out)
    }

    fn detect(&self) -> Result<StageOutput, PipelineError> {
        let sentences: Vec<AnnotatedSentence> = read_jsonl(&self.checkpoints.sentences())?;
        let (hits, stats) = run_detect_stage(sentences, &self.index);
        let mut by_domain: BTreeMap<DomainId, Vec<DetectRecord>> = BTreeMap::new();
        for (_, matches) in hits {
            for m in matches {
                let d = self.domain_of(Stage::Detect, &m.subject)?;
                by_domain.entry(d).or_default().push(DetectRecord {
                    sent_id: m.sentence,
                    subject_id: m.subject,
                    method: m.method,
                    span: m.char_span,
                    matched_surface: m.matched_surface,
                });
            }
        }
        let files = self.write_domains(Stage::Detect, by_domain)?;
        let mut out = StageOutput::new(stats.input, stats.output, files);
        out.details = stats.matches_per_domain.into_iter().map(|(d, n)| (format!("matches:{d}"), n)).collect();
        Ok(out)
    }

    fn genfilter(&self) -> Result<StageOutput, PipelineError> {
        let detected: Vec<DetectRecord> = self.read_domains(Stage::Detect)?;
        let mut seen = HashSet::new();
        let pairs: Vec<(SentId, SubjectId)> = detected
            .into_iter()
            .map(|r| (r.sent_id, r.subject_id))
            .filter(|p| seen.insert(p.clone()))
            .collect();
        let input = distinct(pairs.iter().map(|p| &p.0));
        let sents = self.sentences(&pairs.iter().map(|p| &p.0).collect())?;
        let mut rules: HashMap<(DomainId, FacetId), RuleSet> = HashMap::new();
        for d in self.catalog.domains() {
            for f in &d.facets {
                rules.insert((d.id.clone(), f.id.clone()), active_rules_for(d, f));
            }
        }
        let params = self.config.filter_params();
        let rows: Vec<(DomainId, Vec<GenfilterRecord>)> = pairs
            .par_iter()
            .map(|(sid, subject)| {
                let did = self.domain_of(Stage::Genfilter, subject)?;
                let domain = self.catalog.domain(&did).expect("indexed domain exists");
                let s = Self::sentence(&sents, Stage::Genfilter, sid)?;
                let recs = domain
                    .facets
                    .iter()
                    .map(|f| {
                        let d = is_generic(s, &rules[&(did.clone(), f.id.clone())], &params);
                        GenfilterRecord {
                            sent_id: sid.clone(),
                            subject_id: subject.clone(),
                            facet: f.id.clone(),
                            accepted: d.accepted,
                            failed_rule: d.failed_rule,
                        }
                    })
                    .collect();
                Ok((did, recs))
            })
            .collect::<Result<_, PipelineError>>()?;
        let mut by_domain: BTreeMap<DomainId, Vec<GenfilterRecord>> = BTreeMap::new();
        let mut failed: BTreeMap<String, usize> = BTreeMap::new();
        for (d, recs) in rows {
            for r in &recs {
                if let Some(rule) = r.failed_rule {
                    *failed.entry(format!("failed:{rule}")).or_default() += 1;
                }
            }
            by_domain.entry(d).or_default().extend(recs);
        }
        let output = distinct(by_domain.values().flatten().filter(|r| r.accepted).map(|r| &r.sent_id));
        let files = self.write_domains(Stage::Genfilter, by_domain)?;
        let mut out = StageOutput::new(input, output, files);
        out.details = failed;
        Ok(out)
    }

    fn facetclf(&self) -> Result<StageOutput, PipelineError> {
        let accepted: Vec<GenfilterRecord> =
            self.read_domains::<GenfilterRecord>(Stage::Genfilter)?.into_iter().filter(|r| r.accepted).collect();
        let input = distinct(accepted.iter().map(|r| &r.sent_id));
        let sents = self.sentences(&accepted.iter().map(|r| &r.sent_id).collect())?;
        let mut units: BTreeMap<(SentId, DomainId), Vec<(SubjectId, FacetId)>> = BTreeMap::new();
        for r in &accepted {
            let d = self.domain_of(Stage::Facetclf, &r.subject_id)?;
            units.entry((r.sent_id.clone(), d)).or_default().push((r.subject_id.clone(), r.facet.clone()));
        }
        let units: Vec<_> = units.into_iter().collect();
        let cfg = self.config.classifier();
        let nli = &*self.providers.nli;
        let rows: Vec<Result<(DomainId, Vec<FacetRecord>), String>> = units
            .par_iter()
            .map(|((sid, did), wanted)| {
                let domain = self.catalog.domain(did).expect("indexed domain exists");
                let s = sents.get(sid).ok_or_else(|| format!("sentence {sid} missing from the ingest checkpoint"))?;
                let decisions = classify_all_facets(sid, &s.text, domain, &cfg, nli).map_err(|e| {
                    warn!("sentence {sid}: classification failed: {e} (request {})", e.request_id());
                    format!("{sid}: {e}")
                })?;
                let recs = wanted
                    .iter()
                    .filter_map(|(subject, facet)| {
                        decisions.iter().find(|d| &d.facet == facet).map(|d| FacetRecord {
                            sent_id: sid.clone(),
                            subject_id: subject.clone(),
                            facet: facet.clone(),
                            p_facet: d.p_facet,
                            counter_probs: d.counter_probs.clone(),
                            accepted: d.accepted,
                        })
                    })
                    .collect();
                Ok((did.clone(), recs))
            })
            .collect();
        let mut by_domain: BTreeMap<DomainId, Vec<FacetRecord>> = BTreeMap::new();
        let mut dropped = 0;
        for r in rows {
            match r {
                Ok((d, recs)) => by_domain.entry(d).or_default().extend(recs),
                Err(_) => dropped += 1,
            }
        }
        let output = distinct(by_domain.values().flatten().filter(|r| r.accepted).map(|r| &r.sent_id));
        let files = self.write_domains(Stage::Facetclf, by_domain)?;
        let mut out = StageOutput::new(input, output, files);
        if dropped > 0 {
            out.warnings.push(format!("{dropped} sentence-domain units dropped after classifier failures"));
        }
        Ok(out)
    }

    fn cluster_pair(
        &self,
        subject: &SubjectId,
        facet: &FacetId,
        ids: Vec<SentId>,
        sents: &HashMap<SentId, AnnotatedSentence>,
    ) -> Result<(Vec<AssertionCluster>, usize), ClusterError> {
        let params = self.config.cluster_params();
        let t = truncate_pair(ids, params.pair_cap, |id| id);
        let members: Vec<&AnnotatedSentence> = t.kept.iter().map(|id| &sents[id]).collect();
        let items: Vec<(SentId, &str)> = members.iter().map(|s| (s.sent_id.clone(), s.text.as_str())).collect();
        let emb = embed_assertions(&items, &*self.providers.embedder)?;
        let vectors: Vec<Vec<f64>> = t.kept.iter().map(|id| emb[id].clone()).collect();
        let labels = hac_cluster(&vectors, params.distance_threshold)?;
        let gs = groups(&labels);
        let chosen: BTreeSet<usize> =
            summary_candidates(&gs, params.min_summary_size, params.max_summarized_clusters).into_iter().collect();
        let clusters = gs
            .iter()
            .enumerate()
            .map(|(label, idx)| {
                let mut c = AssertionCluster {
                    cluster_id: cluster_id(subject, facet, label),
                    subject: subject.clone(),
                    facet: facet.clone(),
                    members: idx.iter().map(|&i| t.kept[i].clone()).collect(),
                    summary: None,
                    summary_source: SummarySource::None,
                    summary_tokens: Vec::new(),
                };
                if chosen.contains(&label) {
                    let texts: Vec<&str> = idx.iter().map(|&i| members[i].text.as_str()).collect();
                    let tokens: Vec<&[_]> = idx.iter().map(|&i| members[i].tokens.as_slice()).collect();
                    let vecs: Vec<&[f64]> = idx.iter().map(|&i| vectors[i].as_slice()).collect();
                    let s = summarize_cluster(&texts, &tokens, &vecs, &*self.providers.summarizer, &*self.providers.annotator);
                    c.summary = Some(s.text);
                    c.summary_source = s.source;
                    c.summary_tokens = s.tokens;
                }
                c
            })
            .collect();
        Ok((clusters, t.dropped))
    }

    fn cluster(&self) -> Result<StageOutput, PipelineError> {
        let accepted: Vec<FacetRecord> =
            self.read_domains::<FacetRecord>(Stage::Facetclf)?.into_iter().filter(|r| r.accepted).collect();
        let mut pairs: BTreeMap<(SubjectId, FacetId), BTreeSet<SentId>> = BTreeMap::new();
        for r in &accepted {
            pairs.entry((r.subject_id.clone(), r.facet.clone())).or_default().insert(r.sent_id.clone());
        }
        let input: usize = pairs.values().map(BTreeSet::len).sum();
        let sents = self.sentences(&accepted.iter().map(|r| &r.sent_id).collect())?;
        for id in pairs.values().flatten() {
            Self::sentence(&sents, Stage::Cluster, id)?;
        }
        let pairs: Vec<_> = pairs.into_iter().collect();
        let results: Vec<_> = pairs
            .par_iter()
            .map(|((subject, facet), ids)| self.cluster_pair(subject, facet, ids.iter().cloned().collect(), &sents))
            .collect();
        let mut by_domain: BTreeMap<DomainId, Vec<AssertionCluster>> = BTreeMap::new();
        let mut out = StageOutput::new(input, 0, Vec::new());
        let (mut truncated, mut failed) = (0, 0);
        for (((subject, facet), _), r) in pairs.iter().zip(results) {
            match r {
                Ok((clusters, dropped)) => {
                    if dropped > 0 {
                        truncated += 1;
                        out.warnings.push(format!("{subject}/{facet}: {dropped} assertions over the pair cap dropped"));
                    }
                    out.output += clusters.len();
                    by_domain.entry(self.domain_of(Stage::Cluster, subject)?).or_default().extend(clusters);
                }
                Err(e) => {
                    warn!("pair {subject}/{facet} failed: {e}");
                    out.warnings.push(format!("{subject}/{facet}: clustering failed: {e}"));
                    failed += 1;
                }
            }
        }
        out.details.insert("pairs".into(), pairs.len());
        out.details.insert("pairs_truncated".into(), truncated);
        out.details.insert("pairs_failed".into(), failed);
        out.details.insert(
            "summarized".into(),
            by_domain.values().flatten().filter(|c| c.summary.is_some()).count(),
        );
        out.files = self.write_domains(Stage::Cluster, by_domain)?;
        Ok(out)
    }

    fn concepts(&self) -> Result<StageOutput, PipelineError> {
        let clusters: Vec<AssertionCluster> = self.read_domains(Stage::Cluster)?;
        let sents = self.sentences(&clusters.iter().flat_map(|c| &c.members).collect())?;
        let params = self.config.concept_params();
        let rows: Vec<ConceptRecord> = clusters
            .into_par_iter()
            .map(|c| {
                let mut members = Vec::with_capacity(c.members.len());
                for id in &c.members {
                    let s = Self::sentence(&sents, Stage::Concepts, id)?;
                    members.push(ConceptMember { tokens: &s.tokens, masked: alias_mask(&s.text, &s.tokens, &self.index, &c.subject) });
                }
                let concepts = extract_concepts(&members, &params);
                Ok(ConceptRecord { cluster: c, concepts })
            })
            .collect::<Result<_, PipelineError>>()?;
        let input = rows.len();
        let output = rows.iter().filter(|r| !r.concepts.is_empty()).count();
        let mut by_domain: BTreeMap<DomainId, Vec<ConceptRecord>> = BTreeMap::new();
        for r in rows {
            by_domain.entry(self.domain_of(Stage::Concepts, &r.cluster.subject)?).or_default().push(r);
        }
        let files = self.write_domains(Stage::Concepts, by_domain)?;
        Ok(StageOutput::new(input, output, files))
    }

    /// Distinctiveness for every record, computed within each
    /// (domain, facet) group of summarized clusters.
    fn distinctiveness(&self, recs: &[ConceptRecord]) -> Result<Vec<f64>, PipelineError> {
        let mut groups: BTreeMap<(DomainId, FacetId), Vec<usize>> = BTreeMap::new();
        for (i, r) in recs.iter().enumerate() {
            let d = self.domain_of(Stage::Rank, &r.cluster.subject)?;
            groups.entry((d, r.cluster.facet.clone())).or_default().push(i);
        }
        let mut out = vec![0.0; recs.len()];
        for idx in groups.values() {
            let masked: Vec<String> = idx
                .iter()
                .map(|&i| {
                    let c = &recs[i].cluster;
                    let text = c.summary.as_deref().unwrap_or_default();
                    mask_subjects(text, &c.summary_tokens, &self.index, &self.config.mask_token)
                })
                .collect();
            let texts: Vec<&str> = masked.iter().map(String::as_str).collect();
            let mut vectors = self.providers.embedder.embed(&texts)?;
            if vectors.len() != texts.len() {
                return Err(ProviderError::local("embed", format!("{} vectors for {} texts", vectors.len(), texts.len())).into());
            }
            for (v, t) in vectors.iter_mut().zip(&texts) {
                if !normalize(v) {
                    return Err(PipelineError::stage(Stage::Rank, format!("degenerate embedding for summary {t:?}")));
                }
            }
            let sizes: Vec<usize> = idx.iter().map(|&i| recs[i].cluster.members.len()).collect();
            for (&i, s) in idx.iter().zip(distinctiveness_scores(&sizes, &vectors, self.config.theta)) {
                out[i] = s;
            }
        }
        Ok(out)
    }

    fn rank(&self) -> Result<StageOutput, PipelineError> {
        let recs: Vec<ConceptRecord> =
            self.read_domains::<ConceptRecord>(Stage::Concepts)?.into_iter().filter(|r| r.cluster.summary.is_some()).collect();
        let probs: HashMap<(SentId, SubjectId, FacetId), f64> = self
            .read_domains::<FacetRecord>(Stage::Facetclf)?
            .into_iter()
            .filter(|r| r.accepted)
            .map(|r| ((r.sent_id, r.subject_id, r.facet), r.p_facet))
            .collect();
        let sents = self.sentences(&recs.iter().flat_map(|r| &r.cluster.members).collect())?;
        let dist = self.distinctiveness(&recs)?;

        let mut pairs: BTreeMap<(SubjectId, FacetId), Vec<usize>> = BTreeMap::new();
        for (i, r) in recs.iter().enumerate() {
            pairs.entry((r.cluster.subject.clone(), r.cluster.facet.clone())).or_default().push(i);
        }
        let post = self.config.post_filter_params();
        let mut kept: Vec<KbRecord> = Vec::new();
        let mut dropped: BTreeMap<String, usize> = BTreeMap::new();
        for idx in pairs.values() {
            let sizes: Vec<usize> = idx.iter().map(|&i| recs[i].cluster.members.len()).collect();
            let freq = frequency_scores(&sizes);
            let mut records = Vec::with_capacity(idx.len());
            for (k, &i) in idx.iter().enumerate() {
                let c = &recs[i].cluster;
                let mut member_probs = Vec::with_capacity(c.members.len());
                let mut members = Vec::with_capacity(c.members.len());
                for id in &c.members {
                    let p = probs.get(&(id.clone(), c.subject.clone(), c.facet.clone())).ok_or_else(|| {
                        PipelineError::stage(Stage::Rank, format!("cluster {}: member {id} has no facet probability", c.cluster_id))
                    })?;
                    member_probs.push(*p);
                    let s = Self::sentence(&sents, Stage::Rank, id)?;
                    members.push(KbMember {
                        sent_id: id.clone(),
                        text: s.text.clone(),
                        source_url: s.source_url.clone(),
                        source_host: s.source_host.clone(),
                    });
                }
                records.push(KbRecord {
                    cluster_id: c.cluster_id.clone(),
                    subject: c.subject.clone(),
                    facet: c.facet.clone(),
                    summary: c.summary.clone().unwrap_or_default(),
                    concepts: recs[i].concepts.clone(),
                    feature_scores: FeatureScores::new(freq[k], dist[i], specificity(&c.summary_tokens), domain_relevance(&member_probs)),
                    members,
                });
            }
            let (survivors, counts) = post_filter(records, &self.patterns, &post);
            for (name, n) in [
                ("no_concepts", counts.no_concepts),
                ("repeated", counts.repeated),
                ("few_hosts", counts.few_hosts),
                ("bad_pattern", counts.bad_pattern),
                ("over_cap", counts.over_cap),
            ] {
                *dropped.entry(format!("dropped:{name}")).or_default() += n;
            }
            kept.extend(survivors);
        }
        let mut by_domain: BTreeMap<DomainId, Vec<KbRecord>> = BTreeMap::new();
        for r in &kept {
            by_domain.entry(self.domain_of(Stage::Rank, &r.subject)?).or_default().push(r.clone());
        }
        by_domain.values_mut().for_each(|v| v.sort_by(storage_order));
        let files = self.write_domains(Stage::Rank, by_domain)?;
        let written = write_kb(&kept, self.config.kb_path())?;
        let mut out = StageOutput::new(recs.len(), written, files);
        out.details = dropped;
        Ok(out)
    }
}

/// Reports saved by earlier runs, in stage order.
pub fn load_reports(checkpoints: &CheckpointDir) -> Result<Vec<StageReport>, PipelineError> {
    let path = checkpoints.report_path();
    if !path.exists() {
        return Ok(Vec::new());
    }
    let bytes = std::fs::read(&path).map_err(|source| CheckpointError::Io { path: path.clone(), source })?;
    serde_json::from_slice(&bytes)
        .map_err(|e| CheckpointError::Parse { path, line: e.line(), message: e.to_string() }.into())
}

fn stage_rank(name: &str) -> usize {
    name.parse::<Stage>().map_or(usize::MAX, |s| s as usize)
}

/// Replaces the stored report for `report.stage`, keeping the others.
pub fn save_report(checkpoints: &CheckpointDir, report: &StageReport) -> Result<(), PipelineError> {
    let mut all = load_reports(checkpoints).unwrap_or_default();
    all.retain(|r| r.stage != report.stage);
    all.push(report.clone());
    all.sort_by_key(|r| stage_rank(&r.stage));
    let path = checkpoints.report_path();
    let mut bytes = serde_json::to_vec_pretty(&all).expect("reports serialize");
    bytes.push(b'\n');
    write_atomic(&path, &bytes).map_err(|source| CheckpointError::Io { path, source })?;
    Ok(())
}

/// Plain-text table of stage counts and reductions.
pub fn format_report(reports: &[StageReport]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{:<10} {:>10} {:>10} {:>10} {:>10}", "stage", "input", "output", "reduction", "ms");
    for r in reports {
        let red = r.reduction().map_or_else(|| "-".to_string(), |x| format!("{:.1}%", 100.0 * x));
        let _ = writeln!(s, "{:<10} {:>10} {:>10} {:>10} {:>10}", r.stage, r.input_count, r.output_count, red, r.duration_ms);
        for w in &r.warnings {
            let _ = writeln!(s, "  warning: {w}");
        }
        for (k, v) in &r.details {
            let _ = writeln!(s, "  {k}: {v}");
        }
    }
    s
}
