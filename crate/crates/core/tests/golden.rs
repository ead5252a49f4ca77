mod common;

use std::collections::HashSet;
use std::fs;
use std::path::Path;
use std::time::Instant;

use candle_engine::checkpoint::{read_jsonl, Stage};
use candle_engine::config::PipelineConfig;
use candle_engine::kbstore::read_kb;
use candle_engine::pipeline::{DetectRecord, FacetRecord, GenfilterRecord, Pipeline, PipelineError};

fn config(dir: &Path) -> PipelineConfig {
    let mut cfg = PipelineConfig::load(common::fixture("golden/pipeline.toml")).unwrap();
    cfg.checkpoint_dir = dir.to_path_buf();
    cfg.kb_path = None;
    cfg
}

fn kb_bytes(dir: &Path) -> Vec<u8> {
    fs::read(dir.join("kb.jsonl")).unwrap()
}

/// Every checkpoint file, keyed by relative path. The report is excluded
/// since it carries timings.
fn checkpoint_tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    for stage in Stage::ALL {
        let sd = dir.join(stage.dir_name());
        let mut names: Vec<_> = fs::read_dir(&sd).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
        names.sort();
        for n in names {
            out.push((format!("{}/{n}", stage.dir_name()), fs::read(sd.join(&n)).unwrap()));
        }
    }
    out.push(("kb.jsonl".into(), kb_bytes(dir)));
    out
}

#[test]
fn full_run_matches_golden_kb_every_time() {
    let golden = common::fixture("golden/kb.golden.jsonl");
    let mut runs = Vec::new();
    for _ in 0..3 {
        let dir = tempfile::tempdir().unwrap();
        let start = Instant::now();
        Pipeline::new(config(dir.path())).unwrap().run_all().unwrap();
        assert!(start.elapsed().as_secs() < 60);
        runs.push(kb_bytes(dir.path()));
    }
    if std::env::var_os("CANDLE_UPDATE_GOLDEN").is_some() {
        fs::write(&golden, &runs[0]).unwrap();
    }
    let want = fs::read(&golden).unwrap();
    for r in &runs {
        assert!(r == &want, "kb differs from {}", golden.display());
    }
}

#[test]
fn staged_runs_equal_a_full_run() {
    let full = tempfile::tempdir().unwrap();
    Pipeline::new(config(full.path())).unwrap().run_all().unwrap();

    let split = tempfile::tempdir().unwrap();
    let p = Pipeline::new(config(split.path())).unwrap();
    p.run(&[Stage::Ingest, Stage::Detect]).unwrap();
    p.run(&[Stage::Genfilter, Stage::Facetclf, Stage::Cluster]).unwrap();
    p.run(&[Stage::Concepts, Stage::Rank]).unwrap();
    assert_eq!(checkpoint_tree(full.path()), checkpoint_tree(split.path()));

    // Rerunning a middle stage and everything after it changes nothing.
    p.run(&[Stage::Facetclf, Stage::Cluster, Stage::Concepts, Stage::Rank]).unwrap();
    assert_eq!(checkpoint_tree(full.path()), checkpoint_tree(split.path()));
}

#[test]
fn stage_without_predecessor_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let p = Pipeline::new(config(dir.path())).unwrap();
    p.run(&[Stage::Ingest]).unwrap();
    let err = p.run(&[Stage::Genfilter]).unwrap_err();
    assert!(matches!(err, PipelineError::MissingCheckpoint { .. }), "{err}");
    assert_eq!(err.exit_code(), 2);
    assert!(!dir.path().join(Stage::Genfilter.dir_name()).exists());
}

#[test]
fn stage_outputs_shrink_and_scores_are_bounded() {
    let dir = tempfile::tempdir().unwrap();
    let p = Pipeline::new(config(dir.path())).unwrap();
    p.run_all().unwrap();
    let cp = p.checkpoints();
    for d in p.catalog().domains() {
        let name = d.id.as_str();
        let detect: Vec<DetectRecord> = read_jsonl(&cp.domain_file(Stage::Detect, name)).unwrap();
        let gen: Vec<GenfilterRecord> = read_jsonl(&cp.domain_file(Stage::Genfilter, name)).unwrap();
        let fac: Vec<FacetRecord> = read_jsonl(&cp.domain_file(Stage::Facetclf, name)).unwrap();
        let detected: HashSet<_> = detect.iter().map(|r| (&r.sent_id, &r.subject_id)).collect();
        let generic: HashSet<_> = gen.iter().filter(|r| r.accepted).map(|r| (&r.sent_id, &r.subject_id, &r.facet)).collect();
        assert!(generic.iter().all(|(s, j, _)| detected.contains(&(*s, *j))));
        for r in fac.iter().filter(|r| r.accepted) {
            assert!(generic.contains(&(&r.sent_id, &r.subject_id, &r.facet)));
            assert!(r.p_facet >= 0.5);
            assert!(r.counter_probs.values().all(|&c| c <= 0.3));
        }
    }
    let kb = read_kb(dir.path().join("kb.jsonl")).unwrap();
    assert!(!kb.is_empty());
    for r in &kb {
        let f = &r.feature_scores;
        for v in [f.distinctiveness, f.frequency, f.specificity, f.domain_relevance, f.combined] {
            assert!((0.0..=1.0).contains(&v), "{} {v}", r.cluster_id);
        }
        let mean = (f.distinctiveness + f.frequency + f.specificity + f.domain_relevance) / 4.0;
        assert!((f.combined - mean).abs() <= 1e-9);
        assert!(!r.concepts.is_empty());
        assert!(r.members.iter().map(|m| &m.source_host).collect::<HashSet<_>>().len() >= 2);
    }
}
