mod common;

use std::collections::VecDeque;
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Duration;

use candle_engine::config::PipelineConfig;
use candle_engine::ingest::SentenceAnnotation;
use candle_engine::pipeline::Pipeline;
use candle_engine::providers::reference::{annotate_text, reference_embedding, ReferenceNli};
use candle_engine::providers::remote::{ProviderEndpointConfig, RemoteProvider};
use candle_engine::providers::wire::*;
use candle_engine::providers::{contract, Annotator, Embedder, NliModel, ProviderError, ProviderSet, Summarizer};
use serde_json::{json, Value};
use tiny_http::{Header, Response, Server};

#[derive(Default)]
struct Behaviour {
    /// Status codes returned, one per request, before normal service.
    faults: VecDeque<u16>,
    drop_last_vector: bool,
    health_status: Option<String>,
    server_max_batch: Option<usize>,
    delay_ms: u64,
    summarize_disabled: bool,
}

#[derive(Clone, Debug)]
struct Seen {
    path: String,
    request_id: Option<String>,
    body: Value,
}

/// A sidecar stand-in backed by the reference providers.
struct Mock {
    url: String,
    behaviour: Arc<Mutex<Behaviour>>,
    seen: Arc<Mutex<Vec<Seen>>>,
}

impl Mock {
    fn start(b: Behaviour) -> Mock {
        let server = Arc::new(Server::http("127.0.0.1:0").unwrap());
        let port = server.server_addr().to_ip().unwrap().port();
        let behaviour = Arc::new(Mutex::new(b));
        let seen = Arc::new(Mutex::new(Vec::new()));
        let (bh, sn) = (behaviour.clone(), seen.clone());
        thread::spawn(move || {
            for mut req in server.incoming_requests() {
                let (bh, sn) = (bh.clone(), sn.clone());
                thread::spawn(move || {
                    let mut body = String::new();
                    req.as_reader().read_to_string(&mut body).unwrap();
                    let path = req.url().to_string();
                    let request_id = req
                        .headers()
                        .iter()
                        .find(|h| h.field.equiv(REQUEST_ID_HEADER))
                        .map(|h| h.value.as_str().to_string());
                    let body: Value = serde_json::from_str(&body).unwrap_or(Value::Null);
                    sn.lock().unwrap().push(Seen { path: path.clone(), request_id, body: body.clone() });
                    let (code, out, delay) = {
                        let mut b = bh.lock().unwrap();
                        match b.faults.pop_front() {
                            Some(code) => (code, json!({"error": "injected"}), b.delay_ms),
                            None => {
                                let (c, v) = serve(&b, &path, &body);
                                (c, v, b.delay_ms)
                            }
                        }
                    };
                    thread::sleep(Duration::from_millis(delay));
                    let ct = Header::from_bytes("Content-Type", "application/json").unwrap();
                    let _ = req.respond(Response::from_string(out.to_string()).with_status_code(code).with_header(ct));
                });
            }
        });
        Mock { url: format!("http://127.0.0.1:{port}"), behaviour, seen }
    }

    fn client(&self, f: impl FnOnce(&mut ProviderEndpointConfig)) -> RemoteProvider {
        let mut cfg = ProviderEndpointConfig::new(&self.url);
        cfg.backoff_ms = 1;
        f(&mut cfg);
        RemoteProvider::new(cfg).unwrap()
    }

    fn seen(&self) -> Vec<Seen> {
        self.seen.lock().unwrap().clone()
    }
}

fn strings(v: &Value) -> Vec<String> {
    v.as_array().unwrap().iter().map(|s| s.as_str().unwrap().to_string()).collect()
}

fn serve(b: &Behaviour, path: &str, body: &Value) -> (u16, Value) {
    match path {
        HEALTH_PATH => (
            200,
            json!({
                "status": b.health_status.clone().unwrap_or("ok".into()),
                "models": {"embed": "hashing"},
                "embedding_dim": 128,
                "max_batch": b.server_max_batch.unwrap_or(64),
            }),
        ),
        EMBED_PATH => {
            let mut vs: Vec<Vec<f64>> = strings(&body["texts"]).iter().map(|t| reference_embedding(t)).collect();
            if b.drop_last_vector {
                vs.pop();
            }
            (200, json!({ "vectors": vs }))
        }
        NLI_PATH => {
            let nli = ReferenceNli::new("This text is about {label}");
            let p: Vec<f64> = strings(&body["hypotheses"]).iter().map(|h| nli.probability(body["premise"].as_str().unwrap(), h)).collect();
            (200, json!({ "entail_probs": p }))
        }
        ANNOTATE_PATH => {
            let results: Vec<Value> = strings(&body["texts"])
                .iter()
                .map(|t| {
                    let s: Vec<SentenceAnnotation> = annotate_text(t);
                    json!({ "sentences": s })
                })
                .collect();
            (200, json!({ "results": results }))
        }
        SUMMARIZE_PATH if b.summarize_disabled => (501, json!({"error": "disabled"})),
        SUMMARIZE_PATH => (200, json!({ "summary": strings(&body["sentences"])[0] })),
        _ => (404, json!({"error": "no route"})),
    }
}

fn texts(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("sentence number {i} about rice")).collect()
}

#[test]
fn retries_a_transient_failure() {
    let mock = Mock::start(Behaviour { faults: VecDeque::from([503]), ..Default::default() });
    let c = mock.client(|_| {});
    let v = c.embed(&["Germans drink beer."]).unwrap();
    assert_eq!(v, vec![reference_embedding("Germans drink beer.")]);
    assert_eq!(c.retry_count(), 1);
    let seen = mock.seen();
    assert_eq!(seen.len(), 2);
    // A retried request keeps its id.
    assert_eq!(seen[0].request_id, seen[1].request_id);
    assert!(seen[0].request_id.as_deref().is_some_and(|id| !id.is_empty()));
}

#[test]
fn client_errors_are_not_retried() {
    let mock = Mock::start(Behaviour { faults: VecDeque::from([400]), ..Default::default() });
    let c = mock.client(|_| {});
    let err = c.embed(&["x"]).unwrap_err();
    assert!(matches!(err, ProviderError::Status { code: 400, .. }), "{err}");
    assert_eq!(c.retry_count(), 0);
    assert_eq!(mock.seen().len(), 1);
}

#[test]
fn gives_up_after_the_configured_retries() {
    let mock = Mock::start(Behaviour { faults: VecDeque::from([500, 502, 503, 504]), ..Default::default() });
    let c = mock.client(|c| c.retries = 2);
    assert!(matches!(c.embed(&["x"]), Err(ProviderError::Status { code: 503, .. })));
    assert_eq!(c.retry_count(), 2);
    assert_eq!(mock.seen().len(), 3);
}

#[test]
fn short_vector_list_is_a_schema_mismatch() {
    let mock = Mock::start(Behaviour { drop_last_vector: true, ..Default::default() });
    let c = mock.client(|_| {});
    let t = texts(8);
    let refs: Vec<&str> = t.iter().map(String::as_str).collect();
    let err = c.embed(&refs).unwrap_err();
    match &err {
        ProviderError::SchemaMismatch { message, request_id, .. } => {
            assert!(message.contains("7 vectors for 8 texts"), "{message}");
            assert_eq!(Some(request_id.clone()), mock.seen()[0].request_id);
        }
        other => panic!("{other}"),
    }
}

#[test]
fn batches_are_chunked_in_order() {
    let mock = Mock::start(Behaviour::default());
    let c = mock.client(|c| c.max_batch = 3);
    let t = texts(8);
    let refs: Vec<&str> = t.iter().map(String::as_str).collect();
    let v = c.embed(&refs).unwrap();
    let want: Vec<Vec<f64>> = refs.iter().map(|t| reference_embedding(t)).collect();
    assert_eq!(v, want);
    let sizes: Vec<usize> = mock.seen().iter().map(|s| s.body["texts"].as_array().unwrap().len()).collect();
    assert_eq!(sizes, [3, 3, 2]);
    let sent: Vec<String> = mock.seen().iter().flat_map(|s| strings(&s.body["texts"])).collect();
    assert_eq!(sent, t);
    let ids: std::collections::HashSet<_> = mock.seen().into_iter().map(|s| s.request_id).collect();
    assert_eq!(ids.len(), 3);
}

#[test]
fn health_lowers_the_batch_size() {
    let mock = Mock::start(Behaviour { server_max_batch: Some(2), ..Default::default() });
    let c = mock.client(|c| c.max_batch = 16);
    Embedder::health(&c).unwrap();
    assert_eq!(c.max_batch(), 2);
    let hyps: Vec<String> = ["food", "drinks", "politics", "business", "clothing"].iter().map(|l| format!("This text is about {l}")).collect();
    let p = c.entail("Germans drink beer.", &hyps).unwrap();
    assert_eq!(p.len(), 5);
    assert!(mock.seen().iter().filter(|s| s.path == NLI_PATH).all(|s| s.body["hypotheses"].as_array().unwrap().len() <= 2));
}

#[test]
fn health_reports_loading() {
    let mock = Mock::start(Behaviour { health_status: Some("loading".into()), ..Default::default() });
    let c = mock.client(|_| {});
    let err = NliModel::health(&c).unwrap_err();
    assert!(err.to_string().contains("loading"), "{err}");
    mock.behaviour.lock().unwrap().health_status = None;
    NliModel::health(&c).unwrap();
}

#[test]
fn slow_server_times_out() {
    let mock = Mock::start(Behaviour { delay_ms: 500, ..Default::default() });
    let c = mock.client(|c| {
        c.timeout_ms = 50;
        c.retries = 0;
    });
    assert!(matches!(c.embed(&["x"]), Err(ProviderError::Timeout { .. })));
}

#[test]
fn unreachable_server_is_a_transport_error() {
    let port = std::net::TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let mut cfg = ProviderEndpointConfig::new(format!("http://127.0.0.1:{port}"));
    cfg.retries = 0;
    let c = RemoteProvider::new(cfg).unwrap();
    let err = Embedder::health(&c).unwrap_err();
    assert!(matches!(err, ProviderError::Transport { .. }), "{err}");
}

#[test]
fn disabled_summarizer_declines() {
    let mock = Mock::start(Behaviour { summarize_disabled: true, ..Default::default() });
    let c = mock.client(|_| {});
    assert_eq!(c.summarize(&["a b c.", "d e f."]).unwrap(), None);
    assert_eq!(c.retry_count(), 0);
}

#[test]
fn annotations_match_the_reference() {
    let mock = Mock::start(Behaviour::default());
    let c = mock.client(|c| c.max_batch = 2);
    let t = ["Lawyers wear suits. They look smart.", "", "Germans like their currywurst."];
    let got = c.annotate_batch(&t).unwrap();
    let want: Vec<_> = t.iter().map(|x| annotate_text(x)).collect();
    assert_eq!(got, want);
}

fn remote_set(mock: &Mock) -> ProviderSet {
    let c = Arc::new(mock.client(|c| c.max_batch = 5));
    ProviderSet { annotator: c.clone(), embedder: c.clone(), nli: c.clone(), summarizer: c }
}

#[test]
fn remote_set_passes_the_provider_contract() {
    let mock = Mock::start(Behaviour::default());
    contract::check_all(&remote_set(&mock)).unwrap();
    contract::check_all(&ProviderSet::reference("This text is about {label}")).unwrap();
}

#[test]
fn pipeline_over_http_builds_the_golden_kb() {
    let mock = Mock::start(Behaviour { faults: VecDeque::from([503, 502]), summarize_disabled: true, ..Default::default() });
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = PipelineConfig::load(common::fixture("golden/pipeline.toml")).unwrap();
    cfg.checkpoint_dir = dir.path().to_path_buf();
    cfg.kb_path = None;
    Pipeline::with_providers(cfg, remote_set(&mock)).unwrap().run_all().unwrap();
    let got = std::fs::read(dir.path().join("kb.jsonl")).unwrap();
    let want = std::fs::read(common::fixture("golden/kb.golden.jsonl")).unwrap();
    assert!(got == want);
    // Every request carried an id.
    assert!(mock.seen().iter().all(|s| s.request_id.is_some()));
}
