//! HTTP client for a model sidecar speaking the [`wire`](super::wire) protocol.

use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};
use std::thread;
use std::time::Duration;

use log::warn;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::wire::*;
use super::{Annotator, Embedder, NliModel, ProviderError, Summarizer};
use crate::ingest::SentenceAnnotation;

fn default_timeout_ms() -> u64 {
    30_000
}
fn default_max_batch() -> usize {
    32
}
fn default_retries() -> u32 {
    3
}
fn default_backoff_ms() -> u64 {
    200
}
fn default_pool_size() -> usize {
    8
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProviderEndpointConfig {
    pub base_url: String,
    #[serde(default = "default_timeout_ms")]
    pub timeout_ms: u64,
    #[serde(default = "default_max_batch")]
    pub max_batch: usize,
    #[serde(default = "default_retries")]
    pub retries: u32,
    /// Delay before the first retry; doubles on each further attempt.
    #[serde(default = "default_backoff_ms")]
    pub backoff_ms: u64,
    /// Idle connections kept per host.
    #[serde(default = "default_pool_size")]
    pub pool_size: usize,
}

impl ProviderEndpointConfig {
    pub fn new(base_url: impl Into<String>) -> Self {
        ProviderEndpointConfig {
            base_url: base_url.into(),
            timeout_ms: default_timeout_ms(),
            max_batch: default_max_batch(),
            retries: default_retries(),
            backoff_ms: default_backoff_ms(),
            pool_size: default_pool_size(),
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.max_batch < 1 {
            return Err(format!("{}: max_batch must be at least 1", self.base_url));
        }
        if self.timeout_ms == 0 {
            return Err(format!("{}: timeout_ms must be positive", self.base_url));
        }
        url::Url::parse(&self.base_url).map_err(|e| format!("{}: {e}", self.base_url))?;
        Ok(())
    }
}

/// Implements every provider trait against one sidecar endpoint.
pub struct RemoteProvider {
    config: ProviderEndpointConfig,
    http: reqwest::blocking::Client,
    base: String,
    next_id: AtomicU64,
    retry_count: AtomicU64,
    batch: AtomicUsize,
    embedding_dim: AtomicUsize,
}

impl RemoteProvider {
    pub fn new(config: ProviderEndpointConfig) -> Result<Self, ProviderError> {
        config.validate().map_err(|m| ProviderError::local(&config.base_url, m))?;
        let http = reqwest::blocking::Client::builder()
            .timeout(Duration::from_millis(config.timeout_ms))
            .pool_max_idle_per_host(config.pool_size)
            .build()
            .map_err(|e| ProviderError::Transport {
                endpoint: config.base_url.clone(),
                request_id: "init".into(),
                message: e.to_string(),
            })?;
        Ok(RemoteProvider {
            base: config.base_url.trim_end_matches('/').to_string(),
            batch: AtomicUsize::new(config.max_batch),
            config,
            http,
            next_id: AtomicU64::new(0),
            retry_count: AtomicU64::new(0),
            embedding_dim: AtomicUsize::new(0),
        })
    }

    /// Number of retried attempts since construction.
    pub fn retry_count(&self) -> u64 {
        self.retry_count.load(Ordering::Relaxed)
    }

    pub fn max_batch(&self) -> usize {
        self.batch.load(Ordering::Relaxed)
    }

    fn request_id(&self) -> String {
        format!("candle-{}", self.next_id.fetch_add(1, Ordering::Relaxed))
    }

    fn endpoint(&self, path: &str) -> String {
        format!("{}{}", self.base, path)
    }

    fn send_once(&self, path: &str, body: Option<&serde_json::Value>, id: &str) -> Result<String, ProviderError> {
        let endpoint = self.endpoint(path);
        let req = match body {
            Some(b) => self.http.post(&endpoint).json(b),
            None => self.http.get(&endpoint),
        };
        let transport = |e: reqwest::Error| {
            if e.is_timeout() {
                ProviderError::Timeout { endpoint: endpoint.clone(), request_id: id.to_string() }
            } else {
                ProviderError::Transport { endpoint: endpoint.clone(), request_id: id.to_string(), message: e.to_string() }
            }
        };
        let resp = req.header(REQUEST_ID_HEADER, id).send().map_err(transport)?;
        let status = resp.status();
        let text = resp.text().map_err(transport)?;
        if !status.is_success() {
            let body: String = text.chars().take(200).collect();
            return Err(ProviderError::Status {
                endpoint: endpoint.clone(),
                request_id: id.to_string(),
                code: status.as_u16(),
                body,
            });
        }
        Ok(text)
    }

    /// Sends with retries; returns the decoded body and the request id.
    fn call<Resp: DeserializeOwned>(&self, path: &str, body: Option<serde_json::Value>) -> Result<(Resp, String), ProviderError> {
        let id = self.request_id();
        let mut attempt = 0u32;
        let text = loop {
            match self.send_once(path, body.as_ref(), &id) {
                Ok(t) => break t,
                Err(e) if e.is_transient() && attempt < self.config.retries => {
                    let delay = self.config.backoff_ms.saturating_mul(1u64 << attempt.min(16));
                    warn!("{e}; retrying in {delay} ms");
                    self.retry_count.fetch_add(1, Ordering::Relaxed);
                    thread::sleep(Duration::from_millis(delay));
                    attempt += 1;
                }
                Err(e) => return Err(e),
            }
        };
        let resp = serde_json::from_str(&text).map_err(|e| self.mismatch(path, &id, e.to_string()))?;
        Ok((resp, id))
    }

    fn mismatch(&self, path: &str, id: &str, message: String) -> ProviderError {
        ProviderError::SchemaMismatch { endpoint: self.endpoint(path), request_id: id.to_string(), message }
    }

    fn post<Req: Serialize, Resp: DeserializeOwned>(&self, path: &str, req: &Req) -> Result<(Resp, String), ProviderError> {
        let body = serde_json::to_value(req).map_err(|e| ProviderError::local(path, e.to_string()))?;
        self.call(path, Some(body))
    }

    pub fn fetch_health(&self) -> Result<HealthResponse, ProviderError> {
        let (h, _): (HealthResponse, _) = self.call(HEALTH_PATH, None)?;
        if h.status != "ok" {
            return Err(self.mismatch(HEALTH_PATH, "health", format!("status {:?}", h.status)));
        }
        if h.max_batch < 1 {
            return Err(self.mismatch(HEALTH_PATH, "health", "max_batch below 1".into()));
        }
        self.batch.store(self.config.max_batch.min(h.max_batch), Ordering::Relaxed);
        if let Some(d) = h.embedding_dim {
            self.check_dim(d, HEALTH_PATH, "health")?;
        }
        Ok(h)
    }

    fn check_dim(&self, dim: usize, path: &str, id: &str) -> Result<(), ProviderError> {
        match self.embedding_dim.compare_exchange(0, dim, Ordering::Relaxed, Ordering::Relaxed) {
            Ok(_) => Ok(()),
            Err(prev) if prev == dim => Ok(()),
            Err(prev) => Err(self.mismatch(path, id, format!("embedding dimension changed from {prev} to {dim}"))),
        }
    }
}

impl Annotator for RemoteProvider {
    fn annotate(&self, text: &str) -> Result<Vec<SentenceAnnotation>, ProviderError> {
        Ok(self.annotate_batch(&[text])?.pop().unwrap_or_default())
    }

    fn annotate_batch(&self, texts: &[&str]) -> Result<Vec<Vec<SentenceAnnotation>>, ProviderError> {
        let mut out = Vec::with_capacity(texts.len());
        for chunk in texts.chunks(self.max_batch()) {
            let req = AnnotateRequest { texts: chunk.iter().map(|t| t.to_string()).collect() };
            let (resp, id): (AnnotateResponse, _) = self.post(ANNOTATE_PATH, &req)?;
            if resp.results.len() != chunk.len() {
                let m = format!("{} results for {} texts", resp.results.len(), chunk.len());
                return Err(self.mismatch(ANNOTATE_PATH, &id, m));
            }
            for r in resp.results {
                for s in &r.sentences {
                    s.validate().map_err(|m| self.mismatch(ANNOTATE_PATH, &id, m))?;
                }
                out.push(r.sentences);
            }
        }
        Ok(out)
    }

    fn health(&self) -> Result<(), ProviderError> {
        self.fetch_health().map(|_| ())
    }
}

impl Embedder for RemoteProvider {
    fn embed(&self, texts: &[&str]) -> Result<Vec<Vec<f64>>, ProviderError> {
        let mut out = Vec::with_capacity(texts.len());
        for chunk in texts.chunks(self.max_batch()) {
            let req = EmbedRequest { texts: chunk.iter().map(|t| t.to_string()).collect() };
            let (resp, id): (EmbedResponse, _) = self.post(EMBED_PATH, &req)?;
            if resp.vectors.len() != chunk.len() {
                let m = format!("{} vectors for {} texts", resp.vectors.len(), chunk.len());
                return Err(self.mismatch(EMBED_PATH, &id, m));
            }
            for v in resp.vectors {
                if v.is_empty() || v.iter().any(|x| !x.is_finite()) {
                    return Err(self.mismatch(EMBED_PATH, &id, "empty or non-finite vector".into()));
                }
                self.check_dim(v.len(), EMBED_PATH, &id)?;
                out.push(v);
            }
        }
        Ok(out)
    }

    fn health(&self) -> Result<(), ProviderError> {
        self.fetch_health().map(|_| ())
    }
}

impl NliModel for RemoteProvider {
    fn entail(&self, premise: &str, hypotheses: &[String]) -> Result<Vec<f64>, ProviderError> {
        let mut out = Vec::with_capacity(hypotheses.len());
        for chunk in hypotheses.chunks(self.max_batch()) {
            let req = NliRequest { premise: premise.to_string(), hypotheses: chunk.to_vec() };
            let (resp, id): (NliResponse, _) = self.post(NLI_PATH, &req)?;
            if resp.entail_probs.len() != chunk.len() {
                let m = format!("{} probabilities for {} hypotheses", resp.entail_probs.len(), chunk.len());
                return Err(self.mismatch(NLI_PATH, &id, m));
            }
            if let Some(p) = resp.entail_probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
                return Err(self.mismatch(NLI_PATH, &id, format!("probability {p} outside [0,1]")));
            }
            out.extend(resp.entail_probs);
        }
        Ok(out)
    }

    fn health(&self) -> Result<(), ProviderError> {
        self.fetch_health().map(|_| ())
    }
}

impl Summarizer for RemoteProvider {
    fn summarize(&self, sentences: &[&str]) -> Result<Option<String>, ProviderError> {
        let req = SummarizeRequest { sentences: sentences.iter().map(|s| s.to_string()).collect() };
        match self.post::<_, SummarizeResponse>(SUMMARIZE_PATH, &req) {
            Ok((r, _)) => Ok(Some(r.summary)),
            // 501: summarization disabled on the server.
            Err(ProviderError::Status { code: 501, .. }) => Ok(None),
            Err(e) => Err(e),
        }
    }

    fn health(&self) -> Result<(), ProviderError> {
        self.fetch_health().map(|_| ())
    }
}
