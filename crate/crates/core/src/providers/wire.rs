//! JSON bodies of the provider HTTP protocol.
//!
//! | method | path            | request               | response            |
//! |--------|-----------------|-----------------------|---------------------|
//! | POST   | `/v1/annotate`  | [`AnnotateRequest`]   | [`AnnotateResponse`]|
//! | POST   | `/v1/embed`     | [`EmbedRequest`]      | [`EmbedResponse`]   |
//! | POST   | `/v1/nli`       | [`NliRequest`]        | [`NliResponse`]     |
//! | POST   | `/v1/summarize` | [`SummarizeRequest`]  | [`SummarizeResponse`]|
//! | GET    | `/v1/health`    |                       | [`HealthResponse`]  |
//!
//! Each request carries an `X-Request-Id` header that servers echo in logs.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::ingest::SentenceAnnotation;

pub const ANNOTATE_PATH: &str = "/v1/annotate";
pub const EMBED_PATH: &str = "/v1/embed";
pub const NLI_PATH: &str = "/v1/nli";
pub const SUMMARIZE_PATH: &str = "/v1/summarize";
pub const HEALTH_PATH: &str = "/v1/health";
pub const REQUEST_ID_HEADER: &str = "X-Request-Id";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnotateRequest {
    pub texts: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnotateResult {
    pub sentences: Vec<SentenceAnnotation>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnotateResponse {
    pub results: Vec<AnnotateResult>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbedRequest {
    pub texts: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbedResponse {
    pub vectors: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NliRequest {
    pub premise: String,
    pub hypotheses: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NliResponse {
    pub entail_probs: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummarizeRequest {
    pub sentences: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummarizeResponse {
    pub summary: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HealthResponse {
    pub status: String,
    #[serde(default)]
    pub models: BTreeMap<String, String>,
    #[serde(default)]
    pub embedding_dim: Option<usize>,
    pub max_batch: usize,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_names_on_the_wire() {
        let v = serde_json::to_value(NliRequest { premise: "p".into(), hypotheses: vec!["h".into()] }).unwrap();
        assert_eq!(v, serde_json::json!({"premise": "p", "hypotheses": ["h"]}));
        let r: EmbedResponse = serde_json::from_str(r#"{"vectors": [[1, 0.5]]}"#).unwrap();
        assert_eq!(r.vectors, vec![vec![1.0, 0.5]]);
        let h: HealthResponse =
            serde_json::from_str(r#"{"status":"ok","models":{"embed":"m"},"embedding_dim":384,"max_batch":32}"#).unwrap();
        assert_eq!(h.embedding_dim, Some(384));
    }
}
