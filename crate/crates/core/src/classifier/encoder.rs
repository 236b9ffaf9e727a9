use std::thread;
use std::time::Duration;

use reqwest::blocking::Client;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Where and how to reach a dense text encoder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EncoderBackendRef {
    pub endpoint: String,
    pub dims: usize,
    #[serde(default = "default_timeout_ms")]
    pub timeout_ms: u64,
    #[serde(default = "default_batch_limit")]
    pub batch_limit: usize,
    /// Requests allowed in flight at once.
    #[serde(default = "default_in_flight")]
    pub max_in_flight: usize,
}

fn default_timeout_ms() -> u64 {
    30_000
}

fn default_batch_limit() -> usize {
    32
}

fn default_in_flight() -> usize {
    1
}

impl EncoderBackendRef {
    pub fn new(endpoint: impl Into<String>, dims: usize) -> Self {
        Self {
            endpoint: endpoint.into(),
            dims,
            timeout_ms: default_timeout_ms(),
            batch_limit: default_batch_limit(),
            max_in_flight: default_in_flight(),
        }
    }
}

/// Request body: `{"texts": [...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncoderRequest {
    pub texts: Vec<String>,
}

/// Response body: `{"vectors": [[...], ...], "dims": n}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncoderResponse {
    pub vectors: Vec<Vec<f64>>,
    pub dims: usize,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EncoderError {
    #[error("encoder backend misconfigured: {0}")]
    Config(String),
    #[error("encoder unreachable (retriable): {0}")]
    Retriable(String),
    #[error("encoder protocol error: {0}")]
    Protocol(String),
}

impl EncoderError {
    pub fn is_retriable(&self) -> bool {
        matches!(self, EncoderError::Retriable(_))
    }
}

/// Embeds `texts` in batches of at most `batch_limit`, returning one
/// `dims`-long vector per text in input order.
pub fn embed_remote(texts: &[String], backend: &EncoderBackendRef) -> Result<Vec<Vec<f64>>, EncoderError> {
    if texts.is_empty() {
        return Err(EncoderError::Config("no texts to embed".into()));
    }
    if backend.dims == 0 || backend.batch_limit == 0 {
        return Err(EncoderError::Config("dims and batch_limit must be at least 1".into()));
    }
    let client = Client::builder()
        .timeout(Duration::from_millis(backend.timeout_ms))
        .build()
        .map_err(|e| EncoderError::Config(e.to_string()))?;

    let batches: Vec<&[String]> = texts.chunks(backend.batch_limit).collect();
    let mut out = Vec::with_capacity(texts.len());
    for wave in batches.chunks(backend.max_in_flight.max(1)) {
        let results: Vec<Result<Vec<Vec<f64>>, EncoderError>> = if wave.len() == 1 {
            vec![request_batch(&client, backend, wave[0])]
        } else {
            thread::scope(|s| {
                let handles: Vec<_> = wave
                    .iter()
                    .map(|batch| s.spawn(|| request_batch(&client, backend, batch)))
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("encoder request thread panicked"))
                    .collect()
            })
        };
        for result in results {
            out.extend(result?);
        }
    }
    Ok(out)
}

fn request_batch(
    client: &Client,
    backend: &EncoderBackendRef,
    batch: &[String],
) -> Result<Vec<Vec<f64>>, EncoderError> {
    let body = EncoderRequest { texts: batch.to_vec() };
    let response = client.post(&backend.endpoint).json(&body).send().map_err(|e| {
        if e.is_timeout() || e.is_connect() || e.is_request() {
            EncoderError::Retriable(e.to_string())
        } else {
            EncoderError::Protocol(e.to_string())
        }
    })?;
    let status = response.status();
    if status.as_u16() != 200 {
        return Err(EncoderError::Protocol(format!("unexpected status {status}")));
    }
    let parsed: EncoderResponse = response
        .json()
        .map_err(|e| EncoderError::Protocol(format!("bad response body: {e}")))?;
    if parsed.dims != backend.dims {
        return Err(EncoderError::Protocol(format!(
            "dimension mismatch: expected {}, got {}",
            backend.dims, parsed.dims
        )));
    }
    if parsed.vectors.len() != batch.len() {
        return Err(EncoderError::Protocol(format!(
            "expected {} vectors, got {}",
            batch.len(),
            parsed.vectors.len()
        )));
    }
    if let Some(v) = parsed.vectors.iter().find(|v| v.len() != backend.dims) {
        return Err(EncoderError::Protocol(format!(
            "dimension mismatch: expected {}, got {}",
            backend.dims,
            v.len()
        )));
    }
    if parsed.vectors.iter().flatten().any(|x| !x.is_finite()) {
        return Err(EncoderError::Protocol("non-finite vector component".into()));
    }
    Ok(parsed.vectors)
}
