use std::collections::HashSet;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// One extracted fact-check article.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArticleRecord {
    /// Hex SHA-256 of `canonical_url`.
    pub record_id: String,
    pub canonical_url: String,
    pub site_id: String,
    pub title: String,
    pub published_at: Option<NaiveDate>,
    pub body_text: String,
    pub raw_verdict: Option<String>,
    pub raw_topic: Option<String>,
}

/// Content-hash identifier of a canonical URL.
pub fn record_id_for(canonical_url: &str) -> String {
    hex::encode(Sha256::digest(canonical_url.as_bytes()))
}

/// Keeps the first record per canonical URL, preserving input order.
pub fn dedupe(records: impl IntoIterator<Item = ArticleRecord>) -> Vec<ArticleRecord> {
    let mut seen = HashSet::new();
    records
        .into_iter()
        .filter(|r| seen.insert(r.canonical_url.clone()))
        .collect()
}
