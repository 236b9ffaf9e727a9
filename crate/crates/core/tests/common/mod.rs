#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::sync::Arc;

use factcheck_core::ingest::{FetchResult, Fetcher, FetcherConfig, Politeness, SiteProfile};
use serde::Deserialize;

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn fetcher() -> Fetcher {
    Fetcher::new(FetcherConfig::default(), Arc::new(Politeness::new())).unwrap()
}

/// Profile for the `site/` fixture served at `base`.
pub fn mock_site_profile(base: &str, rate_limit_ms: u64) -> SiteProfile {
    let text = format!(
        r#"
site_id = "mockcheck"
display_name = "Mock Check"
seed_urls = ["{base}/"]
rate_limit_ms = {rate_limit_ms}
article_pattern = "/articles/"

[extraction_rules]
title = "article h1.title"
body = "div.body p"
published_at = "time.published@datetime"
raw_verdict = ".rating strong"
raw_topic = "span.category"
"#
    );
    SiteProfile::from_toml_str(&text, Path::new("mockcheck.toml")).unwrap()
}

#[derive(Debug, Deserialize)]
pub struct GoldenCase {
    pub page: String,
    pub url: String,
    pub content_type: String,
    pub profile: String,
    pub expected: String,
}

#[derive(Debug, Deserialize)]
struct Cases {
    case: Vec<GoldenCase>,
}

pub fn golden_cases() -> Vec<GoldenCase> {
    let text = std::fs::read_to_string(fixtures().join("golden/cases.toml")).unwrap();
    toml::from_str::<Cases>(&text).unwrap().case
}

pub fn golden_page(case: &GoldenCase) -> (FetchResult, SiteProfile) {
    let dir = fixtures().join("golden");
    let page = FetchResult {
        url: url::Url::parse(&case.url).unwrap(),
        status: 200,
        content_type: case.content_type.clone(),
        body_bytes: std::fs::read(dir.join(&case.page)).unwrap(),
        fetched_at: chrono::Utc::now(),
    };
    let profile = SiteProfile::load(&dir.join(&case.profile)).unwrap();
    (page, profile)
}

pub fn golden_expected(case: &GoldenCase) -> String {
    std::fs::read_to_string(fixtures().join("golden").join(&case.expected)).unwrap()
}
