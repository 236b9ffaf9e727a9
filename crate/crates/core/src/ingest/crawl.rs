use std::collections::{HashSet, VecDeque};
use std::time::Duration;

use super::extract::{extract_from_document, is_html, parse_html};
use super::fetch::{FetchError, Fetcher};
use super::profile::{host_key, SiteProfile};
use super::record::ArticleRecord;
use super::url::canonicalize_parsed;
use serde::Serialize;

/// Outcome counters for one site crawl.
///
/// Every page request that reached the network is counted in `fetched` and in
/// exactly one of `extracted`, `failed` or `skipped`. Robots-denied URLs are
/// never requested and are counted separately.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CrawlReport {
    pub site_id: String,
    pub fetched: usize,
    pub extracted: usize,
    pub failed: usize,
    pub skipped: usize,
    pub robots_denied: usize,
    /// Seeds that could not be reached at all.
    pub unreachable_seeds: Vec<String>,
    /// `(url, reason)` for each failed page.
    pub failures: Vec<(String, String)>,
}

impl CrawlReport {
    pub fn seed_unreachable(&self) -> bool {
        !self.unreachable_seeds.is_empty()
    }

    pub fn is_balanced(&self) -> bool {
        self.fetched == self.extracted + self.failed + self.skipped
    }
}

/// Breadth-first crawl of one site, returning the extracted records in
/// discovery order.
pub fn crawl_site(fetcher: &Fetcher, profile: &SiteProfile, budget: usize) -> (Vec<ArticleRecord>, CrawlReport) {
    let mut records = Vec::new();
    let report = crawl_site_with(fetcher, profile, budget, |r| records.push(r));
    (records, report)
}

/// Streaming form of [`crawl_site`]: each record is handed to `sink` as soon
/// as it is extracted. Page failures are recorded, never fatal.
pub fn crawl_site_with(
    fetcher: &Fetcher,
    profile: &SiteProfile,
    budget: usize,
    mut sink: impl FnMut(ArticleRecord),
) -> CrawlReport {
    let budget = budget.min(profile.max_pages);
    let rate_limit = Duration::from_millis(profile.rate_limit_ms);
    let hosts = profile.hosts();
    let mut report = CrawlReport {
        site_id: profile.site_id.clone(),
        ..CrawlReport::default()
    };

    let mut queue = VecDeque::new();
    let mut seen = HashSet::new();
    let mut seeds = HashSet::new();
    for seed in &profile.seed_urls {
        let canon = canonicalize_parsed(seed.clone());
        if seen.insert(canon.to_string()) {
            seeds.insert(canon.to_string());
            queue.push_back(canon);
        }
    }
    let mut emitted = HashSet::new();

    while report.fetched < budget {
        let Some(url) = queue.pop_front() else { break };
        let page = match fetcher.fetch_page(&url, rate_limit) {
            Ok(page) => page,
            Err(FetchError::RobotsDenied { .. }) => {
                log::debug!("{url}: robots denied");
                report.robots_denied += 1;
                continue;
            }
            Err(err) => {
                report.fetched += 1;
                report.failed += 1;
                if seeds.contains(url.as_str()) && err.is_retriable() {
                    report.unreachable_seeds.push(url.to_string());
                }
                log::warn!("{err}");
                report.failures.push((url.to_string(), err.to_string()));
                continue;
            }
        };
        report.fetched += 1;

        if !page.is_success() {
            report.failed += 1;
            report
                .failures
                .push((url.to_string(), format!("HTTP status {}", page.status)));
            continue;
        }
        let final_url = canonicalize_parsed(page.url.clone());
        seen.insert(final_url.to_string());
        let on_site = host_key(&final_url).is_some_and(|h| hosts.contains(&h));
        if !is_html(&page.content_type) || !on_site {
            report.skipped += 1;
            continue;
        }
        let doc = parse_html(&page).expect("content type checked above");

        for link in doc.select(&profile.link_selector) {
            let Some(href) = link.value().attr("href") else {
                continue;
            };
            let Ok(next) = final_url.join(href.trim()) else {
                continue;
            };
            if !matches!(next.scheme(), "http" | "https") {
                continue;
            }
            if !host_key(&next).is_some_and(|h| hosts.contains(&h)) {
                continue;
            }
            let next = canonicalize_parsed(next);
            if seen.insert(next.to_string()) {
                queue.push_back(next);
            }
        }

        let is_article_url = profile
            .article_pattern
            .as_ref()
            .is_none_or(|re| re.is_match(final_url.as_str()));
        if !is_article_url {
            report.skipped += 1;
            continue;
        }
        match extract_from_document(&doc, &page, profile) {
            Ok(record) => {
                report.extracted += 1;
                if emitted.insert(record.canonical_url.clone()) {
                    sink(record);
                }
            }
            Err(err) if profile.article_pattern.is_some() => {
                report.failed += 1;
                report.failures.push((url.to_string(), err.to_string()));
            }
            Err(_) => report.skipped += 1,
        }
    }
    report
}
