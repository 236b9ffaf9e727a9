use std::sync::Arc;
use std::time::Duration;

use chrono::{DateTime, Utc};
use reqwest::blocking::Client;
use reqwest::header::{CONTENT_TYPE, LOCATION};
use thiserror::Error;
use url::Url;

use super::politeness::Politeness;
use super::profile::host_key;
use super::robots::{RobotsCache, RobotsPolicy};

pub const MAX_REDIRECTS: usize = 5;
pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(20);
pub const DEFAULT_USER_AGENT: &str = "factcheck-crawler/0.1";

/// Raw HTTP response for one page, after redirects.
#[derive(Debug, Clone)]
pub struct FetchResult {
    /// Final URL after redirects.
    pub url: Url,
    pub status: u16,
    pub content_type: String,
    pub body_bytes: Vec<u8>,
    pub fetched_at: DateTime<Utc>,
}

impl FetchResult {
    pub fn is_success(&self) -> bool {
        (200..300).contains(&self.status)
    }
}

#[derive(Debug, Error)]
pub enum FetchError {
    #[error("{url}: disallowed by robots.txt")]
    RobotsDenied { url: String },
    #[error("{url}: request timed out")]
    Timeout { url: String },
    #[error("{url}: network error: {message}")]
    Network { url: String, message: String },
    #[error("{url}: more than {limit} redirects")]
    TooManyRedirects { url: String, limit: usize },
    #[error("{url}: invalid redirect: {message}")]
    BadRedirect { url: String, message: String },
    #[error("{url}: URL has no host")]
    NoHost { url: String },
}

impl FetchError {
    /// Whether retrying the same request later may succeed.
    pub fn is_retriable(&self) -> bool {
        matches!(self, FetchError::Timeout { .. } | FetchError::Network { .. })
    }
}

#[derive(Debug, Clone)]
pub struct FetcherConfig {
    pub user_agent: String,
    pub timeout: Duration,
    pub max_redirects: usize,
}

impl Default for FetcherConfig {
    fn default() -> Self {
        Self {
            user_agent: DEFAULT_USER_AGENT.to_string(),
            timeout: DEFAULT_TIMEOUT,
            max_redirects: MAX_REDIRECTS,
        }
    }
}

/// Polite HTTP client: robots exclusion, per-host spacing, bounded redirects.
///
/// Redirects are followed by hand so each hop passes the robots check and
/// the rate limiter of its own host.
#[derive(Debug, Clone)]
pub struct Fetcher {
    client: Client,
    config: FetcherConfig,
    politeness: Arc<Politeness>,
    robots: Arc<RobotsCache>,
}

impl Fetcher {
    pub fn new(config: FetcherConfig, politeness: Arc<Politeness>) -> Result<Self, FetchError> {
        let client = Client::builder()
            .user_agent(config.user_agent.clone())
            .redirect(reqwest::redirect::Policy::none())
            .timeout(config.timeout)
            .build()
            .map_err(|e| FetchError::Network {
                url: String::new(),
                message: e.to_string(),
            })?;
        Ok(Self {
            client,
            config,
            politeness,
            robots: Arc::new(RobotsCache::default()),
        })
    }

    pub fn politeness(&self) -> &Arc<Politeness> {
        &self.politeness
    }

    /// Fetches `url`, waiting at least `rate_limit` since the previous
    /// request to the same host.
    pub fn fetch_page(&self, url: &Url, rate_limit: Duration) -> Result<FetchResult, FetchError> {
        let mut current = url.clone();
        for hop in 0..=self.config.max_redirects {
            let host = host_key(&current).ok_or_else(|| FetchError::NoHost {
                url: current.to_string(),
            })?;
            let policy = self.robots_for(&current, &host, rate_limit);
            if !policy.allows(current.as_str()) {
                return Err(FetchError::RobotsDenied {
                    url: current.to_string(),
                });
            }
            let gap = policy
                .crawl_delay_ms()
                .map_or(rate_limit, |ms| rate_limit.max(Duration::from_millis(ms)));
            self.politeness.acquire(&host, gap);

            let response = self
                .client
                .get(current.clone())
                .send()
                .map_err(|e| classify(&current, e))?;
            let status = response.status();
            if status.is_redirection() {
                if hop == self.config.max_redirects {
                    break;
                }
                let location = response
                    .headers()
                    .get(LOCATION)
                    .and_then(|v| v.to_str().ok())
                    .ok_or_else(|| FetchError::BadRedirect {
                        url: current.to_string(),
                        message: "missing Location header".into(),
                    })?;
                current = current.join(location).map_err(|e| FetchError::BadRedirect {
                    url: current.to_string(),
                    message: e.to_string(),
                })?;
                continue;
            }

            let content_type = response
                .headers()
                .get(CONTENT_TYPE)
                .and_then(|v| v.to_str().ok())
                .unwrap_or("application/octet-stream")
                .to_string();
            let body = response.bytes().map_err(|e| classify(&current, e))?;
            return Ok(FetchResult {
                url: current,
                status: status.as_u16(),
                content_type,
                body_bytes: body.to_vec(),
                fetched_at: Utc::now(),
            });
        }
        Err(FetchError::TooManyRedirects {
            url: url.to_string(),
            limit: self.config.max_redirects,
        })
    }

    fn robots_for(&self, url: &Url, host: &str, rate_limit: Duration) -> Arc<RobotsPolicy> {
        self.robots.get_or_fetch(host, || {
            let Ok(robots_url) = url.join("/robots.txt") else {
                return RobotsPolicy::AllowAll;
            };
            self.politeness.acquire(host, rate_limit);
            match self.client.get(robots_url).send() {
                Ok(resp) => {
                    let status = resp.status().as_u16();
                    let body = resp.bytes().map(|b| b.to_vec()).unwrap_or_default();
                    let token = self.config.user_agent.split('/').next().unwrap_or_default();
                    RobotsPolicy::from_response(token, status, &body)
                }
                // An unreachable host surfaces on the page request itself.
                Err(_) => RobotsPolicy::AllowAll,
            }
        })
    }
}

fn classify(url: &Url, err: reqwest::Error) -> FetchError {
    if err.is_timeout() {
        FetchError::Timeout { url: url.to_string() }
    } else {
        FetchError::Network {
            url: url.to_string(),
            message: err.to_string(),
        }
    }
}
