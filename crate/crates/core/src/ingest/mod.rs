//! Polite crawling of fact-checking sites and extraction of article records.

mod crawl;
mod extract;
mod fetch;
mod politeness;
mod profile;
mod record;
mod robots;
mod url;

pub use self::crawl::{crawl_site, crawl_site_with, CrawlReport};
pub use self::extract::{
    collapse_whitespace, decode_body, extract_article, is_html, media_type, parse_date, ExtractError,
};
pub use self::fetch::{FetchError, FetchResult, Fetcher, FetcherConfig, DEFAULT_USER_AGENT, MAX_REDIRECTS};
pub use self::politeness::Politeness;
pub use self::profile::{host_key, load_profiles, ProfileError, SelectorPath, SiteProfile, DEFAULT_RATE_LIMIT_MS};
pub use self::record::{dedupe, record_id_for, ArticleRecord};
pub use self::robots::{RobotsCache, RobotsPolicy};
pub use self::url::{canonicalize_url, parse_http_url, UrlError};
