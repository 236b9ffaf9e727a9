use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use regex::Regex;
use scraper::Selector;
use serde::Deserialize;
use thiserror::Error;
use url::Url;

use super::url::parse_http_url;

/// Rate limit applied when a profile does not set one.
pub const DEFAULT_RATE_LIMIT_MS: u64 = 1000;
pub const DEFAULT_MAX_PAGES: usize = 500;

pub const REQUIRED_FIELDS: &[&str] = &["title", "body"];
pub const OPTIONAL_FIELDS: &[&str] = &["published_at", "raw_verdict", "raw_topic"];

#[derive(Debug, Error)]
pub enum ProfileError {
    #[error("cannot read site profile {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot parse site profile {path}: {message}")]
    Syntax { path: PathBuf, message: String },
    #[error("site profile {site}: {message}")]
    Invalid { site: String, message: String },
    #[error("duplicate site_id {0:?}")]
    Duplicate(String),
}

/// A compiled selector-path: a CSS selector, optionally followed by
/// `@attr` to read an attribute instead of the element's text.
#[derive(Debug, Clone)]
pub struct SelectorPath {
    source: String,
    pub(crate) selector: Selector,
    pub(crate) attribute: Option<String>,
}

impl SelectorPath {
    pub fn parse(source: &str) -> Result<Self, String> {
        let (css, attribute) = match source.rsplit_once('@') {
            Some((css, attr))
                if !attr.is_empty()
                    && attr
                        .chars()
                        .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_' || c == ':') =>
            {
                (css.trim(), Some(attr.to_ascii_lowercase()))
            }
            _ => (source.trim(), None),
        };
        let selector = Selector::parse(css).map_err(|e| format!("bad selector {source:?}: {e}"))?;
        Ok(Self {
            source: source.to_string(),
            selector,
            attribute,
        })
    }

    pub fn as_str(&self) -> &str {
        &self.source
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProfile {
    site_id: String,
    display_name: Option<String>,
    seed_urls: Vec<String>,
    extraction_rules: BTreeMap<String, String>,
    rate_limit_ms: Option<u64>,
    max_pages: Option<usize>,
    #[serde(default)]
    date_formats: Vec<String>,
    article_pattern: Option<String>,
    link_selector: Option<String>,
}

/// Per-site crawl and extraction configuration.
#[derive(Debug, Clone)]
pub struct SiteProfile {
    pub site_id: String,
    pub display_name: String,
    pub seed_urls: Vec<Url>,
    pub extraction_rules: BTreeMap<String, SelectorPath>,
    /// Minimum delay between requests to one host, in milliseconds.
    pub rate_limit_ms: u64,
    pub max_pages: usize,
    /// chrono format strings tried after ISO-8601.
    pub date_formats: Vec<String>,
    /// Pages whose URL matches are article pages; others only contribute links.
    /// Without a pattern, every page is tried and non-articles are skipped.
    pub article_pattern: Option<Regex>,
    pub link_selector: Selector,
}

impl SiteProfile {
    pub fn from_toml_str(text: &str, origin: &Path) -> Result<Self, ProfileError> {
        let raw: RawProfile = toml::from_str(text).map_err(|e| ProfileError::Syntax {
            path: origin.to_path_buf(),
            message: e.to_string(),
        })?;
        Self::from_raw(raw)
    }

    pub fn load(path: &Path) -> Result<Self, ProfileError> {
        let text = fs::read_to_string(path).map_err(|source| ProfileError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text, path)
    }

    fn from_raw(raw: RawProfile) -> Result<Self, ProfileError> {
        let site = raw.site_id.trim().to_string();
        let invalid = |message: String| ProfileError::Invalid {
            site: site.clone(),
            message,
        };
        if site.is_empty() {
            return Err(invalid("site_id must be nonempty".into()));
        }
        for field in REQUIRED_FIELDS {
            if !raw.extraction_rules.contains_key(*field) {
                return Err(invalid(format!("extraction_rules is missing {field:?}")));
            }
        }
        let mut rules = BTreeMap::new();
        for (field, source) in &raw.extraction_rules {
            if !REQUIRED_FIELDS.contains(&field.as_str()) && !OPTIONAL_FIELDS.contains(&field.as_str()) {
                return Err(invalid(format!("unknown extraction field {field:?}")));
            }
            rules.insert(field.clone(), SelectorPath::parse(source).map_err(invalid)?);
        }
        if raw.seed_urls.is_empty() {
            return Err(invalid("seed_urls must not be empty".into()));
        }
        let seed_urls = raw
            .seed_urls
            .iter()
            .map(|u| parse_http_url(u).map_err(|e| invalid(e.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        let article_pattern = raw
            .article_pattern
            .as_deref()
            .map(Regex::new)
            .transpose()
            .map_err(|e| invalid(format!("bad article_pattern: {e}")))?;
        let link_source = raw.link_selector.as_deref().unwrap_or("a[href]");
        let link_selector = Selector::parse(link_source).map_err(|e| invalid(format!("bad link_selector: {e}")))?;

        Ok(Self {
            display_name: raw.display_name.unwrap_or_else(|| site.clone()),
            site_id: site,
            seed_urls,
            extraction_rules: rules,
            rate_limit_ms: raw.rate_limit_ms.unwrap_or(DEFAULT_RATE_LIMIT_MS),
            max_pages: raw.max_pages.unwrap_or(DEFAULT_MAX_PAGES),
            date_formats: raw.date_formats,
            article_pattern,
            link_selector,
        })
    }

    /// Hosts the crawl may visit: those of the seed URLs.
    pub fn hosts(&self) -> HashSet<String> {
        self.seed_urls.iter().filter_map(host_key).collect()
    }

    pub fn rule(&self, field: &str) -> Option<&SelectorPath> {
        self.extraction_rules.get(field)
    }
}

/// `host[:port]` key used for politeness and crawl scoping.
pub fn host_key(url: &Url) -> Option<String> {
    let host = url.host_str()?.to_ascii_lowercase();
    Some(match url.port() {
        Some(port) => format!("{host}:{port}"),
        None => host,
    })
}

/// Loads every `*.toml` profile in `dir`, sorted by site_id.
pub fn load_profiles(dir: &Path) -> Result<Vec<SiteProfile>, ProfileError> {
    let entries = fs::read_dir(dir).map_err(|source| ProfileError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|ext| ext == "toml"))
        .collect();
    paths.sort();

    let mut profiles = Vec::with_capacity(paths.len());
    let mut ids = HashSet::new();
    for path in paths {
        let profile = SiteProfile::load(&path)?;
        if !ids.insert(profile.site_id.clone()) {
            return Err(ProfileError::Duplicate(profile.site_id));
        }
        profiles.push(profile);
    }
    profiles.sort_by(|a, b| a.site_id.cmp(&b.site_id));
    Ok(profiles)
}
