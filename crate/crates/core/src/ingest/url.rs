use thiserror::Error;
use url::Url;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum UrlError {
    #[error("malformed URL {input:?}: {reason}")]
    Parse { input: String, reason: String },
    #[error("unsupported URL scheme {0:?} (expected http or https)")]
    Scheme(String),
}

const TRACKING_PARAMS: &[&str] = &["fbclid", "gclid"];

fn is_tracking_param(key: &str) -> bool {
    key.starts_with("utm_") || TRACKING_PARAMS.contains(&key)
}

/// Parses an absolute http(s) URL.
pub fn parse_http_url(input: &str) -> Result<Url, UrlError> {
    let url = Url::parse(input.trim()).map_err(|e| UrlError::Parse {
        input: input.to_string(),
        reason: e.to_string(),
    })?;
    match url.scheme() {
        "http" | "https" => {}
        other => return Err(UrlError::Scheme(other.to_string())),
    }
    if url.host_str().is_none() {
        return Err(UrlError::Parse {
            input: input.to_string(),
            reason: "missing host".to_string(),
        });
    }
    Ok(url)
}

/// Canonical form of an article URL, used as its identity.
///
/// Lowercases scheme and host, drops the fragment and tracking parameters
/// (`utm_*`, `fbclid`, `gclid`), sorts the remaining query pairs by key
/// (stable, raw encoding kept), and trims the trailing slash of non-root paths.
pub fn canonicalize_url(input: &str) -> Result<String, UrlError> {
    let url = parse_http_url(input)?;
    Ok(canonicalize_parsed(url).into())
}

pub(crate) fn canonicalize_parsed(mut url: Url) -> Url {
    url.set_fragment(None);

    let query = url.query().map(|q| {
        let mut pairs: Vec<&str> = q
            .split('&')
            .filter(|pair| !pair.is_empty())
            .filter(|pair| {
                let key = pair.split_once('=').map_or(*pair, |(k, _)| k);
                !is_tracking_param(key)
            })
            .collect();
        pairs.sort_by(|a, b| query_key(a).cmp(query_key(b)));
        pairs.join("&")
    });
    match query {
        Some(q) if !q.is_empty() => url.set_query(Some(&q)),
        _ => url.set_query(None),
    }

    let path = url.path();
    if path.len() > 1 && path.ends_with('/') {
        let trimmed = path.trim_end_matches('/');
        let trimmed = if trimmed.is_empty() { "/" } else { trimmed }.to_string();
        url.set_path(&trimmed);
    }
    url
}

fn query_key(pair: &str) -> &str {
    pair.split_once('=').map_or(pair, |(k, _)| k)
}
