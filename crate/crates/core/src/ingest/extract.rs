use chrono::{DateTime, NaiveDate};
use encoding_rs::{Encoding, UTF_8};
use scraper::{ElementRef, Html, Node};
use thiserror::Error;

use super::fetch::FetchResult;
use super::profile::{SelectorPath, SiteProfile};
use super::record::{record_id_for, ArticleRecord};
use super::url::canonicalize_parsed;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ExtractError {
    #[error("unsupported content type {0:?}")]
    UnsupportedContent(String),
    #[error("extraction failed: no content for field {field:?} (selector {selector:?})")]
    MissingField { field: &'static str, selector: String },
}

const SKIPPED_ELEMENTS: &[&str] = &["script", "style", "noscript", "template"];

const INLINE_ELEMENTS: &[&str] = &[
    "a", "abbr", "b", "bdi", "bdo", "cite", "code", "data", "dfn", "em", "i", "kbd", "mark", "q", "s", "samp", "small",
    "span", "strong", "sub", "sup", "time", "u", "var",
];

/// Media type of a Content-Type header, lowercased, without parameters.
pub fn media_type(content_type: &str) -> String {
    content_type
        .split(';')
        .next()
        .unwrap_or_default()
        .trim()
        .to_ascii_lowercase()
}

pub fn is_html(content_type: &str) -> bool {
    matches!(media_type(content_type).as_str(), "text/html" | "application/xhtml+xml")
}

/// Decodes a response body using the declared charset, falling back to
/// lossy UTF-8.
pub fn decode_body(content_type: &str, bytes: &[u8]) -> String {
    let encoding = content_type
        .split(';')
        .skip(1)
        .filter_map(|param| param.split_once('='))
        .find(|(k, _)| k.trim().eq_ignore_ascii_case("charset"))
        .and_then(|(_, v)| Encoding::for_label(v.trim().trim_matches('"').as_bytes()))
        .unwrap_or(UTF_8);
    let (text, _, _) = encoding.decode(bytes);
    text.into_owned()
}

/// Parses the document of an HTML response.
pub fn parse_html(page: &FetchResult) -> Result<Html, ExtractError> {
    if !is_html(&page.content_type) {
        return Err(ExtractError::UnsupportedContent(page.content_type.clone()));
    }
    Ok(Html::parse_document(&decode_body(&page.content_type, &page.body_bytes)))
}

/// Builds an [`ArticleRecord`] from a fetched page using the site's selector rules.
pub fn extract_article(page: &FetchResult, profile: &SiteProfile) -> Result<ArticleRecord, ExtractError> {
    let doc = parse_html(page)?;
    extract_from_document(&doc, page, profile)
}

pub(crate) fn extract_from_document(
    doc: &Html,
    page: &FetchResult,
    profile: &SiteProfile,
) -> Result<ArticleRecord, ExtractError> {
    let required = |field: &'static str| -> Result<String, ExtractError> {
        let rule = profile.rule(field).expect("profile validated required rules");
        let text = if field == "body" {
            select_all(doc, rule)
        } else {
            select_first(doc, rule)
        };
        text.ok_or_else(|| ExtractError::MissingField {
            field,
            selector: rule.as_str().to_string(),
        })
    };
    let optional = |field: &str| profile.rule(field).and_then(|rule| select_first(doc, rule));

    let title = required("title")?;
    let body_text = required("body")?;
    let published_at = optional("published_at").and_then(|s| parse_date(&s, &profile.date_formats));

    let canonical_url = String::from(canonicalize_parsed(page.url.clone()));
    Ok(ArticleRecord {
        record_id: record_id_for(&canonical_url),
        canonical_url,
        site_id: profile.site_id.clone(),
        title,
        published_at,
        body_text,
        raw_verdict: optional("raw_verdict"),
        raw_topic: optional("raw_topic"),
    })
}

fn select_first(doc: &Html, rule: &SelectorPath) -> Option<String> {
    doc.select(&rule.selector)
        .filter_map(|el| value_of(el, rule))
        .find(|s| !s.is_empty())
}

fn select_all(doc: &Html, rule: &SelectorPath) -> Option<String> {
    let parts: Vec<String> = doc
        .select(&rule.selector)
        .filter_map(|el| value_of(el, rule))
        .filter(|s| !s.is_empty())
        .collect();
    (!parts.is_empty()).then(|| parts.join(" "))
}

fn value_of(el: ElementRef<'_>, rule: &SelectorPath) -> Option<String> {
    match &rule.attribute {
        Some(attr) => el.value().attr(attr).map(collapse_whitespace),
        None => Some(element_text(el)),
    }
}

/// Visible text of an element: tags stripped, whitespace collapsed.
pub fn element_text(el: ElementRef<'_>) -> String {
    let mut raw = String::new();
    collect_text(el, &mut raw);
    collapse_whitespace(&raw)
}

fn collect_text(el: ElementRef<'_>, out: &mut String) {
    for child in el.children() {
        match child.value() {
            Node::Text(text) => out.push_str(text),
            Node::Element(e) => {
                if SKIPPED_ELEMENTS.contains(&e.name()) {
                    continue;
                }
                if let Some(child_el) = ElementRef::wrap(child) {
                    let block = !INLINE_ELEMENTS.contains(&e.name());
                    if block {
                        out.push(' ');
                    }
                    collect_text(child_el, out);
                    if block {
                        out.push(' ');
                    }
                }
            }
            _ => {}
        }
    }
}

pub fn collapse_whitespace(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// ISO-8601 (date or date-time) first, then the site's own formats.
/// Unparseable input yields `None`.
pub fn parse_date(raw: &str, site_formats: &[String]) -> Option<NaiveDate> {
    let s = raw.trim();
    if let Ok(d) = NaiveDate::parse_from_str(s, "%Y-%m-%d") {
        return Some(d);
    }
    if let Ok(dt) = DateTime::parse_from_rfc3339(s) {
        return Some(dt.date_naive());
    }
    if s.len() > 10 && s.is_char_boundary(10) && s.as_bytes()[10] == b'T' {
        if let Ok(d) = NaiveDate::parse_from_str(&s[..10], "%Y-%m-%d") {
            return Some(d);
        }
    }
    site_formats
        .iter()
        .find_map(|fmt| NaiveDate::parse_from_str(s, fmt).ok())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::Path;

    fn profile() -> SiteProfile {
        SiteProfile::from_toml_str(
            r#"
site_id = "t"
seed_urls = ["http://t.example/"]
date_formats = ["%d/%m/%Y"]
[extraction_rules]
title = "h1"
body = ".content p"
published_at = "time@datetime"
raw_verdict = ".verdict"
"#,
            Path::new("t.toml"),
        )
        .unwrap()
    }

    fn page(ct: &str, html: &[u8]) -> FetchResult {
        FetchResult {
            url: url::Url::parse("http://T.example/a/?utm_source=x#f").unwrap(),
            status: 200,
            content_type: ct.to_string(),
            body_bytes: html.to_vec(),
            fetched_at: chrono::Utc::now(),
        }
    }

    #[test]
    fn extracts_fields_and_strips_markup() {
        let html = br#"<html><head><script>var x = 1;</script></head><body>
            <h1>  A <em>bold</em>
               claim </h1>
            <time datetime="2021-03-04T10:00:00Z">March</time>
            <div class="content"><p>First<b>para</b>.</p><script>no()</script><p> Second   one </p></div>
            <span class="verdict">Mostly True</span></body></html>"#;
        let rec = extract_article(&page("text/html; charset=utf-8", html), &profile()).unwrap();
        assert_eq!(rec.title, "A bold claim");
        assert_eq!(rec.body_text, "Firstpara. Second one");
        assert_eq!(rec.published_at, NaiveDate::from_ymd_opt(2021, 3, 4));
        assert_eq!(rec.raw_verdict.as_deref(), Some("Mostly True"));
        assert_eq!(rec.raw_topic, None);
        assert_eq!(rec.canonical_url, "http://t.example/a");
        assert_eq!(rec.record_id, record_id_for("http://t.example/a"));
    }

    #[test]
    fn missing_optional_fields_are_absent() {
        let html = b"<h1>T</h1><div class=content><p>B</p></div>";
        let rec = extract_article(&page("text/html", html), &profile()).unwrap();
        assert_eq!(rec.raw_verdict, None);
        assert_eq!(rec.published_at, None);
    }

    #[test]
    fn missing_required_field_is_named() {
        let html = b"<h1>T</h1><div class=other><p>B</p></div>";
        let err = extract_article(&page("text/html", html), &profile()).unwrap_err();
        assert_eq!(
            err,
            ExtractError::MissingField {
                field: "body",
                selector: ".content p".into()
            }
        );
        let err = extract_article(&page("text/html", b"<h1>  </h1>"), &profile()).unwrap_err();
        assert!(matches!(err, ExtractError::MissingField { field: "title", .. }));
    }

    #[test]
    fn non_html_is_rejected() {
        let err = extract_article(&page("application/pdf", b"%PDF-1.4"), &profile()).unwrap_err();
        assert_eq!(err, ExtractError::UnsupportedContent("application/pdf".into()));
    }

    #[test]
    fn honors_declared_charset() {
        // "Café" in ISO-8859-1
        let html = b"<h1>Caf\xe9</h1><div class=content><p>x</p></div>";
        let rec = extract_article(&page("text/html; charset=ISO-8859-1", html), &profile()).unwrap();
        assert_eq!(rec.title, "Café");
        let rec = extract_article(&page("text/html", html), &profile()).unwrap();
        assert_eq!(rec.title, "Caf\u{FFFD}");
    }

    #[test]
    fn date_formats() {
        let fmts = vec!["%d/%m/%Y".to_string(), "%B %d, %Y".to_string()];
        let d = NaiveDate::from_ymd_opt(2020, 12, 1);
        assert_eq!(parse_date("2020-12-01", &fmts), d);
        assert_eq!(parse_date("2020-12-01T23:59:00+05:00", &fmts), d);
        assert_eq!(parse_date("01/12/2020", &fmts), d);
        assert_eq!(parse_date("December 1, 2020", &fmts), d);
        assert_eq!(parse_date("sometime last year", &fmts), None);
        assert_eq!(parse_date("2020-13-45", &fmts), None);
    }

    #[test]
    fn deterministic() {
        let html = b"<h1>T</h1><div class=content><p>B</p></div>";
        let p = page("text/html", html);
        assert_eq!(
            extract_article(&p, &profile()).unwrap(),
            extract_article(&p, &profile()).unwrap()
        );
    }
}
