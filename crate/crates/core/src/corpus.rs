//! Newline-delimited JSON corpus and prediction files.
//!
//! Every line is one object with a fixed field order, so rewriting a file
//! this crate produced reproduces it byte for byte.

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::ArticleRecord;
use crate::labels::{DomainClass, VerdictClass};

#[derive(Debug, Error)]
#[error("line {line}: {message}")]
pub struct CorpusError {
    pub line: usize,
    pub message: String,
}

/// One corpus line: an article plus its harmonized classes, if any.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusLine {
    pub record_id: String,
    pub canonical_url: String,
    pub site_id: String,
    pub title: String,
    pub published_at: Option<NaiveDate>,
    pub body_text: String,
    pub raw_verdict: Option<String>,
    pub raw_topic: Option<String>,
    pub verdict_class: Option<VerdictClass>,
    pub domain_class: Option<DomainClass>,
}

impl From<ArticleRecord> for CorpusLine {
    fn from(r: ArticleRecord) -> Self {
        Self {
            record_id: r.record_id,
            canonical_url: r.canonical_url,
            site_id: r.site_id,
            title: r.title,
            published_at: r.published_at,
            body_text: r.body_text,
            raw_verdict: r.raw_verdict,
            raw_topic: r.raw_topic,
            verdict_class: None,
            domain_class: None,
        }
    }
}

impl CorpusLine {
    pub fn record(&self) -> ArticleRecord {
        ArticleRecord {
            record_id: self.record_id.clone(),
            canonical_url: self.canonical_url.clone(),
            site_id: self.site_id.clone(),
            title: self.title.clone(),
            published_at: self.published_at,
            body_text: self.body_text.clone(),
            raw_verdict: self.raw_verdict.clone(),
            raw_topic: self.raw_topic.clone(),
        }
    }
}

/// One prediction line: the record it refers to, the predicted class name
/// and the probability of every class in model order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredictionLine {
    pub record_id: String,
    pub class: String,
    pub probs: Vec<f64>,
}

pub fn to_jsonl<T: Serialize>(items: &[T]) -> String {
    let mut out = String::new();
    for item in items {
        out.push_str(&serde_json::to_string(item).expect("corpus line serializes"));
        out.push('\n');
    }
    out
}

/// Parses newline-delimited objects; blank lines are ignored.
pub fn parse_jsonl<T: for<'de> Deserialize<'de>>(text: &str) -> Result<Vec<T>, CorpusError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| CorpusError {
                line: i + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::record_id_for;
    use proptest::prelude::*;

    fn line(title: &str, verdict: Option<VerdictClass>) -> CorpusLine {
        let url = "https://fc.example/a";
        CorpusLine {
            record_id: record_id_for(url),
            canonical_url: url.into(),
            site_id: "fc".into(),
            title: title.into(),
            published_at: NaiveDate::from_ymd_opt(2021, 2, 3),
            body_text: "body".into(),
            raw_verdict: Some("Mostly True".into()),
            raw_topic: None,
            verdict_class: verdict,
            domain_class: Some(DomainClass::Health),
        }
    }

    #[test]
    fn fixed_field_order() {
        let text = to_jsonl(&[line("T", Some(VerdictClass::PartiallyFalse))]);
        let expected = format!(
            "{{\"record_id\":\"{}\",\"canonical_url\":\"https://fc.example/a\",\"site_id\":\"fc\",\"title\":\"T\",\
             \"published_at\":\"2021-02-03\",\"body_text\":\"body\",\"raw_verdict\":\"Mostly True\",\"raw_topic\":null,\
             \"verdict_class\":\"partially_false\",\"domain_class\":\"health\"}}\n",
            record_id_for("https://fc.example/a")
        );
        assert_eq!(text, expected);
    }

    #[test]
    fn rejects_bad_lines() {
        let err = parse_jsonl::<CorpusLine>("\n{\"record_id\":1}\n").unwrap_err();
        assert_eq!(err.line, 2);
        let mut good = to_jsonl(&[line("T", None)]);
        good = good.replace("\"domain_class\":\"health\"", "\"domain_class\":\"sports\"");
        assert!(parse_jsonl::<CorpusLine>(&good).is_err());
    }

    proptest! {
        #[test]
        fn write_read_write_is_byte_identical(title in "\\PC{0,30}", has_class in any::<bool>()) {
            let lines = vec![line(&title, has_class.then_some(VerdictClass::False)), line("second", None)];
            let text = to_jsonl(&lines);
            let back: Vec<CorpusLine> = parse_jsonl(&text).unwrap();
            prop_assert_eq!(&back, &lines);
            prop_assert_eq!(to_jsonl(&back), text);
        }
    }
}
