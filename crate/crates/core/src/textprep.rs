//! Text cleaning, tokenization, vocabulary building and TF-IDF vectors.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub const VOCAB_FORMAT_VERSION: u32 = 1;
const VOCAB_MAGIC: &str = "factcheck-vocabulary";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TextPrepError {
    #[error("min_df must be at least 1")]
    ZeroMinDf,
    #[error("max_terms must be at least 1")]
    ZeroMaxTerms,
    #[error("vocabulary file, line {line}: {message}")]
    Format { line: usize, message: String },
}

/// Lowercase text made only of letters, digits and single spaces.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct CleanText(String);

impl CleanText {
    /// Cleans arbitrary text: lowercase, every non-alphanumeric character
    /// becomes a space, whitespace runs collapse, ends trimmed.
    pub fn new(raw: &str) -> Self {
        let spaced: String = raw
            .to_lowercase()
            .chars()
            .map(|c| if c.is_alphanumeric() { c } else { ' ' })
            .collect();
        CleanText(spaced.split_whitespace().collect::<Vec<_>>().join(" "))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Model input text for an article: title, a space, then body.
pub fn clean_text(title: &str, body: &str) -> CleanText {
    CleanText::new(&format!("{title} {body}"))
}

pub type TokenSeq = Vec<String>;

pub fn tokenize(clean: &CleanText) -> TokenSeq {
    if clean.is_empty() {
        return Vec::new();
    }
    clean.as_str().split(' ').map(str::to_string).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VocabSettings {
    pub min_df: usize,
    pub max_terms: usize,
}

impl Default for VocabSettings {
    fn default() -> Self {
        Self {
            min_df: 2,
            max_terms: 50_000,
        }
    }
}

/// Term index with document frequencies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    terms: Vec<String>,
    index: HashMap<String, usize>,
    doc_freq: Vec<usize>,
    corpus_size: usize,
    settings: VocabSettings,
}

/// Keeps terms seen in at least `min_df` documents, at most `max_terms` of
/// them (highest df first, ties lexicographic), ordered lexicographically.
pub fn build_vocabulary(corpus: &[TokenSeq], settings: VocabSettings) -> Result<Vocabulary, TextPrepError> {
    if settings.min_df == 0 {
        return Err(TextPrepError::ZeroMinDf);
    }
    if settings.max_terms == 0 {
        return Err(TextPrepError::ZeroMaxTerms);
    }
    let mut df: HashMap<&str, usize> = HashMap::new();
    for doc in corpus {
        let distinct: HashSet<&str> = doc.iter().map(String::as_str).collect();
        for term in distinct {
            *df.entry(term).or_default() += 1;
        }
    }
    let mut kept: Vec<(&str, usize)> = df.into_iter().filter(|&(_, n)| n >= settings.min_df).collect();
    kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    kept.truncate(settings.max_terms);
    kept.sort_by(|a, b| a.0.cmp(b.0));

    Ok(Vocabulary::from_parts(
        kept.iter().map(|(t, _)| t.to_string()).collect(),
        kept.iter().map(|(_, n)| *n).collect(),
        corpus.len(),
        settings,
    ))
}

impl Vocabulary {
    fn from_parts(terms: Vec<String>, doc_freq: Vec<usize>, corpus_size: usize, settings: VocabSettings) -> Self {
        let index = terms.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        Self {
            terms,
            index,
            doc_freq,
            corpus_size,
            settings,
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn column(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    pub fn doc_freq(&self, term: &str) -> Option<usize> {
        self.column(term).map(|c| self.doc_freq[c])
    }

    pub fn corpus_size(&self) -> usize {
        self.corpus_size
    }

    pub fn settings(&self) -> VocabSettings {
        self.settings
    }

    /// Smoothed inverse document frequency of a column:
    /// `ln((1 + N) / (1 + df)) + 1`.
    pub fn idf(&self, column: usize) -> f64 {
        let n = self.corpus_size as f64;
        let df = self.doc_freq[column] as f64;
        ((1.0 + n) / (1.0 + df)).ln() + 1.0
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{VOCAB_MAGIC} {VOCAB_FORMAT_VERSION}");
        let _ = writeln!(out, "corpus_size\t{}", self.corpus_size);
        let _ = writeln!(out, "min_df\t{}", self.settings.min_df);
        let _ = writeln!(out, "max_terms\t{}", self.settings.max_terms);
        let _ = writeln!(out, "terms\t{}", self.terms.len());
        for (term, df) in self.terms.iter().zip(&self.doc_freq) {
            let _ = writeln!(out, "{term}\t{df}");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, TextPrepError> {
        let err = |line: usize, message: String| TextPrepError::Format { line, message };
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));

        let (n, header) = lines.next().ok_or_else(|| err(1, "empty file".into()))?;
        match header.split_once(' ') {
            Some((VOCAB_MAGIC, v)) if v == VOCAB_FORMAT_VERSION.to_string() => {}
            _ => {
                return Err(err(
                    n,
                    format!("expected header {VOCAB_MAGIC:?} {VOCAB_FORMAT_VERSION}"),
                ))
            }
        }
        let mut field = |name: &str| -> Result<usize, TextPrepError> {
            let (n, line) = lines.next().ok_or_else(|| err(0, format!("missing {name}")))?;
            match line.split_once('\t') {
                Some((key, value)) if key == name => {
                    value.parse().map_err(|_| err(n, format!("bad {name} value {value:?}")))
                }
                _ => Err(err(n, format!("expected {name}"))),
            }
        };
        let corpus_size = field("corpus_size")?;
        let min_df = field("min_df")?;
        let max_terms = field("max_terms")?;
        let count = field("terms")?;

        let mut terms = Vec::with_capacity(count);
        let mut doc_freq = Vec::with_capacity(count);
        for (n, line) in lines {
            let (term, df) = line
                .split_once('\t')
                .ok_or_else(|| err(n, "expected term<TAB>df".into()))?;
            if term.is_empty() || term.contains(char::is_whitespace) {
                return Err(err(n, format!("invalid term {term:?}")));
            }
            if terms.last().is_some_and(|prev: &String| prev.as_str() >= term) {
                return Err(err(n, "terms must be strictly ascending".into()));
            }
            let df: usize = df.parse().map_err(|_| err(n, format!("bad df {df:?}")))?;
            if df == 0 || df > corpus_size {
                return Err(err(n, format!("df {df} outside 1..={corpus_size}")));
            }
            terms.push(term.to_string());
            doc_freq.push(df);
        }
        if terms.len() != count {
            return Err(err(0, format!("expected {count} terms, found {}", terms.len())));
        }
        Ok(Self::from_parts(
            terms,
            doc_freq,
            corpus_size,
            VocabSettings { min_df, max_terms },
        ))
    }

    /// Short stable digest of the serialized vocabulary.
    pub fn fingerprint(&self) -> String {
        hex::encode(&Sha256::digest(self.to_text().as_bytes())[..8])
    }
}

/// Sparse feature vector with sorted, unique column ids.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeatureVector {
    dim: usize,
    entries: Vec<(usize, f64)>,
}

impl FeatureVector {
    /// Builds from `(column, value)` pairs; duplicates are summed and zeros dropped.
    ///
    /// # Panics
    /// If a column is out of range.
    pub fn from_pairs(dim: usize, pairs: impl IntoIterator<Item = (usize, f64)>) -> Self {
        let mut entries: Vec<(usize, f64)> = pairs.into_iter().collect();
        assert!(entries.iter().all(|&(c, _)| c < dim), "feature column out of range");
        entries.sort_by_key(|&(c, _)| c);
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(entries.len());
        for (c, v) in entries {
            match merged.last_mut() {
                Some(last) if last.0 == c => last.1 += v,
                _ => merged.push((c, v)),
            }
        }
        merged.retain(|&(_, v)| v != 0.0);
        Self { dim, entries: merged }
    }

    pub fn from_dense(values: &[f64]) -> Self {
        Self::from_pairs(values.len(), values.iter().copied().enumerate())
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            entries: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|(_, v)| v * v).sum::<f64>().sqrt()
    }

    pub fn get(&self, column: usize) -> f64 {
        self.entries
            .binary_search_by_key(&column, |&(c, _)| c)
            .map_or(0.0, |i| self.entries[i].1)
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for &(c, v) in &self.entries {
            out[c] = v;
        }
        out
    }
}

/// Raw-count TF times smoothed IDF, L2-normalized unless all-zero.
/// Out-of-vocabulary tokens are ignored.
pub fn vectorize_tfidf(doc: &[String], vocab: &Vocabulary) -> FeatureVector {
    let mut counts: HashMap<usize, f64> = HashMap::new();
    for token in doc {
        if let Some(col) = vocab.column(token) {
            *counts.entry(col).or_default() += 1.0;
        }
    }
    let mut v = FeatureVector::from_pairs(vocab.len(), counts.into_iter().map(|(c, tf)| (c, tf * vocab.idf(c))));
    let norm = v.norm();
    if norm > 0.0 {
        for entry in &mut v.entries {
            entry.1 /= norm;
        }
    }
    v
}
