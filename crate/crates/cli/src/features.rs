//! Turning corpus lines into classifier inputs, shared by `train` and
//! `predict` so both sides see identical features.

use factcheck_core::classifier::{embed_remote, EncoderBackendRef};
use factcheck_core::corpus::CorpusLine;
use factcheck_core::labels::Taxonomy;
use factcheck_core::textprep::{clean_text, tokenize, vectorize_tfidf, FeatureVector, TokenSeq, Vocabulary};

use crate::config::Task;
use crate::error::{CliError, CliResult};

/// Title and body of one input. Plain-text inputs have no title.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InputText {
    pub title: String,
    pub body: String,
}

impl InputText {
    pub fn plain(text: &str) -> Self {
        Self {
            title: String::new(),
            body: text.to_string(),
        }
    }

    pub fn tokens(&self) -> TokenSeq {
        tokenize(&clean_text(&self.title, &self.body))
    }

    /// What the remote encoder receives.
    pub fn joined(&self) -> String {
        match (self.title.is_empty(), self.body.is_empty()) {
            (true, _) => self.body.clone(),
            (false, true) => self.title.clone(),
            (false, false) => format!("{} {}", self.title, self.body),
        }
    }
}

impl From<&CorpusLine> for InputText {
    fn from(line: &CorpusLine) -> Self {
        Self {
            title: line.title.clone(),
            body: line.body_text.clone(),
        }
    }
}

/// Gold class index of `line` under `task`, if it has been normalized.
pub fn label_of(line: &CorpusLine, task: Task) -> Option<usize> {
    match task {
        Task::Veracity4 => line.verdict_class.map(Taxonomy::index),
        Task::Domain6 => line.domain_class.map(Taxonomy::index),
    }
}

pub fn tfidf_tag(vocab: &Vocabulary) -> String {
    format!("tfidf:{}", vocab.fingerprint())
}

pub fn encoder_tag(backend: &EncoderBackendRef) -> String {
    format!("encoder:{}", backend.dims)
}

pub fn tfidf_vectors(inputs: &[InputText], vocab: &Vocabulary) -> Vec<FeatureVector> {
    inputs.iter().map(|t| vectorize_tfidf(&t.tokens(), vocab)).collect()
}

pub fn encoder_vectors(inputs: &[InputText], backend: &EncoderBackendRef) -> CliResult<Vec<FeatureVector>> {
    if inputs.is_empty() {
        return Ok(Vec::new());
    }
    let texts: Vec<String> = inputs.iter().map(InputText::joined).collect();
    let vectors = embed_remote(&texts, backend).map_err(|e| {
        let hint = if e.is_retriable() { " (retriable)" } else { "" };
        CliError::input(format!("encoder at {}: {e}{hint}", backend.endpoint))
    })?;
    Ok(vectors.iter().map(|v| FeatureVector::from_dense(v)).collect())
}
