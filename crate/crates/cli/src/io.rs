//! File helpers: every write goes through a temp file in the target
//! directory followed by a rename.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use factcheck_core::corpus::{parse_jsonl, to_jsonl, CorpusLine, PredictionLine};

use crate::error::{CliError, CliResult, InputContext};

pub fn write_atomic(path: &Path, contents: &[u8]) -> CliResult<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).input_ctx(format_args!("creating {}", dir.display()))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).input_ctx(format_args!("temp file in {}", dir.display()))?;
    tmp.write_all(contents)
        .and_then(|_| tmp.as_file().sync_all())
        .input_ctx(format_args!("writing {}", path.display()))?;
    tmp.persist(path)
        .input_ctx(format_args!("replacing {}", path.display()))?;
    Ok(())
}

pub fn read_text(path: &Path, what: &str) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::input(format!("cannot read {what} {}: {e}", path.display())))
}

pub fn read_corpus(path: &Path) -> CliResult<Vec<CorpusLine>> {
    let text = read_text(path, "corpus")?;
    parse_jsonl(&text).input_ctx(path.display())
}

/// Like [`read_corpus`] but a missing file is an empty corpus.
pub fn read_corpus_or_empty(path: &Path) -> CliResult<Vec<CorpusLine>> {
    if path.exists() {
        read_corpus(path)
    } else {
        Ok(Vec::new())
    }
}

pub fn write_corpus(path: &Path, lines: &[CorpusLine]) -> CliResult<()> {
    write_atomic(path, to_jsonl(lines).as_bytes())
}

pub fn read_predictions(path: &Path) -> CliResult<Vec<PredictionLine>> {
    let text = read_text(path, "predictions")?;
    parse_jsonl(&text).input_ctx(path.display())
}

/// `path` with `suffix` appended to its file name: `model.bin` + `.vocab`.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(suffix);
    path.with_file_name(name)
}
