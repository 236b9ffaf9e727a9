use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::PathBuf;

use factcheck_core::metrics::{confusion, score, MetricsReport};

use crate::config::PipelineConfig;
use crate::error::{CliError, CliResult};
use crate::features::label_of;
use crate::io::{read_corpus, read_predictions, sibling, write_atomic};

#[derive(Debug, Clone)]
pub struct EvaluateOptions {
    /// The configured corpus when absent.
    pub gold: Option<PathBuf>,
    pub predictions: PathBuf,
    /// Report path prefix; `<predictions>.metrics` when absent. Writes
    /// `<prefix>.json` and `<prefix>.txt`.
    pub report: Option<PathBuf>,
}

const SHOWN_UNMATCHED: usize = 10;

/// Joins gold labels and predictions on record_id and scores them.
///
/// Every labeled gold record needs exactly one prediction and every
/// prediction must name a gold record. Predictions for gold records that
/// carry no label for the task are ignored.
pub fn run(cfg: &PipelineConfig, opts: &EvaluateOptions, out: &mut dyn Write) -> CliResult<MetricsReport> {
    let gold_path = opts.gold.clone().unwrap_or_else(|| cfg.corpus_path.clone());
    let gold_lines = read_corpus(&gold_path)?;
    let pred_lines = read_predictions(&opts.predictions)?;
    let names = cfg.task.class_names();

    let mut gold: BTreeMap<&str, usize> = BTreeMap::new();
    let mut unlabeled: BTreeSet<&str> = BTreeSet::new();
    for line in &gold_lines {
        let id = line.record_id.as_str();
        let dup = match label_of(line, cfg.task) {
            Some(y) => gold.insert(id, y).is_some() || unlabeled.contains(id),
            None => !unlabeled.insert(id) || gold.contains_key(id),
        };
        if dup {
            return Err(CliError::input(format!("gold corpus lists record_id {id} twice")));
        }
    }

    let mut preds: BTreeMap<&str, usize> = BTreeMap::new();
    let mut ignored = 0;
    let mut unmatched: BTreeSet<&str> = BTreeSet::new();
    for p in &pred_lines {
        let id = p.record_id.as_str();
        let class = names.iter().position(|n| *n == p.class).ok_or_else(|| {
            CliError::input(format!(
                "prediction for {id} has class {:?}, not one of the {} classes",
                p.class,
                cfg.task.name()
            ))
        })?;
        if unlabeled.contains(id) {
            ignored += 1;
            continue;
        }
        if !gold.contains_key(id) {
            unmatched.insert(id);
            continue;
        }
        if preds.insert(id, class).is_some() {
            return Err(CliError::input(format!("predictions list record_id {id} twice")));
        }
    }
    unmatched.extend(gold.keys().filter(|id| !preds.contains_key(*id)));
    if !unmatched.is_empty() {
        let shown: Vec<&str> = unmatched.iter().take(SHOWN_UNMATCHED).copied().collect();
        return Err(CliError::input(format!(
            "{} record_ids do not match between gold and predictions; first {}: {}",
            unmatched.len(),
            shown.len(),
            shown.join(", ")
        )));
    }
    if gold.is_empty() {
        return Err(CliError::data(format!(
            "no gold record carries a {} label",
            cfg.task.name()
        )));
    }
    if ignored > 0 {
        log::warn!(
            "ignored {ignored} predictions for gold records without a {} label",
            cfg.task.name()
        );
    }

    let golds: Vec<usize> = gold.values().copied().collect();
    let predicted: Vec<usize> = gold.keys().map(|id| preds[id]).collect();
    let cm = confusion(&golds, &predicted, names.len())
        .and_then(|cm| cm.with_class_names(names))
        .map_err(|e| CliError::input(e.to_string()))?
        .restricted_to_observed();
    let report = score(&cm).map_err(|e| CliError::input(e.to_string()))?;

    let prefix = opts
        .report
        .clone()
        .unwrap_or_else(|| sibling(&opts.predictions, ".metrics"));
    write_atomic(&sibling(&prefix, ".json"), report.to_json().as_bytes())?;
    write_atomic(&sibling(&prefix, ".txt"), report.to_table().as_bytes())?;
    out.write_all(report.to_table().as_bytes())
        .map_err(|e| CliError::input(format!("writing report: {e}")))?;
    Ok(report)
}
