//! Confusion matrices and the F1 family.

use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error("gold and predicted sequences differ in length ({golds} vs {preds})")]
    LengthMismatch { golds: usize, preds: usize },
    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },
    #[error("confusion matrix is empty; nothing was scored")]
    Empty,
    #[error("expected {expected} class names, got {got}")]
    ClassNames { expected: usize, got: usize },
}

/// Rows are gold classes, columns predicted classes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConfusionMatrix {
    class_names: Vec<String>,
    counts: Vec<Vec<u64>>,
}

pub fn confusion(golds: &[usize], preds: &[usize], k: usize) -> Result<ConfusionMatrix, MetricsError> {
    if golds.len() != preds.len() {
        return Err(MetricsError::LengthMismatch {
            golds: golds.len(),
            preds: preds.len(),
        });
    }
    let mut counts = vec![vec![0u64; k]; k];
    for (&g, &p) in golds.iter().zip(preds) {
        for label in [g, p] {
            if label >= k {
                return Err(MetricsError::LabelOutOfRange { label, classes: k });
            }
        }
        counts[g][p] += 1;
    }
    Ok(ConfusionMatrix {
        class_names: (0..k).map(|i| i.to_string()).collect(),
        counts,
    })
}

impl ConfusionMatrix {
    pub fn from_counts(counts: Vec<Vec<u64>>) -> Self {
        let k = counts.len();
        assert!(
            counts.iter().all(|row| row.len() == k),
            "confusion matrix must be square"
        );
        Self {
            class_names: (0..k).map(|i| i.to_string()).collect(),
            counts,
        }
    }

    pub fn with_class_names(mut self, names: Vec<String>) -> Result<Self, MetricsError> {
        if names.len() != self.counts.len() {
            return Err(MetricsError::ClassNames {
                expected: self.counts.len(),
                got: names.len(),
            });
        }
        self.class_names = names;
        Ok(self)
    }

    pub fn num_classes(&self) -> usize {
        self.counts.len()
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.counts.len()).map(|i| self.counts[i][i]).sum()
    }

    /// Drops classes that appear neither as gold nor as prediction.
    pub fn restricted_to_observed(&self) -> Self {
        let k = self.counts.len();
        let keep: Vec<usize> = (0..k)
            .filter(|&i| self.counts[i].iter().any(|&c| c > 0) || self.counts.iter().any(|row| row[i] > 0))
            .collect();
        Self {
            class_names: keep.iter().map(|&i| self.class_names[i].clone()).collect(),
            counts: keep
                .iter()
                .map(|&g| keep.iter().map(|&p| self.counts[g][p]).collect())
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassMetrics {
    pub class: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub per_class: Vec<ClassMetrics>,
    pub macro_f1: f64,
    pub weighted_f1: f64,
    pub accuracy: f64,
    pub total: u64,
    pub confusion: ConfusionMatrix,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Per-class precision, recall and F1 (0 where undefined), their unweighted
/// and support-weighted means over all classes, and accuracy.
pub fn score(cm: &ConfusionMatrix) -> Result<MetricsReport, MetricsError> {
    let total = cm.total();
    if total == 0 {
        return Err(MetricsError::Empty);
    }
    let k = cm.num_classes();
    let per_class: Vec<ClassMetrics> = (0..k)
        .map(|c| {
            let tp = cm.counts[c][c];
            let support: u64 = cm.counts[c].iter().sum();
            let predicted: u64 = cm.counts.iter().map(|row| row[c]).sum();
            let precision = ratio(tp, predicted);
            let recall = ratio(tp, support);
            let f1 = if precision + recall == 0.0 {
                0.0
            } else {
                2.0 * precision * recall / (precision + recall)
            };
            ClassMetrics {
                class: cm.class_names[c].clone(),
                precision,
                recall,
                f1,
                support,
            }
        })
        .collect();
    let macro_f1 = per_class.iter().map(|m| m.f1).sum::<f64>() / k as f64;
    let weighted_f1 = per_class.iter().map(|m| m.support as f64 * m.f1).sum::<f64>() / total as f64;
    Ok(MetricsReport {
        per_class,
        macro_f1,
        weighted_f1,
        accuracy: ratio(cm.trace(), total),
        total,
        confusion: cm.clone(),
    })
}

impl MetricsReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    /// Aligned plain-text report with the confusion matrix.
    pub fn to_table(&self) -> String {
        let names = self.confusion.class_names();
        let w = names
            .iter()
            .map(|n| n.len())
            .max()
            .unwrap_or(0)
            .max("gold \\ pred".len());
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<w$}  {:>9}  {:>9}  {:>9}  {:>7}",
            "class", "precision", "recall", "f1", "support"
        );
        for m in &self.per_class {
            let _ = writeln!(
                out,
                "{:<w$}  {:>9.4}  {:>9.4}  {:>9.4}  {:>7}",
                m.class, m.precision, m.recall, m.f1, m.support
            );
        }
        let _ = writeln!(out);
        let _ = writeln!(out, "{:<w$}  {:>9.4}", "macro f1", self.macro_f1);
        let _ = writeln!(out, "{:<w$}  {:>9.4}", "weighted f1", self.weighted_f1);
        let _ = writeln!(out, "{:<w$}  {:>9.4}", "accuracy", self.accuracy);
        let _ = writeln!(out, "{:<w$}  {:>9}", "total", self.total);
        let _ = writeln!(out);
        let cw = names.iter().map(|n| n.len()).max().unwrap_or(0).max(6);
        let _ = write!(out, "{:<w$}", "gold \\ pred");
        for n in names {
            let _ = write!(out, "  {n:>cw$}");
        }
        let _ = writeln!(out);
        for (name, row) in names.iter().zip(self.confusion.counts()) {
            let _ = write!(out, "{name:<w$}");
            for c in row {
                let _ = write!(out, "  {c:>cw$}");
            }
            let _ = writeln!(out);
        }
        out
    }
}
