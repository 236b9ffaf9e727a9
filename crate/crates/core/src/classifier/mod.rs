//! Multinomial logistic regression over sparse feature vectors.
//!
//! Parameters are a `K x D` weight matrix and a bias of length `K`. The same
//! head trains on TF-IDF vectors or on dense vectors from a remote encoder.

mod encoder;
mod model_file;
mod train;

use std::collections::BTreeMap;

use thiserror::Error;

use crate::textprep::FeatureVector;

pub use self::encoder::{embed_remote, EncoderBackendRef, EncoderError, EncoderRequest, EncoderResponse};
pub use self::model_file::{ModelFileError, MODEL_FORMAT_VERSION};
pub use self::train::{train, EpochRecord, TrainConfig, TrainingHistory};

#[derive(Debug, Error, PartialEq)]
pub enum ClassifierError {
    #[error("logits contain a non-finite value")]
    NonFinite,
    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },
    #[error("feature dimension mismatch: model expects {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },
    #[error("batch is empty")]
    EmptyBatch,
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("dataset has a single class ({0}); at least two are needed")]
    SingleClass(String),
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error("model needs at least one class")]
    NoClasses,
}

/// A feature vector with its gold class index.
#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub features: FeatureVector,
    pub label: usize,
}

impl Example {
    pub fn new(features: FeatureVector, label: usize) -> Self {
        Self { features, label }
    }
}

/// Weights (row-major `K x D`), bias, class names and the feature-space tag.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    weights: Vec<f64>,
    bias: Vec<f64>,
    dim: usize,
    class_names: Vec<String>,
    feature_space: String,
}

impl ModelParams {
    pub fn zeros(
        class_names: Vec<String>,
        dim: usize,
        feature_space: impl Into<String>,
    ) -> Result<Self, ClassifierError> {
        if class_names.is_empty() {
            return Err(ClassifierError::NoClasses);
        }
        let k = class_names.len();
        Ok(Self {
            weights: vec![0.0; k * dim],
            bias: vec![0.0; k],
            dim,
            class_names,
            feature_space: feature_space.into(),
        })
    }

    /// Builds from explicit values. `weights` is row-major `K x dim`.
    pub fn from_parts(
        class_names: Vec<String>,
        dim: usize,
        feature_space: impl Into<String>,
        bias: Vec<f64>,
        weights: Vec<f64>,
    ) -> Result<Self, ClassifierError> {
        let k = class_names.len();
        if k == 0 {
            return Err(ClassifierError::NoClasses);
        }
        if bias.len() != k || weights.len() != k * dim {
            return Err(ClassifierError::DimMismatch {
                expected: k * (dim + 1),
                got: bias.len() + weights.len(),
            });
        }
        if bias.iter().chain(&weights).any(|v| !v.is_finite()) {
            return Err(ClassifierError::NonFinite);
        }
        Ok(Self {
            weights,
            bias,
            dim,
            class_names,
            feature_space: feature_space.into(),
        })
    }

    pub fn num_classes(&self) -> usize {
        self.bias.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn feature_space(&self) -> &str {
        &self.feature_space
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn bias_mut(&mut self) -> &mut [f64] {
        &mut self.bias
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weights_mut(&mut self) -> &mut [f64] {
        &mut self.weights
    }

    pub fn weight(&self, class: usize, column: usize) -> f64 {
        self.weights[class * self.dim + column]
    }

    pub fn weight_norm_sq(&self) -> f64 {
        self.weights.iter().map(|w| w * w).sum()
    }

    /// `Wx + b`.
    pub fn logits(&self, x: &FeatureVector) -> Result<Vec<f64>, ClassifierError> {
        if x.dim() != self.dim {
            return Err(ClassifierError::DimMismatch {
                expected: self.dim,
                got: x.dim(),
            });
        }
        Ok(self
            .bias
            .iter()
            .enumerate()
            .map(|(k, b)| {
                let row = &self.weights[k * self.dim..(k + 1) * self.dim];
                b + x.entries().iter().map(|&(c, v)| row[c] * v).sum::<f64>()
            })
            .collect())
    }
}

/// Numerically stable softmax (max-shifted).
pub fn softmax(logits: &[f64]) -> Result<Vec<f64>, ClassifierError> {
    if logits.iter().any(|z| !z.is_finite()) {
        return Err(ClassifierError::NonFinite);
    }
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    Ok(exps.into_iter().map(|e| e / total).collect())
}

/// `ln Σ exp(z)`, max-shifted.
fn log_sum_exp(logits: &[f64]) -> f64 {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max + logits.iter().map(|z| (z - max).exp()).sum::<f64>().ln()
}

/// Index of the largest value; the lowest index wins ties.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub class_id: usize,
    pub probs: Vec<f64>,
}

pub fn predict(params: &ModelParams, x: &FeatureVector) -> Result<Prediction, ClassifierError> {
    let probs = softmax(&params.logits(x)?)?;
    Ok(Prediction {
        class_id: argmax(&probs),
        probs,
    })
}

/// Dense gradients, same shape as [`ModelParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

/// Data term of a batch: summed cross-entropy, summed bias gradient and the
/// summed weight gradient for the touched columns only.
pub(crate) struct BatchTerms {
    pub loss_sum: f64,
    pub bias: Vec<f64>,
    pub columns: BTreeMap<usize, Vec<f64>>,
}

pub(crate) fn batch_terms<'a>(
    params: &ModelParams,
    batch: impl IntoIterator<Item = &'a Example>,
) -> Result<BatchTerms, ClassifierError> {
    let k = params.num_classes();
    let mut terms = BatchTerms {
        loss_sum: 0.0,
        bias: vec![0.0; k],
        columns: BTreeMap::new(),
    };
    for ex in batch {
        if ex.label >= k {
            return Err(ClassifierError::LabelOutOfRange {
                label: ex.label,
                classes: k,
            });
        }
        let logits = params.logits(&ex.features)?;
        let lse = log_sum_exp(&logits);
        terms.loss_sum += lse - logits[ex.label];
        // d(loss)/d(logits) = p - one_hot(y)
        let delta: Vec<f64> = logits
            .iter()
            .enumerate()
            .map(|(j, z)| (z - lse).exp() - if j == ex.label { 1.0 } else { 0.0 })
            .collect();
        for (b, d) in terms.bias.iter_mut().zip(&delta) {
            *b += d;
        }
        for &(c, v) in ex.features.entries() {
            let col = terms.columns.entry(c).or_insert_with(|| vec![0.0; k]);
            for (g, d) in col.iter_mut().zip(&delta) {
                *g += d * v;
            }
        }
    }
    Ok(terms)
}

/// Mean cross-entropy over `batch` plus `(l2 / 2)·‖W‖²`, and its gradient.
pub fn loss_and_grad(params: &ModelParams, batch: &[Example], l2: f64) -> Result<(f64, Gradients), ClassifierError> {
    if batch.is_empty() {
        return Err(ClassifierError::EmptyBatch);
    }
    let terms = batch_terms(params, batch.iter())?;
    let n = batch.len() as f64;
    let dim = params.dim();
    let mut weights: Vec<f64> = params.weights.iter().map(|w| l2 * w).collect();
    for (c, col) in &terms.columns {
        for (k, g) in col.iter().enumerate() {
            weights[k * dim + c] += g / n;
        }
    }
    let loss = terms.loss_sum / n + 0.5 * l2 * params.weight_norm_sq();
    let bias = terms.bias.iter().map(|g| g / n).collect();
    Ok((loss, Gradients { weights, bias }))
}

/// Mean cross-entropy without the penalty term.
pub fn mean_loss(params: &ModelParams, data: &[Example]) -> Result<f64, ClassifierError> {
    if data.is_empty() {
        return Err(ClassifierError::EmptyBatch);
    }
    Ok(batch_terms(params, data.iter())?.loss_sum / data.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn names(k: usize) -> Vec<String> {
        (0..k).map(|i| format!("c{i}")).collect()
    }

    #[test]
    fn softmax_examples() {
        assert_eq!(softmax(&[0.0; 4]).unwrap(), vec![0.25; 4]);
        let p = softmax(&[1000.0, 0.0]).unwrap();
        assert!((p[0] - 1.0).abs() < 1e-12 && p[1] < 1e-300);
        assert_eq!(softmax(&[f64::NAN, 0.0]), Err(ClassifierError::NonFinite));
        assert_eq!(softmax(&[f64::INFINITY]), Err(ClassifierError::NonFinite));
    }

    #[test]
    fn hand_derived_two_class_gradient() {
        // p = [0.5, 0.5], y = 0: loss = ln 2, dlogits = [-0.5, 0.5], x = [1]
        let params = ModelParams::zeros(names(2), 1, "t").unwrap();
        let batch = [Example::new(FeatureVector::from_dense(&[1.0]), 0)];
        let (loss, g) = loss_and_grad(&params, &batch, 0.0).unwrap();
        assert!((loss - std::f64::consts::LN_2).abs() < 1e-15);
        assert_eq!(g.bias, vec![-0.5, 0.5]);
        assert_eq!(g.weights, vec![-0.5, 0.5]);
    }

    #[test]
    fn confident_model_has_vanishing_loss() {
        let params = ModelParams::from_parts(names(2), 1, "t", vec![0.0, 0.0], vec![60.0, -60.0]).unwrap();
        let batch = [Example::new(FeatureVector::from_dense(&[1.0]), 0)];
        let (loss, g) = loss_and_grad(&params, &batch, 0.0).unwrap();
        assert!(loss < 1e-40);
        assert!(g.weights.iter().chain(&g.bias).all(|v| v.abs() < 1e-40));
    }

    #[test]
    fn l2_term() {
        let params = ModelParams::from_parts(names(2), 2, "t", vec![0.0, 0.0], vec![1.0, 2.0, 0.0, 0.0]).unwrap();
        let batch = [Example::new(FeatureVector::zeros(2), 1)];
        let (loss, g) = loss_and_grad(&params, &batch, 0.5).unwrap();
        // logits all zero -> ln 2; penalty 0.25 * 5
        assert!((loss - (std::f64::consts::LN_2 + 1.25)).abs() < 1e-15);
        assert_eq!(g.weights, vec![0.5, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn error_paths() {
        let params = ModelParams::zeros(names(2), 3, "t").unwrap();
        assert_eq!(loss_and_grad(&params, &[], 0.0), Err(ClassifierError::EmptyBatch));
        let bad = [Example::new(FeatureVector::zeros(3), 2)];
        assert_eq!(
            loss_and_grad(&params, &bad, 0.0),
            Err(ClassifierError::LabelOutOfRange { label: 2, classes: 2 })
        );
        assert_eq!(
            predict(&params, &FeatureVector::zeros(4)),
            Err(ClassifierError::DimMismatch { expected: 3, got: 4 })
        );
        assert_eq!(ModelParams::zeros(vec![], 3, "t"), Err(ClassifierError::NoClasses));
        assert_eq!(
            ModelParams::from_parts(names(1), 1, "t", vec![f64::NAN], vec![0.0]),
            Err(ClassifierError::NonFinite)
        );
    }

    #[test]
    fn zero_model_predicts_uniform_class_zero() {
        let params = ModelParams::zeros(names(4), 3, "t").unwrap();
        let p = predict(&params, &FeatureVector::from_dense(&[0.3, 0.0, 1.0])).unwrap();
        assert_eq!(p.class_id, 0);
        assert_eq!(p.probs, vec![0.25; 4]);
    }

    #[test]
    fn argmax_ties_take_lowest_index() {
        assert_eq!(argmax(&[0.1, 0.4, 0.4]), 1);
        assert_eq!(argmax(&[0.0]), 0);
    }

    proptest! {
        #[test]
        fn softmax_properties(z in proptest::collection::vec(-50.0f64..50.0, 1..8), c in -100.0f64..100.0) {
            let p = softmax(&z).unwrap();
            prop_assert!(p.iter().all(|&v| v > 0.0 && v <= 1.0));
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            let shifted: Vec<f64> = z.iter().map(|v| v + c).collect();
            let q = softmax(&shifted).unwrap();
            for (a, b) in p.iter().zip(&q) {
                prop_assert!((a - b).abs() < 1e-9);
            }
        }

        #[test]
        fn prediction_invariant_under_bias_shift(
            w in proptest::collection::vec(-3.0f64..3.0, 6),
            b in proptest::collection::vec(-3.0f64..3.0, 3),
            x in proptest::collection::vec(-1.0f64..1.0, 2),
            c in -10.0f64..10.0,
        ) {
            let m = ModelParams::from_parts(names(3), 2, "t", b.clone(), w.clone()).unwrap();
            let shifted = ModelParams::from_parts(names(3), 2, "t", b.iter().map(|v| v + c).collect(), w).unwrap();
            let x = FeatureVector::from_dense(&x);
            let p = predict(&m, &x).unwrap();
            prop_assert_eq!(p.class_id, argmax(&p.probs));
            prop_assert!((p.probs.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            let q = predict(&shifted, &x).unwrap();
            for (a, b) in p.probs.iter().zip(&q.probs) {
                prop_assert!((a - b).abs() < 1e-9);
            }
            let mut sorted = p.probs.clone();
            sorted.sort_by(|a, b| b.total_cmp(a));
            if sorted[0] - sorted[1] > 1e-9 {
                prop_assert_eq!(p.class_id, q.class_id);
            }
        }
    }
}
