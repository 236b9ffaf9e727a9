use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{batch_terms, mean_loss, ClassifierError, Example, ModelParams};

/// SGD hyperparameters.
///
/// Defaults are 200 epochs, batches of 10 and a step size of 0.001. For a
/// fine-tuned remote encoder the usual regime is 3-4 epochs at 2e-5.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub seed: u64,
    pub val_fraction: f64,
    /// Epochs without validation improvement before stopping; 0 disables.
    pub patience: usize,
    pub l2: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 200,
            batch_size: 10,
            learning_rate: 0.001,
            seed: 42,
            val_fraction: 0.1,
            patience: 10,
            l2: 0.0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), ClassifierError> {
        let fail = |m: &str| Err(ClassifierError::InvalidConfig(m.to_string()));
        if self.epochs == 0 {
            return fail("epochs must be at least 1");
        }
        if self.batch_size == 0 {
            return fail("batch_size must be at least 1");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return fail("learning_rate must be positive");
        }
        if !(self.val_fraction > 0.0 && self.val_fraction < 1.0) {
            return fail("val_fraction must lie strictly between 0 and 1");
        }
        if !(self.l2 >= 0.0 && self.l2.is_finite()) {
            return fail("l2 must be nonnegative");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpochRecord {
    /// 1-based.
    pub epoch: usize,
    pub train_loss: f64,
    /// Absent when the split left no validation examples.
    pub val_loss: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainingHistory {
    /// Train loss of the zero-initialized model.
    pub initial_train_loss: f64,
    pub epochs: Vec<EpochRecord>,
    /// Epoch whose parameters were returned.
    pub best_epoch: usize,
    pub stopped_early: bool,
    pub train_size: usize,
    pub val_size: usize,
}

impl TrainingHistory {
    /// Tab-separated per-epoch losses.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("epoch\ttrain_loss\tval_loss\n");
        for e in &self.epochs {
            let val = e.val_loss.map_or_else(|| "-".to_string(), |v| format!("{v:.17e}"));
            out.push_str(&format!("{}\t{:.17e}\t{val}\n", e.epoch, e.train_loss));
        }
        out
    }
}

/// Per class: shuffle its examples, send `round(n * val_fraction)` of them to
/// validation while keeping at least one for training.
fn stratified_split(dataset: &[Example], val_fraction: f64, rng: &mut ChaCha8Rng) -> (Vec<usize>, Vec<usize>) {
    let mut by_class: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, ex) in dataset.iter().enumerate() {
        by_class.entry(ex.label).or_default().push(i);
    }
    let mut train = Vec::new();
    let mut val = Vec::new();
    for mut idx in by_class.into_values() {
        idx.shuffle(rng);
        let n = idx.len();
        let n_val = ((n as f64 * val_fraction).round() as usize).min(n - 1);
        val.extend_from_slice(&idx[..n_val]);
        train.extend_from_slice(&idx[n_val..]);
    }
    train.sort_unstable();
    val.sort_unstable();
    (train, val)
}

/// Trains a zero-initialized softmax head with minibatch SGD.
///
/// The dataset is split (stratified, seeded) into train and validation sets;
/// each epoch reshuffles the training set. Training stops after
/// `config.epochs` or after `config.patience` epochs without a strictly lower
/// validation loss, and the parameters of the best validation epoch are
/// returned. Without validation examples the train loss is used instead.
pub fn train(
    dataset: &[Example],
    class_names: Vec<String>,
    dim: usize,
    feature_space: &str,
    config: &TrainConfig,
) -> Result<(ModelParams, TrainingHistory), ClassifierError> {
    config.validate()?;
    if dataset.is_empty() {
        return Err(ClassifierError::EmptyDataset);
    }
    let k = class_names.len();
    let mut params = ModelParams::zeros(class_names, dim, feature_space)?;
    for ex in dataset {
        if ex.label >= k {
            return Err(ClassifierError::LabelOutOfRange {
                label: ex.label,
                classes: k,
            });
        }
        if ex.features.dim() != dim {
            return Err(ClassifierError::DimMismatch {
                expected: dim,
                got: ex.features.dim(),
            });
        }
    }
    let first = dataset[0].label;
    if dataset.iter().all(|ex| ex.label == first) {
        return Err(ClassifierError::SingleClass(params.class_names()[first].clone()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let (mut train_idx, val_idx) = stratified_split(dataset, config.val_fraction, &mut rng);
    let train_set: Vec<Example> = train_idx.iter().map(|&i| dataset[i].clone()).collect();
    let val_set: Vec<Example> = val_idx.iter().map(|&i| dataset[i].clone()).collect();

    let mut history = TrainingHistory {
        initial_train_loss: mean_loss(&params, &train_set)?,
        epochs: Vec::new(),
        best_epoch: 0,
        stopped_early: false,
        train_size: train_set.len(),
        val_size: val_set.len(),
    };
    let mut best: Option<(f64, ModelParams)> = None;
    let mut since_best = 0;
    let mut batch = Vec::with_capacity(config.batch_size);

    for epoch in 1..=config.epochs {
        train_idx.shuffle(&mut rng);
        for chunk in train_idx.chunks(config.batch_size) {
            batch.clear();
            batch.extend(chunk.iter().map(|&i| &dataset[i]));
            sgd_step(&mut params, &batch, config)?;
        }

        let train_loss = mean_loss(&params, &train_set)?;
        let val_loss = if val_set.is_empty() {
            None
        } else {
            Some(mean_loss(&params, &val_set)?)
        };
        history.epochs.push(EpochRecord {
            epoch,
            train_loss,
            val_loss,
        });

        let monitored = val_loss.unwrap_or(train_loss);
        if best.as_ref().is_none_or(|(b, _)| monitored < *b) {
            best = Some((monitored, params.clone()));
            history.best_epoch = epoch;
            since_best = 0;
        } else {
            since_best += 1;
            if config.patience > 0 && since_best >= config.patience {
                history.stopped_early = true;
                break;
            }
        }
    }

    let (_, best_params) = best.expect("at least one epoch ran");
    Ok((best_params, history))
}

/// `θ ← θ − lr·∇`, with the ridge term applied as weight decay so only the
/// columns present in the batch are touched by the data gradient.
fn sgd_step(params: &mut ModelParams, batch: &[&Example], config: &TrainConfig) -> Result<(), ClassifierError> {
    let terms = batch_terms(params, batch.iter().copied())?;
    let scale = config.learning_rate / batch.len() as f64;
    if config.l2 > 0.0 {
        let decay = 1.0 - config.learning_rate * config.l2;
        params.weights_mut().iter_mut().for_each(|w| *w *= decay);
    }
    let dim = params.dim();
    let weights = params.weights_mut();
    for (c, col) in &terms.columns {
        for (k, g) in col.iter().enumerate() {
            weights[k * dim + c] -= scale * g;
        }
    }
    for (b, g) in params.bias_mut().iter_mut().zip(&terms.bias) {
        *b -= scale * g;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textprep::FeatureVector;

    fn ex(label: usize) -> Example {
        Example::new(FeatureVector::zeros(1), label)
    }

    #[test]
    fn split_is_stratified_and_keeps_a_training_example() {
        let data: Vec<Example> = (0..15).map(|_| ex(0)).chain((0..10).map(|_| ex(1))).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (train, val) = stratified_split(&data, 0.2, &mut rng);
        assert_eq!(train.len() + val.len(), 25);
        assert_eq!(val.iter().filter(|&&i| data[i].label == 0).count(), 3);
        assert_eq!(val.iter().filter(|&&i| data[i].label == 1).count(), 2);

        let tiny = vec![ex(0), ex(1)];
        let (train, val) = stratified_split(&tiny, 0.9, &mut rng);
        assert_eq!((train.len(), val.len()), (2, 0));
    }

    #[test]
    fn config_validation() {
        assert!(TrainConfig::default().validate().is_ok());
        for bad in [
            TrainConfig {
                epochs: 0,
                ..TrainConfig::default()
            },
            TrainConfig {
                batch_size: 0,
                ..TrainConfig::default()
            },
            TrainConfig {
                learning_rate: 0.0,
                ..TrainConfig::default()
            },
            TrainConfig {
                learning_rate: f64::NAN,
                ..TrainConfig::default()
            },
            TrainConfig {
                val_fraction: 1.0,
                ..TrainConfig::default()
            },
            TrainConfig {
                val_fraction: 0.0,
                ..TrainConfig::default()
            },
            TrainConfig {
                l2: -1.0,
                ..TrainConfig::default()
            },
        ] {
            assert!(bad.validate().is_err(), "{bad:?}");
        }
    }

    #[test]
    fn rejects_single_class_and_bad_labels() {
        let names = vec!["a".to_string(), "b".to_string()];
        let cfg = TrainConfig::default();
        assert!(matches!(
            train(&[ex(0), ex(0)], names.clone(), 1, "t", &cfg),
            Err(ClassifierError::SingleClass(c)) if c == "a"
        ));
        assert!(matches!(
            train(&[ex(0), ex(2)], names.clone(), 1, "t", &cfg),
            Err(ClassifierError::LabelOutOfRange { .. })
        ));
        assert!(matches!(
            train(&[], names, 1, "t", &cfg),
            Err(ClassifierError::EmptyDataset)
        ));
    }

    #[test]
    fn history_tsv_shape() {
        let data: Vec<Example> = (0..6).map(|i| ex(i % 2)).collect();
        // 3 per class at val_fraction 0.1 rounds to an empty validation set
        let cfg = TrainConfig {
            epochs: 3,
            ..TrainConfig::default()
        };
        let (_, h) = train(&data, vec!["a".into(), "b".into()], 1, "t", &cfg).unwrap();
        let tsv = h.to_tsv();
        assert_eq!(tsv.lines().count(), 1 + 3);
        assert!(tsv.lines().nth(1).unwrap().ends_with("\t-"));
        assert!(tsv.starts_with("epoch\ttrain_loss\tval_loss\n"));
    }
}
