//! Seeded synthetic corpora with class-specific vocabularies, used to check
//! the training stack end to end.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub classes: usize,
    pub docs_per_class: usize,
    /// Terms that only ever occur in one class.
    pub class_terms: usize,
    /// Terms shared by all classes.
    pub noise_terms: usize,
    pub mean_len: usize,
    /// Document length is uniform in `mean_len ± len_spread`.
    pub len_spread: usize,
    /// Probability that a token is drawn from the class vocabulary.
    pub class_token_prob: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn new(classes: usize, docs_per_class: usize, seed: u64) -> Self {
        Self {
            classes,
            docs_per_class,
            class_terms: 20,
            noise_terms: 50,
            mean_len: 30,
            len_spread: 10,
            class_token_prob: 0.5,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntheticDoc {
    pub text: String,
    pub label: usize,
}

pub fn class_term(class: usize, j: usize) -> String {
    format!("class{class}term{j}")
}

pub fn noise_term(j: usize) -> String {
    format!("noise{j}")
}

/// Documents in class order, `docs_per_class` per class.
pub fn generate(spec: &SyntheticSpec) -> Vec<SyntheticDoc> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let lo = spec.mean_len.saturating_sub(spec.len_spread).max(1);
    let hi = spec.mean_len + spec.len_spread;
    let mut docs = Vec::with_capacity(spec.classes * spec.docs_per_class);
    for label in 0..spec.classes {
        for _ in 0..spec.docs_per_class {
            let len = rng.gen_range(lo..=hi);
            let words: Vec<String> = (0..len)
                .map(|_| {
                    if spec.noise_terms == 0 || rng.gen_bool(spec.class_token_prob) {
                        class_term(label, rng.gen_range(0..spec.class_terms))
                    } else {
                        noise_term(rng.gen_range(0..spec.noise_terms))
                    }
                })
                .collect();
            docs.push(SyntheticDoc {
                text: words.join(" "),
                label,
            });
        }
    }
    docs
}

/// Seeded per-class holdout split: `(train, test)` with `round(n * test_fraction)`
/// of each class held out.
pub fn holdout_split<T: Clone>(
    items: &[T],
    label: impl Fn(&T) -> usize,
    test_fraction: f64,
    seed: u64,
) -> (Vec<T>, Vec<T>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max_label = items.iter().map(&label).max().map_or(0, |m| m + 1);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for c in 0..max_label {
        let mut members: Vec<&T> = items.iter().filter(|it| label(it) == c).collect();
        members.shuffle(&mut rng);
        let n_test = (members.len() as f64 * test_fraction).round() as usize;
        test.extend(members[..n_test].iter().map(|t| (*t).clone()));
        train.extend(members[n_test..].iter().map(|t| (*t).clone()));
    }
    (train, test)
}
