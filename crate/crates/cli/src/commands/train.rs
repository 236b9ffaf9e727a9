use std::collections::BTreeMap;
use std::io::Write;

use factcheck_core::classifier::{train, ClassifierError, Example, ModelParams, TrainingHistory};
use factcheck_core::textprep::build_vocabulary;

use crate::config::{Backend, PipelineConfig};
use crate::error::{CliError, CliResult};
use crate::features::{encoder_tag, encoder_vectors, label_of, tfidf_tag, tfidf_vectors, InputText};
use crate::io::{read_corpus, sibling, write_atomic};

pub const VOCAB_SUFFIX: &str = ".vocab";
pub const HISTORY_SUFFIX: &str = ".history.tsv";

#[derive(Debug)]
pub struct TrainOutcome {
    pub params: ModelParams,
    pub history: TrainingHistory,
    pub examples: usize,
}

pub fn run(cfg: &PipelineConfig, out: &mut dyn Write) -> CliResult<TrainOutcome> {
    let lines = read_corpus(&cfg.corpus_path)?;
    let class_names = cfg.task.class_names();
    let (inputs, labels): (Vec<InputText>, Vec<usize>) = lines
        .iter()
        .filter_map(|l| label_of(l, cfg.task).map(|y| (InputText::from(l), y)))
        .unzip();
    if inputs.is_empty() {
        return Err(CliError::data(format!(
            "no record in {} carries a {} label; run `normalize` first",
            cfg.corpus_path.display(),
            cfg.task.name()
        )));
    }
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for &y in &labels {
        *counts.entry(y).or_default() += 1;
    }
    if counts.len() < 2 {
        let (&only, &n) = counts.iter().next().expect("nonempty");
        return Err(CliError::data(format!(
            "all {n} labeled records are {:?}; training needs at least two classes",
            class_names[only]
        )));
    }

    let (features, dim, tag, vocab_text) = match cfg.backend {
        Backend::Tfidf => {
            let tokens: Vec<_> = inputs.iter().map(InputText::tokens).collect();
            let vocab = build_vocabulary(&tokens, cfg.textprep).map_err(|e| CliError::input(e.to_string()))?;
            if vocab.is_empty() {
                return Err(CliError::data(format!(
                    "vocabulary is empty: no term appears in {} of the {} documents",
                    cfg.textprep.min_df,
                    tokens.len()
                )));
            }
            (
                tfidf_vectors(&inputs, &vocab),
                vocab.len(),
                tfidf_tag(&vocab),
                Some(vocab.to_text()),
            )
        }
        Backend::RemoteEncoder => {
            let enc = cfg.encoder()?;
            (encoder_vectors(&inputs, enc)?, enc.dims, encoder_tag(enc), None)
        }
    };
    let dataset: Vec<Example> = features
        .into_iter()
        .zip(&labels)
        .map(|(x, &y)| Example::new(x, y))
        .collect();

    let (params, history) = train(&dataset, class_names, dim, &tag, &cfg.train).map_err(|e| match e {
        ClassifierError::EmptyDataset | ClassifierError::SingleClass(_) => CliError::data(e.to_string()),
        other => CliError::input(other.to_string()),
    })?;

    write_atomic(&cfg.model_path, &params.to_bytes())?;
    if let Some(text) = vocab_text {
        write_atomic(&sibling(&cfg.model_path, VOCAB_SUFFIX), text.as_bytes())?;
    }
    write_atomic(&sibling(&cfg.model_path, HISTORY_SUFFIX), history.to_tsv().as_bytes())?;

    let best = &history.epochs[history.best_epoch - 1];
    let val = best.val_loss.map_or_else(|| "-".to_string(), |v| format!("{v:.6}"));
    writeln!(
        out,
        "trained {} on {} examples ({} train / {} validation), {} features\n\
         epochs run {}{}, best epoch {}: train loss {:.6}, validation loss {val}\n\
         model written to {}",
        cfg.task.name(),
        dataset.len(),
        history.train_size,
        history.val_size,
        dim,
        history.epochs.len(),
        if history.stopped_early { " (early stop)" } else { "" },
        history.best_epoch,
        best.train_loss,
        cfg.model_path.display()
    )
    .map_err(|e| CliError::input(format!("writing summary: {e}")))?;
    Ok(TrainOutcome {
        params,
        history,
        examples: dataset.len(),
    })
}
