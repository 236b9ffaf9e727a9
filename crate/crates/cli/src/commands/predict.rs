use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use factcheck_core::classifier::{predict, ModelParams};
use factcheck_core::corpus::{parse_jsonl, to_jsonl, CorpusLine, PredictionLine};
use factcheck_core::textprep::{FeatureVector, Vocabulary};
use serde::Serialize;

use crate::config::{Backend, PipelineConfig};
use crate::error::{CliError, CliResult, InputContext};
use crate::features::{encoder_tag, encoder_vectors, tfidf_tag, tfidf_vectors, InputText};
use crate::io::{read_text, sibling, write_atomic};

use super::train::VOCAB_SUFFIX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InputFormat {
    /// Corpus lines; output lines carry the record_id.
    Corpus,
    /// One document per line.
    Text,
}

#[derive(Debug, Clone)]
pub struct PredictOptions {
    /// `-` reads standard input.
    pub input: PathBuf,
    pub format: InputFormat,
    /// Standard output when absent.
    pub output: Option<PathBuf>,
}

/// Output line for plain-text input.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TextPrediction {
    pub class: String,
    pub probs: Vec<f64>,
}

fn load_model(cfg: &PipelineConfig) -> CliResult<ModelParams> {
    let params = ModelParams::load(&cfg.model_path).input_ctx(format_args!("model {}", cfg.model_path.display()))?;
    let expected = cfg.task.class_names();
    if params.class_names() != expected.as_slice() {
        return Err(CliError::input(format!(
            "model has {} classes {:?} but task {} expects {} classes {:?}",
            params.num_classes(),
            params.class_names(),
            cfg.task.name(),
            expected.len(),
            expected
        )));
    }
    Ok(params)
}

fn featurize(cfg: &PipelineConfig, params: &ModelParams, inputs: &[InputText]) -> CliResult<Vec<FeatureVector>> {
    let tag = params.feature_space();
    match cfg.backend {
        Backend::Tfidf => {
            let path = sibling(&cfg.model_path, VOCAB_SUFFIX);
            let vocab = Vocabulary::from_text(&read_text(&path, "vocabulary")?).input_ctx(path.display())?;
            if tfidf_tag(&vocab) != tag {
                return Err(CliError::input(format!(
                    "vocabulary {} does not belong to the model (model feature space {tag})",
                    path.display()
                )));
            }
            Ok(tfidf_vectors(inputs, &vocab))
        }
        Backend::RemoteEncoder => {
            let enc = cfg.encoder()?;
            if encoder_tag(enc) != tag {
                return Err(CliError::input(format!(
                    "model feature space {tag} does not match the configured encoder ({})",
                    encoder_tag(enc)
                )));
            }
            encoder_vectors(inputs, enc)
        }
    }
}

fn read_input(path: &Path) -> CliResult<String> {
    if path == Path::new("-") {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .input_ctx("reading standard input")?;
        Ok(s)
    } else {
        read_text(path, "input")
    }
}

/// Predicts every input and returns the rendered output lines.
pub fn predict_text(cfg: &PipelineConfig, format: InputFormat, input: &str) -> CliResult<String> {
    let params = load_model(cfg)?;
    let (ids, inputs): (Vec<Option<String>>, Vec<InputText>) = match format {
        InputFormat::Corpus => parse_jsonl::<CorpusLine>(input)
            .input_ctx("input corpus")?
            .iter()
            .map(|l| (Some(l.record_id.clone()), InputText::from(l)))
            .unzip(),
        InputFormat::Text => input.lines().map(|l| (None, InputText::plain(l))).unzip(),
    };
    if inputs.is_empty() {
        return Ok(String::new());
    }
    let features = featurize(cfg, &params, &inputs)?;
    let mut preds = Vec::with_capacity(features.len());
    for x in &features {
        let p = predict(&params, x).map_err(|e| CliError::input(e.to_string()))?;
        preds.push((params.class_names()[p.class_id].clone(), p.probs));
    }
    Ok(match format {
        InputFormat::Corpus => {
            let lines: Vec<PredictionLine> = ids
                .into_iter()
                .zip(preds)
                .map(|(id, (class, probs))| PredictionLine {
                    record_id: id.expect("corpus input has ids"),
                    class,
                    probs,
                })
                .collect();
            to_jsonl(&lines)
        }
        InputFormat::Text => {
            let lines: Vec<TextPrediction> = preds
                .into_iter()
                .map(|(class, probs)| TextPrediction { class, probs })
                .collect();
            to_jsonl(&lines)
        }
    })
}

pub fn run(cfg: &PipelineConfig, opts: &PredictOptions, out: &mut dyn Write) -> CliResult<()> {
    let input = read_input(&opts.input)?;
    let rendered = predict_text(cfg, opts.format, &input)?;
    match &opts.output {
        Some(path) => write_atomic(path, rendered.as_bytes()),
        None => out.write_all(rendered.as_bytes()).input_ctx("writing predictions"),
    }
}
