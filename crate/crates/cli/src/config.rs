use std::path::{Path, PathBuf};

use clap::ValueEnum;
use factcheck_core::classifier::{EncoderBackendRef, TrainConfig};
use factcheck_core::labels::{DomainClass, Taxonomy, VerdictClass};
use factcheck_core::textprep::VocabSettings;
use serde::Deserialize;

use crate::error::{CliError, CliResult};

/// Overrides the `[encoder]` endpoint from the config file.
pub const ENCODER_URL_ENV: &str = "FACTCHECK_ENCODER_URL";

/// Looked up in the working directory when `--config` is not given.
pub const DEFAULT_CONFIG_FILE: &str = "factcheck.toml";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    /// true / false / partially_false / other
    #[value(name = "veracity-4")]
    #[serde(rename = "veracity-4")]
    Veracity4,
    /// health / election / crime / climate / economy / education
    #[value(name = "domain-6")]
    #[serde(rename = "domain-6")]
    Domain6,
}

impl Task {
    pub fn class_names(self) -> Vec<String> {
        match self {
            Task::Veracity4 => VerdictClass::names(),
            Task::Domain6 => DomainClass::names(),
        }
    }

    pub fn num_classes(self) -> usize {
        match self {
            Task::Veracity4 => VerdictClass::ALL.len(),
            Task::Domain6 => DomainClass::ALL.len(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Task::Veracity4 => "veracity-4",
            Task::Domain6 => "domain-6",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Backend {
    Tfidf,
    RemoteEncoder,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub sites_dir: PathBuf,
    pub mapping_table_path: PathBuf,
    pub corpus_path: PathBuf,
    pub model_path: PathBuf,
    pub task: Task,
    pub backend: Backend,
    /// When set, replaces `train.seed`.
    pub seed: Option<u64>,
    pub train: TrainConfig,
    pub textprep: VocabSettings,
    pub encoder: Option<EncoderBackendRef>,
    /// Sent to site operators with every crawl request.
    pub user_agent: Option<String>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            sites_dir: "sites".into(),
            mapping_table_path: "mapping.toml".into(),
            corpus_path: "data/corpus.jsonl".into(),
            model_path: "data/model.bin".into(),
            task: Task::Veracity4,
            backend: Backend::Tfidf,
            seed: None,
            train: TrainConfig::default(),
            textprep: VocabSettings::default(),
            encoder: None,
            user_agent: None,
        }
    }
}

/// Values given on the command line win over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub task: Option<Task>,
    pub backend: Option<Backend>,
    pub encoder_url: Option<String>,
}

impl Overrides {
    pub fn with_env(mut self) -> Self {
        if let Ok(url) = std::env::var(ENCODER_URL_ENV) {
            if !url.is_empty() {
                self.encoder_url = Some(url);
            }
        }
        self
    }
}

impl PipelineConfig {
    /// Parses a config file; relative paths inside it are taken relative to
    /// the file's directory.
    pub fn from_toml_str(text: &str, base: &Path) -> CliResult<Self> {
        let mut cfg: PipelineConfig = toml::from_str(text).map_err(|e| CliError::input(format!("config: {e}")))?;
        for p in [
            &mut cfg.sites_dir,
            &mut cfg.mapping_table_path,
            &mut cfg.corpus_path,
            &mut cfg.model_path,
        ] {
            if p.is_relative() && !p.as_os_str().is_empty() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    /// Reads `explicit`, else `factcheck.toml` in the working directory if it
    /// exists, else the defaults.
    pub fn resolve(explicit: Option<&Path>, overrides: &Overrides) -> CliResult<Self> {
        let file = match explicit {
            Some(p) => Some(p.to_path_buf()),
            None => Some(PathBuf::from(DEFAULT_CONFIG_FILE)).filter(|p| p.is_file()),
        };
        let mut cfg = match file {
            Some(path) => {
                let text = std::fs::read_to_string(&path)
                    .map_err(|e| CliError::input(format!("cannot read config {}: {e}", path.display())))?;
                let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
                Self::from_toml_str(&text, &base)
                    .map_err(|e| CliError::input(format!("{}: {}", path.display(), e.message)))?
            }
            None => Self::default(),
        };
        cfg.apply(overrides)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply(&mut self, o: &Overrides) -> CliResult<()> {
        if let Some(seed) = o.seed {
            self.seed = Some(seed);
        }
        if let Some(seed) = self.seed {
            self.train.seed = seed;
        }
        if let Some(task) = o.task {
            self.task = task;
        }
        if let Some(backend) = o.backend {
            self.backend = backend;
        }
        if let Some(url) = &o.encoder_url {
            match &mut self.encoder {
                Some(enc) => enc.endpoint = url.clone(),
                None => {
                    return Err(CliError::input(format!(
                        "{ENCODER_URL_ENV} is set but the config has no [encoder] section giving dims"
                    )))
                }
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> CliResult<()> {
        for (name, p) in [
            ("sites_dir", &self.sites_dir),
            ("mapping_table_path", &self.mapping_table_path),
            ("corpus_path", &self.corpus_path),
            ("model_path", &self.model_path),
        ] {
            if p.as_os_str().is_empty() {
                return Err(CliError::input(format!("config: {name} must not be empty")));
            }
        }
        self.train
            .validate()
            .map_err(|e| CliError::input(format!("config [train]: {e}")))?;
        if self.textprep.min_df == 0 || self.textprep.max_terms == 0 {
            return Err(CliError::input(
                "config [textprep]: min_df and max_terms must be at least 1",
            ));
        }
        if let Some(enc) = &self.encoder {
            if enc.dims == 0 || enc.batch_limit == 0 || enc.max_in_flight == 0 {
                return Err(CliError::input(
                    "config [encoder]: dims, batch_limit and max_in_flight must be at least 1",
                ));
            }
        }
        Ok(())
    }

    pub fn encoder(&self) -> CliResult<&EncoderBackendRef> {
        self.encoder
            .as_ref()
            .ok_or_else(|| CliError::input("the remote-encoder backend needs an [encoder] section"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_relative_paths() {
        let cfg = PipelineConfig::from_toml_str("corpus_path = \"c.jsonl\"\n", Path::new("/etc/fc")).unwrap();
        assert_eq!(cfg.corpus_path, Path::new("/etc/fc/c.jsonl"));
        assert_eq!(cfg.sites_dir, Path::new("/etc/fc/sites"));
        assert_eq!(cfg.task, Task::Veracity4);
        assert_eq!(cfg.train, TrainConfig::default());
    }

    #[test]
    fn parses_full_file() {
        let text = r#"
            task = "domain-6"
            backend = "remote-encoder"
            seed = 9
            [train]
            epochs = 3
            [textprep]
            min_df = 1
            max_terms = 10
            [encoder]
            endpoint = "http://127.0.0.1:1/embed"
            dims = 4
        "#;
        let mut cfg = PipelineConfig::from_toml_str(text, Path::new("")).unwrap();
        cfg.apply(&Overrides::default()).unwrap();
        assert_eq!(cfg.task, Task::Domain6);
        assert_eq!(cfg.backend, Backend::RemoteEncoder);
        assert_eq!(cfg.train.seed, 9);
        assert_eq!(cfg.train.batch_size, 10);
        assert_eq!(cfg.encoder().unwrap().batch_limit, 32);
        assert_eq!(cfg.task.num_classes(), 6);
    }

    #[test]
    fn overrides_win() {
        let mut cfg = PipelineConfig {
            seed: Some(1),
            encoder: Some(EncoderBackendRef::new("http://a/", 2)),
            ..PipelineConfig::default()
        };
        cfg.apply(&Overrides {
            seed: Some(5),
            task: Some(Task::Domain6),
            backend: None,
            encoder_url: Some("http://b/".into()),
        })
        .unwrap();
        assert_eq!((cfg.train.seed, cfg.task), (5, Task::Domain6));
        assert_eq!(cfg.encoder().unwrap().endpoint, "http://b/");
    }

    #[test]
    fn rejects_bad_values() {
        assert!(PipelineConfig::from_toml_str("task = \"veracity-5\"", Path::new("")).is_err());
        assert!(PipelineConfig::from_toml_str("colour = 1", Path::new("")).is_err());
        let cfg = PipelineConfig {
            corpus_path: PathBuf::new(),
            ..PipelineConfig::default()
        };
        assert!(cfg.validate().is_err());
        let mut cfg = PipelineConfig::default();
        cfg.train.val_fraction = 0.0;
        assert!(cfg.validate().is_err());
        let mut cfg = PipelineConfig::default();
        let err = cfg
            .apply(&Overrides {
                encoder_url: Some("http://x/".into()),
                ..Overrides::default()
            })
            .unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }
}
