#![allow(dead_code)]

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};

use factcheck_core::corpus::{to_jsonl, CorpusLine};
use factcheck_core::ingest::record_id_for;
use factcheck_core::labels::{Taxonomy, VerdictClass};
use factcheck_core::synthetic::{generate, SyntheticSpec};

pub fn core_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core")
}

pub fn mapping_table() -> PathBuf {
    core_dir().join("data/mapping.toml")
}

pub fn fixture_site() -> PathBuf {
    core_dir().join("tests/fixtures/site")
}

pub struct Run {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// A scratch directory holding `factcheck.toml` and everything it points at.
pub struct Workspace {
    pub dir: tempfile::TempDir,
}

impl Workspace {
    pub fn new(extra_config: &str) -> Self {
        let dir = tempfile::tempdir().unwrap();
        let config = format!(
            "mapping_table_path = {:?}\ncorpus_path = \"corpus.jsonl\"\nmodel_path = \"model.bin\"\n{extra_config}",
            mapping_table().to_str().unwrap()
        );
        std::fs::write(dir.path().join("factcheck.toml"), config).unwrap();
        std::fs::create_dir_all(dir.path().join("sites")).unwrap();
        Self { dir }
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    pub fn write(&self, name: &str, contents: impl AsRef<[u8]>) {
        std::fs::write(self.path(name), contents).unwrap();
    }

    pub fn read(&self, name: &str) -> String {
        std::fs::read_to_string(self.path(name)).unwrap()
    }

    pub fn bytes(&self, name: &str) -> Vec<u8> {
        std::fs::read(self.path(name)).unwrap()
    }

    pub fn run(&self, args: &[&str]) -> Run {
        self.run_with(args, None, &[])
    }

    pub fn run_with(&self, args: &[&str], stdin: Option<&str>, env: &[(&str, &str)]) -> Run {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_factcheck"));
        cmd.current_dir(self.dir.path())
            .args(args)
            .env_remove("FACTCHECK_ENCODER_URL")
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped());
        for (k, v) in env {
            cmd.env(k, v);
        }
        let mut child = cmd.spawn().unwrap();
        let mut pipe = child.stdin.take().unwrap();
        pipe.write_all(stdin.unwrap_or("").as_bytes()).unwrap();
        drop(pipe);
        let out = child.wait_with_output().unwrap();
        Run {
            code: out.status.code().unwrap_or(-1),
            stdout: String::from_utf8_lossy(&out.stdout).into_owned(),
            stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
        }
    }
}

pub fn line(i: usize, title: &str, body: &str, verdict: Option<&str>) -> CorpusLine {
    let url = format!("https://checks.example/{i}");
    CorpusLine {
        record_id: record_id_for(&url),
        canonical_url: url,
        site_id: "checks".into(),
        title: title.into(),
        published_at: None,
        body_text: body.into(),
        raw_verdict: verdict.map(str::to_string),
        raw_topic: None,
        verdict_class: None,
        domain_class: None,
    }
}

/// Labeled synthetic corpus: `classes` verdict classes, `per_class` docs each.
pub fn synthetic_corpus(classes: usize, per_class: usize, seed: u64) -> Vec<CorpusLine> {
    generate(&SyntheticSpec::new(classes, per_class, seed))
        .into_iter()
        .enumerate()
        .map(|(i, d)| {
            let class = VerdictClass::from_index(d.label).unwrap();
            let mut l = line(i, "", &d.text, Some(class.name()));
            l.verdict_class = Some(class);
            l
        })
        .collect()
}

pub fn jsonl(lines: &[CorpusLine]) -> String {
    to_jsonl(lines)
}

pub fn site_profile(base_url: &str) -> String {
    format!(
        "site_id = \"mockcheck\"\nseed_urls = [\"{base_url}/\"]\nrate_limit_ms = 5\narticle_pattern = \"/articles/\"\n\
         [extraction_rules]\ntitle = \"article h1.title\"\nbody = \"div.body p\"\npublished_at = \"time.published@datetime\"\n\
         raw_verdict = \".rating strong\"\nraw_topic = \"span.category\"\n"
    )
}
