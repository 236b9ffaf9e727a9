use std::io::Write;

use factcheck_core::corpus::CorpusLine;
use factcheck_core::labels::{
    merge_corpus, merge_domains, normalize_domain, normalize_verdict, MappingTable, UnmappedReport,
};

use crate::config::PipelineConfig;
use crate::error::{CliError, CliResult, InputContext};
use crate::io::{read_corpus, sibling, write_atomic, write_corpus};

#[derive(Debug)]
pub struct NormalizeOutcome {
    pub records: usize,
    pub verdicts_labeled: usize,
    pub domains_labeled: usize,
    pub unmapped_verdicts: UnmappedReport,
    pub unmapped_topics: UnmappedReport,
}

pub const UNMAPPED_VERDICTS_SUFFIX: &str = ".unmapped-verdicts.tsv";
pub const UNMAPPED_TOPICS_SUFFIX: &str = ".unmapped-topics.tsv";

/// Fills `verdict_class` and `domain_class` from the raw labels. Classes are
/// always recomputed, so a line whose label no longer maps loses its class.
pub fn label_lines(lines: &mut [CorpusLine], table: &MappingTable) {
    for line in lines {
        line.verdict_class = line
            .raw_verdict
            .as_deref()
            .and_then(|raw| normalize_verdict(raw, table).class());
        line.domain_class = line
            .raw_topic
            .as_deref()
            .and_then(|raw| normalize_domain(raw, table).class());
    }
}

pub fn run(cfg: &PipelineConfig, out: &mut dyn Write) -> CliResult<NormalizeOutcome> {
    let mut lines = read_corpus(&cfg.corpus_path)?;
    let table = MappingTable::load(&cfg.mapping_table_path).input_ctx("mapping table")?;
    label_lines(&mut lines, &table);

    let records: Vec<_> = lines.iter().map(CorpusLine::record).collect();
    let (verdicts, unmapped_verdicts) = merge_corpus(&records, &table);
    let (domains, unmapped_topics) = merge_domains(&records, &table);

    write_corpus(&cfg.corpus_path, &lines)?;
    write_atomic(
        &sibling(&cfg.corpus_path, UNMAPPED_VERDICTS_SUFFIX),
        unmapped_verdicts.to_tsv().as_bytes(),
    )?;
    write_atomic(
        &sibling(&cfg.corpus_path, UNMAPPED_TOPICS_SUFFIX),
        unmapped_topics.to_tsv().as_bytes(),
    )?;

    let w = |e: std::io::Error| CliError::input(format!("writing report: {e}"));
    writeln!(
        out,
        "{} records: {} with a verdict class, {} with a domain class (mapping table v{})",
        lines.len(),
        verdicts.len(),
        domains.len(),
        table.version()
    )
    .map_err(w)?;
    for (title, report) in [
        ("unmapped verdicts", &unmapped_verdicts),
        ("unmapped topics", &unmapped_topics),
    ] {
        if !report.is_empty() {
            write!(out, "\n{title}:\n{}", report.to_table()).map_err(w)?;
        }
    }
    Ok(NormalizeOutcome {
        records: lines.len(),
        verdicts_labeled: verdicts.len(),
        domains_labeled: domains.len(),
        unmapped_verdicts,
        unmapped_topics,
    })
}
