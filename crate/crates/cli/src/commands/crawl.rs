use std::collections::HashSet;
use std::io::Write;
use std::sync::Arc;
use std::thread;

use factcheck_core::corpus::CorpusLine;
use factcheck_core::ingest::{crawl_site, load_profiles, CrawlReport, Fetcher, FetcherConfig, Politeness, SiteProfile};

use crate::config::PipelineConfig;
use crate::error::{CliError, CliResult, InputContext};
use crate::io::{read_corpus_or_empty, write_corpus};

#[derive(Debug, Clone, Default)]
pub struct CrawlOptions {
    /// Only these site ids; all profiles when empty.
    pub sites: Vec<String>,
    /// Page budget per site; the profile's `max_pages` when absent.
    pub budget: Option<usize>,
}

#[derive(Debug)]
pub struct CrawlOutcome {
    pub reports: Vec<CrawlReport>,
    pub added: usize,
    pub total: usize,
}

pub fn select_profiles(cfg: &PipelineConfig, wanted: &[String]) -> CliResult<Vec<SiteProfile>> {
    if !cfg.sites_dir.is_dir() {
        return Err(CliError::input(format!(
            "no site profiles found: {} is not a directory",
            cfg.sites_dir.display()
        )));
    }
    let profiles = load_profiles(&cfg.sites_dir).input_ctx("site profiles")?;
    if profiles.is_empty() {
        return Err(CliError::input(format!(
            "no site profiles found in {}",
            cfg.sites_dir.display()
        )));
    }
    if wanted.is_empty() {
        return Ok(profiles);
    }
    if let Some(missing) = wanted.iter().find(|w| !profiles.iter().any(|p| &p.site_id == *w)) {
        return Err(CliError::input(format!("unknown site {missing:?}")));
    }
    Ok(profiles.into_iter().filter(|p| wanted.contains(&p.site_id)).collect())
}

/// Crawls the selected sites (one thread per site, shared per-host
/// politeness) and appends new records to the corpus.
pub fn run(cfg: &PipelineConfig, opts: &CrawlOptions, out: &mut dyn Write) -> CliResult<CrawlOutcome> {
    let profiles = select_profiles(cfg, &opts.sites)?;
    let mut existing = read_corpus_or_empty(&cfg.corpus_path)?;

    let mut fetcher_cfg = FetcherConfig::default();
    if let Some(ua) = &cfg.user_agent {
        fetcher_cfg.user_agent = ua.clone();
    }
    let fetcher = Fetcher::new(fetcher_cfg, Arc::new(Politeness::new())).input_ctx("http client")?;
    let budget = opts.budget.unwrap_or(usize::MAX);

    let results: Vec<_> = thread::scope(|s| {
        let handles: Vec<_> = profiles
            .iter()
            .map(|p| {
                let fetcher = &fetcher;
                s.spawn(move || crawl_site(fetcher, p, budget))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("crawl thread panicked"))
            .collect()
    });

    let mut seen: HashSet<String> = existing.iter().map(|l| l.canonical_url.clone()).collect();
    let before = existing.len();
    let mut reports = Vec::new();
    for (records, report) in results {
        for r in records {
            if seen.insert(r.canonical_url.clone()) {
                existing.push(CorpusLine::from(r));
            }
        }
        reports.push(report);
    }
    let added = existing.len() - before;
    write_corpus(&cfg.corpus_path, &existing)?;

    let w = |e: std::io::Error| CliError::input(format!("writing report: {e}"));
    writeln!(out, "site\tfetched\textracted\tfailed\tskipped\trobots_denied").map_err(w)?;
    for r in &reports {
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}",
            r.site_id, r.fetched, r.extracted, r.failed, r.skipped, r.robots_denied
        )
        .map_err(w)?;
        for seed in &r.unreachable_seeds {
            log::warn!("{}: seed unreachable: {seed}", r.site_id);
        }
        for (url, reason) in &r.failures {
            log::info!("{}: {url}: {reason}", r.site_id);
        }
    }
    writeln!(
        out,
        "added {added} new records ({} total) to {}",
        existing.len(),
        cfg.corpus_path.display()
    )
    .map_err(w)?;
    Ok(CrawlOutcome {
        reports,
        added,
        total: existing.len(),
    })
}
