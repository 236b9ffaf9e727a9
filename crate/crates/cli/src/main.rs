use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use factcheck_cli::commands::{crawl, evaluate, normalize, predict, train};
use factcheck_cli::{Backend, CliResult, Overrides, PipelineConfig, Task};

/// Crawl fact-checking sites, harmonize their verdicts and train a
/// veracity or topic classifier.
#[derive(Debug, Parser)]
#[command(name = "factcheck", version)]
struct Cli {
    /// Pipeline config file [default: ./factcheck.toml if present]
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for splitting and shuffling; overrides the config
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    task: Option<Task>,
    #[arg(long, global = true, value_enum)]
    backend: Option<Backend>,
    /// More log output (-v info, -vv debug)
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Crawl site profiles and append new articles to the corpus
    Crawl {
        /// Restrict to this site id (repeatable)
        #[arg(long = "site")]
        sites: Vec<String>,
        /// Page budget per site [default: the profile's max_pages]
        #[arg(long)]
        budget: Option<usize>,
    },
    /// Map raw verdicts and topics onto the class taxonomies
    Normalize,
    /// Train the classifier for the selected task
    Train,
    /// Predict classes for a corpus or for lines of text
    Predict {
        /// Input file, `-` for standard input
        #[arg(long, default_value = "-")]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "corpus")]
        format: predict::InputFormat,
        /// Output file [default: standard output]
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Score predictions against gold labels
    Evaluate {
        /// Gold corpus [default: the configured corpus]
        #[arg(long)]
        gold: Option<PathBuf>,
        #[arg(long)]
        predictions: PathBuf,
        /// Report path prefix; writes PREFIX.json and PREFIX.txt
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> CliResult<()> {
    let overrides = Overrides {
        seed: cli.seed,
        task: cli.task,
        backend: cli.backend,
        encoder_url: None,
    }
    .with_env();
    let cfg = PipelineConfig::resolve(cli.config.as_deref(), &overrides)?;
    let mut out = std::io::stdout().lock();
    match cli.command {
        Command::Crawl { sites, budget } => {
            crawl::run(&cfg, &crawl::CrawlOptions { sites, budget }, &mut out)?;
        }
        Command::Normalize => {
            normalize::run(&cfg, &mut out)?;
        }
        Command::Train => {
            train::run(&cfg, &mut out)?;
        }
        Command::Predict { input, format, output } => {
            predict::run(&cfg, &predict::PredictOptions { input, format, output }, &mut out)?;
        }
        Command::Evaluate {
            gold,
            predictions,
            report,
        } => {
            evaluate::run(
                &cfg,
                &evaluate::EvaluateOptions {
                    gold,
                    predictions,
                    report,
                },
                &mut out,
            )?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("factcheck: {e}");
            e.into()
        }
    }
}
