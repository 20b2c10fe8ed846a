mod config;
mod error;
mod pipeline;

use std::path::PathBuf;
use std::process::ExitCode;

use absa_xai::explain::HeatmapFormat;
use clap::{Parser, Subcommand};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::pipeline::Context;

/// Sentiment and aspect analysis of arXiv abstracts with Shapley explanations.
#[derive(Parser)]
#[command(name = "absa-xai", version)]
struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Run directory for all outputs.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for sampling estimators.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Bypass the score cache.
    #[arg(long, global = true)]
    no_cache: bool,
    /// Maximum worker threads.
    #[arg(long, global = true)]
    parallelism: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Harvest matching arXiv metadata into corpus.jsonl.
    Fetch,
    /// Overall star rating for every document into overall.jsonl.
    Classify,
    /// Shapley attributions, for one document with a printed heatmap or for all.
    Explain {
        /// Document id (versioned arXiv id) from corpus.jsonl
        #[arg(long)]
        doc: Option<String>,
        /// Label to explain; defaults to the document's top label.
        #[arg(long)]
        target: Option<String>,
        /// Heatmap printed for --doc: ansi or html.
        #[arg(long, default_value = "ansi")]
        format: HeatmapFormat,
    },
    /// Aspect sentiment into aspects.jsonl.
    Aspects {
        /// Document id (versioned arXiv id) from corpus.jsonl
        #[arg(long)]
        doc: Option<String>,
        /// Aspect term to score (repeatable); skips extraction.
        #[arg(long = "aspect")]
        aspects: Vec<String>,
    },
    /// Aggregate reports into report/.
    Report,
    /// Every stage in order.
    RunAll {
        /// Prefetched corpus file used instead of querying arXiv.
        #[arg(long)]
        corpus: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(out) = cli.out {
        cfg.out_dir = out;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(n) = cli.parallelism {
        cfg.parallelism = n;
    }
    if cli.no_cache {
        cfg.use_cache = false;
    }
    let ctx = Context::new(cfg)?;
    match cli.command {
        Command::Fetch => ctx.fetch(),
        Command::Classify => ctx.classify(),
        Command::Explain { doc, target, format } => ctx.explain(doc.as_deref(), target.as_deref(), format),
        Command::Aspects { doc, aspects } => ctx.aspects(doc.as_deref(), &aspects),
        Command::Report => ctx.report(),
        Command::RunAll { corpus } => ctx.run_all(corpus.as_deref()),
    }
    .map(|_| ())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("absa-xai: {e}");
            e.exit_code()
        }
    }
}
