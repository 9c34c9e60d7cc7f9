//! Command-line front end.
//!
//! Every subcommand reads its inputs, writes write-once outputs (rerunning
//! with identical inputs is a no-op, differing content needs `--force`) and
//! prints a summary: human-readable by default, one JSON object with
//! `--json`. Failures print `{"error":{"kind","category","message"}}` to
//! stderr and exit with 2 (config), 3 (data) or 4 (endpoint).

mod commands;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::distance::Metric;
use crate::imitation::Strategy;
use crate::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "styloverify", version, about = "Training-free authorship verification")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seed for every sampling step.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Print a machine-readable JSON summary.
    #[arg(long, global = true)]
    pub json: bool,
    /// Overwrite existing outputs whose content differs.
    #[arg(long, global = true)]
    pub force: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Filter a corpus and cut accepted documents into head/tail segments.
    Clean(CleanArgs),
    /// Draw labelled construction (and optionally held-out) pairs.
    Pairs(PairsArgs),
    /// List the texts the embedding sidecar has to encode.
    EmbedManifest(EmbedManifestArgs),
    /// Fit the vocabulary and build a distance store from labelled pairs.
    Build(BuildArgs),
    /// Classify two texts, or every pair in a pair file.
    Verify(VerifyArgs),
    /// Score a labelled pair file against a store.
    Evaluate(EvaluateArgs),
    /// Run the style-imitation harness.
    Imitate(ImitateArgs),
    /// Perplexity analysis from token log-probabilities.
    Detect(DetectArgs),
    /// Export distance distributions and a checksum manifest of an output directory.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct CleanArgs {
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Output directory for `cleaning_reports.jsonl` and `segments.jsonl`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub block_words: Option<usize>,
    #[arg(long)]
    pub min_words: Option<usize>,
    /// Word list for the misspelling filter (one word per line).
    #[arg(long, conflicts_with = "no_dictionary")]
    pub dictionary: Option<PathBuf>,
    /// Skip the misspelling filter.
    #[arg(long)]
    pub no_dictionary: bool,
}

#[derive(Debug, Args)]
pub struct PairsArgs {
    #[arg(long)]
    pub segments: PathBuf,
    /// Output directory for `pairs.jsonl` and `heldout_pairs.jsonl`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub n_positive: Option<usize>,
    #[arg(long)]
    pub n_negative: Option<usize>,
    #[arg(long)]
    pub holdout_fraction: Option<f64>,
    #[arg(long)]
    pub holdout_positive: Option<usize>,
    #[arg(long)]
    pub holdout_negative: Option<usize>,
}

#[derive(Debug, Args)]
pub struct EmbedManifestArgs {
    #[arg(long)]
    pub segments: Option<PathBuf>,
    /// Also list generated texts from an imitation run.
    #[arg(long)]
    pub generations: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FeatureArgs {
    #[arg(long)]
    pub vocab: Option<PathBuf>,
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    #[arg(long)]
    pub segments: PathBuf,
    #[arg(long)]
    pub pairs: PathBuf,
    #[command(flatten)]
    pub features: FeatureArgs,
    #[arg(long)]
    pub store: Option<PathBuf>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub metric: Option<Metric>,
    #[arg(long)]
    pub max_grams: Option<usize>,
    /// Record the build time in the store (makes rebuilds differ).
    #[arg(long)]
    pub timestamp: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub store: Option<PathBuf>,
    #[command(flatten)]
    pub features: FeatureArgs,
    #[arg(long, requires = "b", conflicts_with = "pairs")]
    pub a: Option<PathBuf>,
    #[arg(long, requires = "a")]
    pub b: Option<PathBuf>,
    /// Embedding id for `--a` (defaults to the file stem).
    #[arg(long)]
    pub a_id: Option<String>,
    #[arg(long)]
    pub b_id: Option<String>,
    #[arg(long, requires = "segments")]
    pub pairs: Option<PathBuf>,
    #[arg(long)]
    pub segments: Option<PathBuf>,
    /// Write verdicts here as JSONL instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub store: Option<PathBuf>,
    #[command(flatten)]
    pub features: FeatureArgs,
    #[arg(long)]
    pub pairs: PathBuf,
    #[arg(long)]
    pub segments: PathBuf,
    /// Second store to compare against with McNemar's test.
    #[arg(long)]
    pub baseline_store: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ImitateArgs {
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub segments: PathBuf,
    #[arg(long)]
    pub store: Option<PathBuf>,
    #[command(flatten)]
    pub features: FeatureArgs,
    /// Recorded completions (JSONL); without it the configured endpoint is called.
    #[arg(long)]
    pub offline: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    pub strategies: Vec<Strategy>,
    /// Number of source documents to sample; 0 uses all.
    #[arg(long)]
    pub sample: Option<usize>,
    #[arg(long)]
    pub reclean: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    /// `name=path` of a log-probability file; repeat for each group.
    #[arg(long = "group", required = true, value_parser = parse_group)]
    pub groups: Vec<(String, PathBuf)>,
    #[arg(long, value_delimiter = ',')]
    pub thresholds: Vec<f64>,
    #[arg(long, default_value_t = 5.0)]
    pub bin_width: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub store: Option<PathBuf>,
    /// Directory receiving the exports and `manifest.json`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 0.02)]
    pub bin_width: f64,
}

fn parse_group(s: &str) -> std::result::Result<(String, PathBuf), String> {
    match s.split_once('=') {
        Some((name, path)) if !name.is_empty() && !path.is_empty() => Ok((name.to_string(), PathBuf::from(path))),
        _ => Err(format!("expected name=path, got `{s}`")),
    }
}

/// What a subcommand reports on success.
pub struct Outcome {
    pub summary: Value,
    pub human: String,
}

/// Runs a parsed command line.
pub fn run(cli: Cli) -> Result<Outcome> {
    let mut config = match &cli.global.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if cli.global.seed.is_some() {
        config.seed = cli.global.seed;
    }
    let ctx = commands::Context {
        config,
        force: cli.global.force,
    };
    match cli.command {
        Command::Clean(a) => commands::clean(ctx, a),
        Command::Pairs(a) => commands::pairs(ctx, a),
        Command::EmbedManifest(a) => commands::embed_manifest(ctx, a),
        Command::Build(a) => commands::build(ctx, a),
        Command::Verify(a) => commands::verify(ctx, a),
        Command::Evaluate(a) => commands::evaluate(ctx, a),
        Command::Imitate(a) => commands::imitate(ctx, a),
        Command::Detect(a) => commands::detect(ctx, a),
        Command::Report(a) => commands::report(ctx, a),
    }
}

/// The JSON object printed on failure.
pub fn error_json(err: &Error) -> Value {
    json!({
        "error": {
            "kind": err.kind(),
            "category": err.category().as_str(),
            "message": err.to_string(),
        }
    })
}

/// Parses `args`, runs, prints, and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let json_output = cli.global.json;
    match run(cli) {
        Ok(outcome) => {
            if json_output {
                println!("{}", outcome.summary);
            } else {
                print!("{}", outcome.human);
                if !outcome.human.ends_with('\n') {
                    println!();
                }
            }
            0
        }
        Err(err) => {
            eprintln!("{}", error_json(&err));
            err.category().exit_code()
        }
    }
}
