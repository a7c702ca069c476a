//! `spanmark`: corpus statistics, sample building, evaluation, baselines
//! and the constrained-decoding mask service.

mod data;
mod error;
mod eval;
mod iob;
mod manifest;
mod serve;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use spanmark_core::MarkerConfig;

use error::{Invalid, OrInvalid};

#[derive(Parser)]
#[command(name = "spanmark", version, about = "Mention detection toolkit for visually grounded dialogue")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Serialize)]
pub struct MarkerArgs {
    #[arg(long, default_value = ">>")]
    start_marker: String,
    #[arg(long, default_value = "<<")]
    end_marker: String,
    /// Write markers bare instead of space-separated at word boundaries.
    #[arg(long)]
    no_pad: bool,
}

impl MarkerArgs {
    pub fn config(&self) -> anyhow::Result<MarkerConfig> {
        MarkerConfig::new(&self.start_marker, &self.end_marker, !self.no_pad).or_invalid()
    }
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitMode {
    Agos,
    Random,
    Transfer,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ViewKind {
    Whitespace,
    File,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Policy {
    /// A token touched by a span belongs to it.
    Any,
    /// Only tokens inside a span belong to it.
    Full,
}

#[derive(Subcommand)]
enum Command {
    /// Validate corpora and print descriptive statistics side by side.
    Stats {
        #[arg(required = true)]
        corpora: Vec<PathBuf>,
        /// Print JSON instead of the table.
        #[arg(long)]
        json: bool,
        /// Also write stats.json and stats.txt here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write one prompt/completion record per utterance.
    BuildSamples {
        corpus: PathBuf,
        /// Number of preceding messages given as history.
        #[arg(long)]
        window: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = spanmark_core::sample::INFERENCE_TOKEN)]
        inference_token: String,
        #[command(flatten)]
        markers: MarkerArgs,
    },
    /// Score a prediction file against the corpus annotations.
    Evaluate {
        corpus: PathBuf,
        predictions: PathBuf,
        /// Write report.json and report.txt here.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Score only the utterances present in the prediction file.
        #[arg(long)]
        subset: bool,
        #[arg(long)]
        json: bool,
    },
    /// Serve constrained-decoding sessions as newline-delimited JSON.
    MaskServe {
        vocab: PathBuf,
        /// `stdio`, `tcp:PORT` or `tcp:HOST:PORT`.
        #[arg(long, default_value = "stdio")]
        listen: String,
        #[command(flatten)]
        markers: MarkerArgs,
    },
    /// Write train/test folds at the dialogue level.
    Split {
        corpus: PathBuf,
        #[arg(long, value_enum)]
        mode: SplitMode,
        #[arg(long, default_value_t = 5)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Evaluation corpus for `--mode transfer`.
        #[arg(long, required_if_eq("mode", "transfer"))]
        test: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Export token labels of every window in a tab-separated format.
    ExportIob {
        corpus: PathBuf,
        #[arg(long, default_value_t = 0)]
        window: usize,
        #[arg(long, value_enum, default_value = "whitespace")]
        view: ViewKind,
        /// Token file for `--view file`.
        #[arg(long, required_if_eq("view", "file"))]
        view_file: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "any")]
        policy: Policy,
        #[arg(long)]
        out: PathBuf,
    },
    /// Turn labeled windows back into a prediction file.
    ImportIob {
        corpus: PathBuf,
        labels: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Predict maximal noun phrases from constituency trees.
    NpBaseline {
        corpus: PathBuf,
        trees: PathBuf,
        /// One pronoun per line; replaces the default list.
        #[arg(long)]
        stoplist: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Parse model generations back into spans.
    ParseOutput {
        corpus: PathBuf,
        generations: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        markers: MarkerArgs,
    },
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Stats { corpora, json, out } => data::stats(&corpora, json, out.as_deref()),
        Command::BuildSamples { corpus, window, out, inference_token, markers } => {
            data::build_samples(&corpus, window, &out, &inference_token, &markers)
        }
        Command::Evaluate { corpus, predictions, report, subset, json } => {
            eval::evaluate(&corpus, &predictions, report.as_deref(), subset, json)
        }
        Command::MaskServe { vocab, listen, markers } => serve::mask_serve(&vocab, &listen, &markers),
        Command::Split { corpus, mode, k, seed, test, out } => {
            data::split(&corpus, mode, k, seed, test.as_deref(), &out)
        }
        Command::ExportIob { corpus, window, view, view_file, policy, out } => {
            iob::export(&corpus, window, view, view_file.as_deref(), policy, &out)
        }
        Command::ImportIob { corpus, labels, out } => iob::import(&corpus, &labels, &out),
        Command::NpBaseline { corpus, trees, stoplist, out } => {
            eval::np_baseline(&corpus, &trees, stoplist.as_deref(), &out)
        }
        Command::ParseOutput { corpus, generations, out, markers } => {
            eval::parse_output(&corpus, &generations, &out, &markers)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is::<Invalid>() => {
            eprintln!("error: {}", error::describe(&e));
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("internal error: {}", error::describe(&e));
            ExitCode::from(3)
        }
    }
}
