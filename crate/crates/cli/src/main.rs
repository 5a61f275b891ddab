//! `walkre`: relation extraction with marginalized random-walk kernels.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{CorpusArgs, KernelArgs, SvmArgs, Threads};

#[derive(Debug, Parser)]
#[command(name = "walkre", version, about, long_about = None)]
pub struct Cli {
    /// Flat JSON run configuration; command-line flags take precedence
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Worker threads for kernel computation, a count or "auto" [default: auto]
    #[arg(long, global = true, value_name = "N|auto")]
    pub threads: Option<Threads>,
    /// Directory for output files [default: .]
    #[arg(long, global = true, value_name = "DIR")]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a corpus and write its normalized form to corpus.jsonl
    Ingest {
        #[command(flatten)]
        corpus: CorpusArgs,
    },
    /// Compute the Gram matrix of all candidates (gram.txt, gram.ids,
    /// gram.labels), or the train Gram and test rows of one split
    Gram {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[command(flatten)]
        kernel: KernelArgs,
        /// Split id; writes train.{gram,ids,labels} and test.{rows,ids,labels}
        #[arg(long, value_name = "ID")]
        split: Option<u32>,
    },
    /// Train an SVM on a precomputed Gram matrix (model.txt)
    Train {
        /// Gram matrix file
        #[arg(long, value_name = "PATH")]
        gram: PathBuf,
        /// Labels, one '<id> <+1|-1>' per Gram row
        #[arg(long, value_name = "PATH")]
        labels: PathBuf,
        #[command(flatten)]
        svm: SvmArgs,
    },
    /// Classify kernel rows against a trained model (predictions.txt)
    Predict {
        /// Model file written by train
        #[arg(long, value_name = "PATH")]
        model: PathBuf,
        /// Kernel rows of the candidates to classify
        #[arg(long, value_name = "PATH")]
        rows: PathBuf,
        /// Candidate ids, one per row
        #[arg(long, value_name = "PATH")]
        ids: PathBuf,
    },
    /// Score predictions against gold labels (report.txt)
    Eval {
        /// Predictions files; without --splits each file is one split
        #[arg(long, value_name = "PATH", required = true, num_args = 1..)]
        predictions: Vec<PathBuf>,
        /// Gold labels files
        #[arg(long, value_name = "PATH", required = true, num_args = 1..)]
        gold: Vec<PathBuf>,
        /// Group predictions by the test documents of these splits
        #[arg(long, value_name = "PATH")]
        splits: Option<PathBuf>,
    },
    /// Paired t-test of two reports over their common splits (ttest.txt)
    Ttest {
        #[arg(long, value_name = "PATH")]
        report_a: PathBuf,
        #[arg(long, value_name = "PATH")]
        report_b: PathBuf,
        /// recall, precision or f1
        #[arg(long, value_name = "METRIC", default_value = "f1")]
        metric: String,
    },
    /// Document-level cross-validation over all splits (report.txt)
    Crossval {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[command(flatten)]
        kernel: KernelArgs,
        #[command(flatten)]
        svm: SvmArgs,
    },
    /// Generate the synthetic corpus (corpus.jsonl, splits.jsonl)
    Synth {
        #[arg(long, default_value_t = 20_110_901)]
        seed: u64,
        #[arg(long, default_value_t = 60)]
        documents: usize,
        #[arg(long = "folds", default_value_t = 10)]
        folds: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
