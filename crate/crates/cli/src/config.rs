//! Run configuration: a flat JSON object whose keys mirror the command-line
//! flags. Flags given on the command line win over the file.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use serde::Deserialize;
use walkre_core::ingest::IngestOptions;
use walkre_core::{KernelSpec, Solver, SvmParams, WalkParams};

pub const DEFAULT_SPEC: &str = "SPK+NSPK";

/// Worker count for the Gram computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Threads {
    Auto,
    Fixed(usize),
}

impl Threads {
    pub fn count(self) -> usize {
        match self {
            Threads::Auto => std::thread::available_parallelism().map_or(1, |n| n.get()),
            Threads::Fixed(n) => n,
        }
    }
}

impl std::str::FromStr for Threads {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Threads::Auto);
        }
        match s.parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Threads::Fixed(n)),
            _ => Err(format!(
                "expected a positive integer or \"auto\", got {s:?}"
            )),
        }
    }
}

impl<'de> Deserialize<'de> for Threads {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Count(usize),
            Word(String),
        }
        match Raw::deserialize(d)? {
            Raw::Count(n) => n.to_string().parse(),
            Raw::Word(s) => s.parse(),
        }
        .map_err(serde::de::Error::custom)
    }
}

/// Contents of a `--config` file. Every key is optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub corpus_path: Option<PathBuf>,
    pub splits_path: Option<PathBuf>,
    pub spec: Option<String>,
    pub normalize_each: Option<bool>,
    pub gamma: Option<f64>,
    pub solver: Option<String>,
    pub fp_tolerance: Option<f64>,
    pub fp_max_iters: Option<usize>,
    pub dense_max_pairs: Option<usize>,
    pub c: Option<f64>,
    pub kkt_tolerance: Option<f64>,
    pub max_passes: Option<usize>,
    pub positive_weight: Option<f64>,
    pub negative_weight: Option<f64>,
    pub symmetrize_edges: Option<bool>,
    pub entity_blinding: Option<bool>,
    pub output_dir: Option<PathBuf>,
    pub threads: Option<Threads>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<FileConfig> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}

#[derive(Debug, Clone, Args)]
pub struct CorpusArgs {
    /// Corpus in JSON lines, one sentence per line
    #[arg(long, value_name = "PATH")]
    pub corpus: Option<PathBuf>,
    /// Document splits in JSON lines, one split per line
    #[arg(long, value_name = "PATH")]
    pub splits: Option<PathBuf>,
    /// Add a reversed copy of every edge, label suffixed "-rev" [default: false]
    #[arg(long)]
    pub symmetrize_edges: bool,
    /// Replace word and lemma of entity tokens by a placeholder [default: false]
    #[arg(long)]
    pub entity_blinding: bool,
}

#[derive(Debug, Clone, Args)]
pub struct KernelArgs {
    /// Kernel components joined by '+', e.g. SPK+NSPK, or ALL [default: SPK+NSPK]
    #[arg(long, value_name = "SPEC")]
    pub spec: Option<String>,
    /// Skip cosine normalization of each component [default: normalized]
    #[arg(long)]
    pub no_normalize: bool,
    /// Per-step termination probability of a walk [default: 0.1]
    #[arg(long, value_name = "G")]
    pub gamma: Option<f64>,
    /// auto, dense or fixed-point [default: auto]
    #[arg(long, value_name = "SOLVER")]
    pub solver: Option<String>,
    /// Fixed-point convergence tolerance [default: 1e-10]
    #[arg(long, value_name = "TOL")]
    pub fp_tolerance: Option<f64>,
    /// Fixed-point iteration cap [default: 10000]
    #[arg(long, value_name = "N")]
    pub fp_max_iters: Option<usize>,
    /// Largest vertex-pair count solved densely under auto [default: 4096]
    #[arg(long, value_name = "N")]
    pub dense_max_pairs: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct SvmArgs {
    /// SVM regularization constant [default: 50]
    #[arg(short = 'C', long = "c", value_name = "C")]
    pub c: Option<f64>,
    /// KKT stopping tolerance [default: 0.001]
    #[arg(long, value_name = "TOL")]
    pub kkt_tolerance: Option<f64>,
    /// SMO work cap in sweeps of n updates [default: 10*n]
    #[arg(long, value_name = "N")]
    pub max_passes: Option<usize>,
    /// Multiplier of C for positive examples [default: 1]
    #[arg(long, value_name = "W")]
    pub positive_weight: Option<f64>,
    /// Multiplier of C for negative examples [default: 1]
    #[arg(long, value_name = "W")]
    pub negative_weight: Option<f64>,
}

/// Flag if given, else file value, else default.
fn pick<T>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

impl CorpusArgs {
    pub fn corpus_path(&self, file: &FileConfig) -> Result<PathBuf> {
        let path = self
            .corpus
            .clone()
            .or_else(|| file.corpus_path.clone())
            .context("no corpus given (use --corpus or corpus_path in the config)")?;
        if !path.exists() {
            bail!("corpus {} does not exist", path.display());
        }
        Ok(path)
    }

    pub fn splits_path(&self, file: &FileConfig) -> Result<Option<PathBuf>> {
        let path = self.splits.clone().or_else(|| file.splits_path.clone());
        if let Some(p) = &path {
            if !p.exists() {
                bail!("splits file {} does not exist", p.display());
            }
        }
        Ok(path)
    }

    pub fn ingest_options(&self, file: &FileConfig) -> IngestOptions {
        IngestOptions {
            symmetrize_edges: self.symmetrize_edges || file.symmetrize_edges.unwrap_or(false),
            entity_blinding: self.entity_blinding || file.entity_blinding.unwrap_or(false),
        }
    }
}

impl KernelArgs {
    pub fn spec(&self, file: &FileConfig) -> Result<KernelSpec> {
        let text = pick(
            self.spec.clone(),
            file.spec.clone(),
            DEFAULT_SPEC.to_string(),
        );
        let mut spec: KernelSpec = text.parse()?;
        spec.normalize_each = !self.no_normalize && file.normalize_each.unwrap_or(true);
        Ok(spec)
    }

    pub fn walk(&self, file: &FileConfig) -> Result<WalkParams> {
        let d = WalkParams::default();
        let solver = match self.solver.as_ref().or(file.solver.as_ref()) {
            Some(s) => s.parse::<Solver>()?,
            None => d.solver,
        };
        let walk = WalkParams {
            gamma: pick(self.gamma, file.gamma, d.gamma),
            solver,
            fp_tolerance: pick(self.fp_tolerance, file.fp_tolerance, d.fp_tolerance),
            fp_max_iters: pick(self.fp_max_iters, file.fp_max_iters, d.fp_max_iters),
            dense_max_pairs: pick(
                self.dense_max_pairs,
                file.dense_max_pairs,
                d.dense_max_pairs,
            ),
        };
        walk.validate()?;
        Ok(walk)
    }
}

impl SvmArgs {
    pub fn params(&self, file: &FileConfig) -> SvmParams {
        let d = SvmParams::default();
        SvmParams {
            c: pick(self.c, file.c, d.c),
            kkt_tolerance: pick(self.kkt_tolerance, file.kkt_tolerance, d.kkt_tolerance),
            max_passes: self.max_passes.or(file.max_passes),
            positive_weight: pick(
                self.positive_weight,
                file.positive_weight,
                d.positive_weight,
            ),
            negative_weight: pick(
                self.negative_weight,
                file.negative_weight,
                d.negative_weight,
            ),
        }
    }
}
