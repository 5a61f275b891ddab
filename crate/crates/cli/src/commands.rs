use std::collections::HashMap;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use walkre_core::eval::{macro_average, paired_t_test_named, pooled, Metric};
use walkre_core::formats::{self, KernelHeader};
use walkre_core::ingest::{self, IngestOptions};
use walkre_core::synthetic::{self, SyntheticConfig};
use walkre_core::{
    cross_validate, evaluate_split, Candidate, Corpus, CrossValOptions, KernelError,
    KernelMatrixBuilder, KernelSpec, SplitResult, WalkParams,
};

use crate::config::{CorpusArgs, FileConfig, Threads};
use crate::{Cli, Command};

/// Settings shared by every command.
struct RunContext {
    file: FileConfig,
    threads: Threads,
    output: PathBuf,
}

impl RunContext {
    fn out(&self, name: &str) -> PathBuf {
        self.output.join(name)
    }
}

pub fn run(cli: Cli) -> Result<ExitCode> {
    let file = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let ctx = RunContext {
        threads: cli.threads.or(file.threads).unwrap_or(Threads::Auto),
        output: cli
            .output
            .clone()
            .or_else(|| file.output_dir.clone())
            .unwrap_or_else(|| PathBuf::from(".")),
        file,
    };
    fs::create_dir_all(&ctx.output)
        .with_context(|| format!("creating output directory {}", ctx.output.display()))?;

    match cli.command {
        Command::Ingest { corpus } => ingest_cmd(&ctx, &corpus),
        Command::Gram {
            corpus,
            kernel,
            split,
        } => {
            let spec = kernel.spec(&ctx.file)?;
            let walk = kernel.walk(&ctx.file)?;
            gram_cmd(&ctx, &corpus, &spec, &walk, split)
        }
        Command::Train { gram, labels, svm } => {
            train_cmd(&ctx, &gram, &labels, &svm.params(&ctx.file))
        }
        Command::Predict { model, rows, ids } => predict_cmd(&ctx, &model, &rows, &ids),
        Command::Eval {
            predictions,
            gold,
            splits,
        } => eval_cmd(&ctx, &predictions, &gold, splits.as_deref()),
        Command::Ttest {
            report_a,
            report_b,
            metric,
        } => ttest_cmd(&ctx, &report_a, &report_b, &metric),
        Command::Crossval {
            corpus,
            kernel,
            svm,
        } => {
            let spec = kernel.spec(&ctx.file)?;
            let walk = kernel.walk(&ctx.file)?;
            let corpus = load(&ctx, &corpus, true)?;
            let report = cross_validate(
                &corpus,
                &spec,
                &walk,
                &svm.params(&ctx.file),
                CrossValOptions {
                    threads: Some(ctx.threads.count()),
                },
            )?;
            let path = ctx.out("report.txt");
            write_file(&path, |w| {
                formats::write_report(w, &report.splits, &report.macro_avg, &report.pooled)
            })?;
            let m = report.macro_avg;
            println!(
                "{} splits, macro recall={:.6} precision={:.6} f1={:.6}; wrote {}",
                report.splits.len(),
                m.recall,
                m.precision,
                m.f1,
                path.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Synth {
            seed,
            documents,
            folds,
        } => {
            let (records, splits) = synthetic::generate(&SyntheticConfig {
                seed,
                documents,
                splits: folds,
            });
            let graphs: Vec<_> = records.iter().map(|r| r.to_graph()).collect();
            write_file(&ctx.out("corpus.jsonl"), |w| {
                ingest::write_records(w, &graphs)
            })?;
            write_file(&ctx.out("splits.jsonl"), |w| {
                ingest::write_splits(w, &splits)
            })?;
            println!(
                "{} sentences in {documents} documents, {} splits",
                records.len(),
                splits.len()
            );
            Ok(ExitCode::SUCCESS)
        }
    }
}

/// Writes through a temporary file so a failed command leaves no partial
/// output behind.
fn write_file(
    path: &Path,
    body: impl FnOnce(&mut BufWriter<File>) -> walkre_core::Result<()>,
) -> Result<()> {
    let tmp = path.with_extension("partial");
    let result = (|| -> Result<()> {
        let mut w = BufWriter::new(File::create(&tmp)?);
        body(&mut w)?;
        w.flush()?;
        Ok(())
    })();
    match result {
        Ok(()) => fs::rename(&tmp, path).with_context(|| format!("writing {}", path.display())),
        Err(e) => {
            let _ = fs::remove_file(&tmp);
            Err(e.context(format!("writing {}", path.display())))
        }
    }
}

fn reader(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(
        File::open(path).with_context(|| format!("opening {}", path.display()))?,
    ))
}

fn ingest_cmd(ctx: &RunContext, args: &CorpusArgs) -> Result<ExitCode> {
    let path = args.corpus_path(&ctx.file)?;
    let records = ingest::read_records(reader(&path)?)
        .with_context(|| format!("reading {}", path.display()))?;
    let ingested = ingest::ingest_records(&records, &args.ingest_options(&ctx.file));
    for v in &ingested.violations {
        eprintln!("{v}");
    }
    write_file(&ctx.out("corpus.jsonl"), |w| {
        ingest::write_records(w, &ingested.graphs)
    })?;
    println!(
        "{} sentences, {} violations",
        ingested.sentences,
        ingested.violations.len()
    );
    Ok(if ingested.violations.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn load(ctx: &RunContext, args: &CorpusArgs, need_splits: bool) -> Result<Corpus> {
    let path = args.corpus_path(&ctx.file)?;
    let options: IngestOptions = args.ingest_options(&ctx.file);
    let mut corpus = ingest::load_corpus(reader(&path)?, &options)
        .with_context(|| format!("loading {}", path.display()))?;
    match args.splits_path(&ctx.file)? {
        Some(sp) => {
            corpus.splits = ingest::read_splits(reader(&sp)?)
                .with_context(|| format!("reading {}", sp.display()))?;
            corpus.check_splits()?;
        }
        None if need_splits => bail!("no splits given (use --splits or splits_path in the config)"),
        None => {}
    }
    Ok(corpus)
}

/// Names the candidates of a failed kernel pair.
fn name_pair(err: KernelError, rows: &[Candidate], cols: &[Candidate]) -> anyhow::Error {
    match &err {
        KernelError::Pair { i, j, .. } => {
            let (a, b) = (rows[*i].id(), cols[*j].id());
            anyhow!(err).context(format!("kernel between {a} and {b}"))
        }
        _ => anyhow!(err),
    }
}

fn labeled(cands: &[Candidate]) -> Vec<(String, i8)> {
    cands
        .iter()
        .filter_map(|c| c.label.map(|y| (c.id(), if y { 1 } else { -1 })))
        .collect()
}

fn gram_cmd(
    ctx: &RunContext,
    args: &CorpusArgs,
    spec: &KernelSpec,
    walk: &WalkParams,
    split: Option<u32>,
) -> Result<ExitCode> {
    let corpus = load(ctx, args, split.is_some())?;
    let builder = KernelMatrixBuilder::new(spec.clone(), *walk).threads(ctx.threads.count());
    let header = KernelHeader::new(spec, walk);
    let ids = |c: &[Candidate]| c.iter().map(Candidate::id).collect::<Vec<_>>();

    let Some(split_id) = split else {
        let cands = corpus.all_candidates();
        if cands.is_empty() {
            bail!("corpus has no candidates");
        }
        let gram = builder
            .gram(&cands)
            .map_err(|e| name_pair(e, &cands, &cands))?;
        write_file(&ctx.out("gram.txt"), |w| {
            formats::write_gram(w, &gram.values, &header)
        })?;
        write_file(&ctx.out("gram.ids"), |w| {
            formats::write_ids(w, &ids(&cands))
        })?;
        write_file(&ctx.out("gram.labels"), |w| {
            formats::write_labels(w, &labeled(&cands))
        })?;
        println!("{} candidates, spec={}", cands.len(), spec);
        return Ok(ExitCode::SUCCESS);
    };

    let s = corpus
        .splits
        .iter()
        .find(|s| s.id == split_id)
        .with_context(|| format!("no split with id {split_id}"))?;
    let keep = |v: Vec<Candidate>| {
        v.into_iter()
            .filter(|c| c.label.is_some())
            .collect::<Vec<_>>()
    };
    let train = keep(corpus.candidates_for(&s.train_docs)?);
    let test = keep(corpus.candidates_for(&s.test_docs)?);
    if train.is_empty() || test.is_empty() {
        bail!("split {split_id} has no labeled train or test candidates");
    }
    let gram = builder
        .gram(&train)
        .map_err(|e| name_pair(e, &train, &train))?;
    let rows = builder
        .cross(&test, &train)
        .map_err(|e| name_pair(e, &test, &train))?;
    write_file(&ctx.out("train.gram"), |w| {
        formats::write_gram(w, &gram.values, &header)
    })?;
    write_file(&ctx.out("train.ids"), |w| {
        formats::write_ids(w, &ids(&train))
    })?;
    write_file(&ctx.out("train.labels"), |w| {
        formats::write_labels(w, &labeled(&train))
    })?;
    write_file(&ctx.out("test.rows"), |w| {
        formats::write_rows(w, &rows, &header)
    })?;
    write_file(&ctx.out("test.ids"), |w| formats::write_ids(w, &ids(&test)))?;
    write_file(&ctx.out("test.labels"), |w| {
        formats::write_labels(w, &labeled(&test))
    })?;
    println!(
        "split {split_id}: {} train, {} test candidates, spec={}",
        train.len(),
        test.len(),
        spec
    );
    Ok(ExitCode::SUCCESS)
}

fn train_cmd(
    ctx: &RunContext,
    gram_path: &Path,
    labels_path: &Path,
    params: &walkre_core::SvmParams,
) -> Result<ExitCode> {
    let (gram, _) = formats::read_gram(reader(gram_path)?)
        .with_context(|| format!("reading {}", gram_path.display()))?;
    let labels = formats::read_labels(reader(labels_path)?)
        .with_context(|| format!("reading {}", labels_path.display()))?;
    if labels.len() != gram.nrows() {
        bail!(
            "{} labels for a {}x{} Gram matrix",
            labels.len(),
            gram.nrows(),
            gram.ncols()
        );
    }
    let y: Vec<i8> = labels.iter().map(|(_, y)| *y).collect();
    let model = walkre_core::svm::train(&gram, &y, params)?;
    let path = ctx.out("model.txt");
    write_file(&path, |w| formats::write_model(w, &model))?;
    println!(
        "{} examples, {} support vectors; wrote {}",
        model.n(),
        model.support_indices.len(),
        path.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn predict_cmd(
    ctx: &RunContext,
    model_path: &Path,
    rows_path: &Path,
    ids_path: &Path,
) -> Result<ExitCode> {
    let model = formats::read_model(reader(model_path)?)
        .with_context(|| format!("reading {}", model_path.display()))?;
    let (rows, _) = formats::read_rows(reader(rows_path)?)
        .with_context(|| format!("reading {}", rows_path.display()))?;
    let ids = formats::read_ids(reader(ids_path)?)
        .with_context(|| format!("reading {}", ids_path.display()))?;
    if ids.len() != rows.nrows() {
        bail!("{} ids for {} kernel rows", ids.len(), rows.nrows());
    }
    if rows.ncols() != model.n() {
        bail!(
            "kernel row length {} does not match the model's {} training examples",
            rows.ncols(),
            model.n()
        );
    }
    let mut out = Vec::with_capacity(ids.len());
    for (k, id) in ids.iter().enumerate() {
        let row: Vec<f64> = rows.row(k).iter().copied().collect();
        let dv = model
            .decision_value(&row)
            .with_context(|| format!("row {} ({id})", k + 1))?;
        out.push((id.clone(), walkre_core::svm::sign(dv), dv));
    }
    let path = ctx.out("predictions.txt");
    write_file(&path, |w| formats::write_predictions(w, &out))?;
    println!("{} predictions; wrote {}", out.len(), path.display());
    Ok(ExitCode::SUCCESS)
}

fn doc_of(id: &str) -> &str {
    id.split('/').next().unwrap_or(id)
}

fn eval_cmd(
    ctx: &RunContext,
    prediction_paths: &[PathBuf],
    gold_paths: &[PathBuf],
    splits_path: Option<&Path>,
) -> Result<ExitCode> {
    let mut gold: HashMap<String, i8> = HashMap::new();
    for p in gold_paths {
        for (id, y) in
            formats::read_labels(reader(p)?).with_context(|| format!("reading {}", p.display()))?
        {
            gold.insert(id, y);
        }
    }
    let mut files = Vec::new();
    for p in prediction_paths {
        files.push(
            formats::read_predictions(reader(p)?)
                .with_context(|| format!("reading {}", p.display()))?,
        );
    }
    let score = |split_id: u32, preds: &[&(String, i8, f64)]| -> Result<SplitResult> {
        let mut y = Vec::with_capacity(preds.len());
        for (id, _, _) in preds {
            y.push(
                *gold
                    .get(id)
                    .with_context(|| format!("no gold label for {id}"))?,
            );
        }
        let p: Vec<i8> = preds.iter().map(|(_, l, _)| *l).collect();
        Ok(evaluate_split(&p, &y, split_id)?)
    };

    let results: Vec<SplitResult> = match splits_path {
        None => files
            .iter()
            .enumerate()
            .map(|(k, f)| score(k as u32 + 1, &f.iter().collect::<Vec<_>>()))
            .collect::<Result<_>>()?,
        Some(sp) => {
            let mut splits = ingest::read_splits(reader(sp)?)
                .with_context(|| format!("reading {}", sp.display()))?;
            splits.sort_by_key(|s| s.id);
            let all: Vec<&(String, i8, f64)> = files.iter().flatten().collect();
            splits
                .iter()
                .map(|s| {
                    let preds: Vec<_> = all
                        .iter()
                        .copied()
                        .filter(|(id, _, _)| s.test_docs.iter().any(|d| d == doc_of(id)))
                        .collect();
                    score(s.id, &preds)
                })
                .collect::<Result<_>>()?
        }
    };
    let (m, p) = (macro_average(&results)?, pooled(&results)?);
    let path = ctx.out("report.txt");
    write_file(&path, |w| formats::write_report(w, &results, &m, &p))?;
    println!(
        "{} splits, macro f1={:.6}, pooled f1={:.6}; wrote {}",
        results.len(),
        m.f1,
        p.f1,
        path.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn ttest_cmd(ctx: &RunContext, a_path: &Path, b_path: &Path, metric: &str) -> Result<ExitCode> {
    let metric: Metric = metric.parse()?;
    let read = |p: &Path| -> Result<Vec<SplitResult>> {
        let r =
            formats::read_report(reader(p)?).with_context(|| format!("reading {}", p.display()))?;
        if r.is_empty() {
            bail!("{} has no split lines", p.display());
        }
        Ok(r)
    };
    let (a, b) = (read(a_path)?, read(b_path)?);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for ra in &a {
        let rb = b
            .iter()
            .find(|r| r.split_id == ra.split_id)
            .with_context(|| format!("split {} missing from {}", ra.split_id, b_path.display()))?;
        xs.push(ra.metric(metric));
        ys.push(rb.metric(metric));
    }
    if a.len() != b.len() {
        bail!(
            "reports cover different splits ({} vs {})",
            a.len(),
            b.len()
        );
    }
    let t = paired_t_test_named(&xs, &ys, metric.name())?;
    let line = formats::ttest_line(&t);
    let path = ctx.out("ttest.txt");
    write_file(&path, |w| {
        writeln!(w, "{line}")?;
        Ok(())
    })?;
    println!("{line}");
    Ok(ExitCode::SUCCESS)
}
