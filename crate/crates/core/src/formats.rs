//! Text formats for Gram matrices, kernel rows, labels, SVM models,
//! predictions and evaluation reports.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use nalgebra::DMatrix;

use crate::error::Error;
use crate::eval::{Averages, SplitResult, TTestResult};
use crate::kernel::{KernelSpec, WalkParams};
use crate::svm::SvmModel;

const GRAM_MAGIC: &str = "walkre-gram";
const ROWS_MAGIC: &str = "walkre-rows";
const SVM_MAGIC: &str = "walkre-svm";
const VERSION: &str = "v1";

/// Header fields shared by Gram and kernel-row files.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelHeader {
    pub spec: String,
    pub gamma: f64,
    pub normalized: bool,
}

impl KernelHeader {
    pub fn new(spec: &KernelSpec, params: &WalkParams) -> Self {
        KernelHeader {
            spec: spec.name(),
            gamma: params.gamma,
            normalized: spec.normalize_each,
        }
    }

    fn render(&self) -> String {
        format!(
            "spec={} gamma={} normalized={}",
            self.spec,
            self.gamma,
            u8::from(self.normalized)
        )
    }
}

/// 17 significant digits.
fn real(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

/// `key=value` fields of a header or report line.
fn fields(line: &str) -> BTreeMap<&str, &str> {
    line.split_whitespace()
        .filter_map(|tok| tok.split_once('='))
        .collect()
}

fn field<T: std::str::FromStr>(
    map: &BTreeMap<&str, &str>,
    key: &str,
    line: usize,
) -> Result<T, Error> {
    map.get(key)
        .ok_or_else(|| parse_err(line, format!("missing field {key}")))?
        .parse()
        .map_err(|_| parse_err(line, format!("bad value for {key}")))
}

fn header_of(map: &BTreeMap<&str, &str>) -> Result<KernelHeader, Error> {
    Ok(KernelHeader {
        spec: field(map, "spec", 1)?,
        gamma: field(map, "gamma", 1)?,
        normalized: field::<u8>(map, "normalized", 1)? == 1,
    })
}

fn write_matrix<W: Write>(w: &mut W, m: &DMatrix<f64>) -> Result<(), Error> {
    for i in 0..m.nrows() {
        let row: Vec<String> = m.row(i).iter().map(|&v| real(v)).collect();
        writeln!(w, "{}", row.join(" "))?;
    }
    Ok(())
}

fn read_matrix<R: BufRead>(
    lines: &mut std::io::Lines<R>,
    rows: usize,
    cols: usize,
) -> Result<DMatrix<f64>, Error> {
    let mut values = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        let line_no = r + 2;
        let line = lines
            .next()
            .ok_or_else(|| parse_err(line_no, "unexpected end of file"))??;
        let row: Vec<f64> = line
            .split_whitespace()
            .map(|v| {
                v.parse()
                    .map_err(|_| parse_err(line_no, format!("bad number {v:?}")))
            })
            .collect::<Result<_, _>>()?;
        if row.len() != cols {
            return Err(parse_err(
                line_no,
                format!("expected {cols} values, found {}", row.len()),
            ));
        }
        values.extend(row);
    }
    Ok(DMatrix::from_row_slice(rows, cols, &values))
}

fn first_line<R: BufRead>(lines: &mut std::io::Lines<R>) -> Result<String, Error> {
    lines
        .next()
        .ok_or_else(|| parse_err(1, "empty file"))?
        .map_err(Error::from)
}

fn check_magic(line: &str, magic: &str) -> Result<(), Error> {
    let mut parts = line.split_whitespace();
    if parts.next() != Some(magic) || parts.next() != Some(VERSION) {
        return Err(parse_err(
            1,
            format!("expected a '{magic} {VERSION}' header"),
        ));
    }
    Ok(())
}

pub fn write_gram<W: Write>(
    mut w: W,
    values: &DMatrix<f64>,
    header: &KernelHeader,
) -> Result<(), Error> {
    writeln!(
        w,
        "{GRAM_MAGIC} {VERSION} n={} {}",
        values.nrows(),
        header.render()
    )?;
    write_matrix(&mut w, values)
}

pub fn read_gram<R: BufRead>(r: R) -> Result<(DMatrix<f64>, KernelHeader), Error> {
    let mut lines = r.lines();
    let head = first_line(&mut lines)?;
    check_magic(&head, GRAM_MAGIC)?;
    let map = fields(&head);
    let n: usize = field(&map, "n", 1)?;
    Ok((read_matrix(&mut lines, n, n)?, header_of(&map)?))
}

/// Test-versus-train kernel rows: `rows x cols`.
pub fn write_rows<W: Write>(
    mut w: W,
    values: &DMatrix<f64>,
    header: &KernelHeader,
) -> Result<(), Error> {
    writeln!(
        w,
        "{ROWS_MAGIC} {VERSION} rows={} cols={} {}",
        values.nrows(),
        values.ncols(),
        header.render()
    )?;
    write_matrix(&mut w, values)
}

/// Reads a rows file; a Gram file is accepted too (its rows against itself).
pub fn read_rows<R: BufRead>(r: R) -> Result<(DMatrix<f64>, KernelHeader), Error> {
    let mut lines = r.lines();
    let head = first_line(&mut lines)?;
    let map = fields(&head);
    let (rows, cols) = if head.starts_with(GRAM_MAGIC) {
        check_magic(&head, GRAM_MAGIC)?;
        let n = field(&map, "n", 1)?;
        (n, n)
    } else {
        check_magic(&head, ROWS_MAGIC)?;
        (field(&map, "rows", 1)?, field(&map, "cols", 1)?)
    };
    Ok((read_matrix(&mut lines, rows, cols)?, header_of(&map)?))
}

/// One identifier per line.
pub fn write_ids<W: Write>(mut w: W, ids: &[String]) -> Result<(), Error> {
    for id in ids {
        writeln!(w, "{id}")?;
    }
    Ok(())
}

pub fn read_ids<R: BufRead>(r: R) -> Result<Vec<String>, Error> {
    let mut out = Vec::new();
    for line in r.lines() {
        let line = line?;
        let line = line.trim();
        if !line.is_empty() {
            out.push(line.to_string());
        }
    }
    Ok(out)
}

/// `<id> <+1|-1>` per line.
pub fn write_labels<W: Write>(mut w: W, labeled: &[(String, i8)]) -> Result<(), Error> {
    for (id, y) in labeled {
        writeln!(w, "{id} {y}")?;
    }
    Ok(())
}

pub fn read_labels<R: BufRead>(r: R) -> Result<Vec<(String, i8)>, Error> {
    let mut out = Vec::new();
    for (k, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let (Some(id), Some(y), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(parse_err(k + 1, "expected '<id> <label>'"));
        };
        let y = parse_label(y).ok_or_else(|| parse_err(k + 1, format!("bad label {y:?}")))?;
        out.push((id.to_string(), y));
    }
    Ok(out)
}

fn parse_label(s: &str) -> Option<i8> {
    match s {
        "1" | "+1" => Some(1),
        "-1" | "0" => Some(-1),
        _ => None,
    }
}

pub fn write_model<W: Write>(mut w: W, model: &SvmModel) -> Result<(), Error> {
    writeln!(
        w,
        "{SVM_MAGIC} {VERSION} n={} C={} bias={}",
        model.n(),
        model.c,
        model.bias
    )?;
    for (i, (a, y)) in model.alphas.iter().zip(&model.labels).enumerate() {
        writeln!(w, "{i} {a} {y}")?;
    }
    Ok(())
}

/// Reads a model; omitted indices get `alpha = 0`.
pub fn read_model<R: BufRead>(r: R) -> Result<SvmModel, Error> {
    let mut lines = r.lines();
    let head = first_line(&mut lines)?;
    check_magic(&head, SVM_MAGIC)?;
    let map = fields(&head);
    let n: usize = field(&map, "n", 1)?;
    let c: f64 = field(&map, "C", 1)?;
    let bias: f64 = field(&map, "bias", 1)?;
    let mut alphas = vec![0.0; n];
    let mut labels = vec![1i8; n];
    for (k, line) in lines.enumerate() {
        let line = line?;
        let line_no = k + 2;
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        let [i, a, y] = parts[..] else {
            return Err(parse_err(line_no, "expected 'index alpha label'"));
        };
        let i: usize = i.parse().map_err(|_| parse_err(line_no, "bad index"))?;
        if i >= n {
            return Err(parse_err(line_no, format!("index {i} out of range")));
        }
        alphas[i] = a.parse().map_err(|_| parse_err(line_no, "bad alpha"))?;
        labels[i] = parse_label(y).ok_or_else(|| parse_err(line_no, "bad label"))?;
    }
    Ok(SvmModel::new(alphas, labels, bias, c))
}

/// `<id> <label> <decision value>` per line.
pub fn write_predictions<W: Write>(mut w: W, rows: &[(String, i8, f64)]) -> Result<(), Error> {
    for (id, y, dv) in rows {
        writeln!(w, "{id} {y} {dv:.6}")?;
    }
    Ok(())
}

pub fn read_predictions<R: BufRead>(r: R) -> Result<Vec<(String, i8, f64)>, Error> {
    let mut out = Vec::new();
    for (k, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        let [id, y, dv] = parts[..] else {
            return Err(parse_err(k + 1, "expected '<id> <label> <decision value>'"));
        };
        out.push((
            id.to_string(),
            parse_label(y).ok_or_else(|| parse_err(k + 1, "bad label"))?,
            dv.parse()
                .map_err(|_| parse_err(k + 1, "bad decision value"))?,
        ));
    }
    Ok(out)
}

pub fn split_line(r: &SplitResult) -> String {
    format!(
        "split={} C={} I={} P={} recall={:.6} precision={:.6} f1={:.6}",
        r.split_id,
        r.counts.correct,
        r.counts.incorrect,
        r.counts.positives_total,
        r.recall,
        r.precision,
        r.f1
    )
}

fn average_line(tag: &str, a: &Averages) -> String {
    format!(
        "{tag} recall={:.6} precision={:.6} f1={:.6}",
        a.recall, a.precision, a.f1
    )
}

/// Per-split lines, then the macro line, then the pooled line.
pub fn write_report<W: Write>(
    mut w: W,
    splits: &[SplitResult],
    macro_avg: &Averages,
    pooled: &Averages,
) -> Result<(), Error> {
    for r in splits {
        writeln!(w, "{}", split_line(r))?;
    }
    writeln!(w, "{}", average_line("macro", macro_avg))?;
    writeln!(w, "{}", average_line("pooled", pooled))?;
    Ok(())
}

/// Per-split results of a report. Metric values are re-read at the printed
/// precision; counts are exact.
pub fn read_report<R: BufRead>(r: R) -> Result<Vec<SplitResult>, Error> {
    let mut out = Vec::new();
    for (k, line) in r.lines().enumerate() {
        let line = line?;
        if !line.starts_with("split=") {
            continue;
        }
        let map = fields(&line);
        let line_no = k + 1;
        out.push(SplitResult {
            split_id: field(&map, "split", line_no)?,
            counts: crate::eval::ConfusionCounts {
                correct: field(&map, "C", line_no)?,
                incorrect: field(&map, "I", line_no)?,
                positives_total: field(&map, "P", line_no)?,
            },
            recall: field(&map, "recall", line_no)?,
            precision: field(&map, "precision", line_no)?,
            f1: field(&map, "f1", line_no)?,
        });
    }
    Ok(out)
}

pub fn ttest_line(t: &TTestResult) -> String {
    format!(
        "metric={} n={} t={:.6} df={} p={:.6} significant={}",
        t.metric_name,
        t.n,
        t.t_statistic,
        t.degrees_of_freedom,
        t.p_value,
        u8::from(t.significant_at_5pct)
    )
}
