//! Precision / recall / F-measure, per-split evaluation, macro averaging and
//! paired t-tests over split results.

mod crossval;
pub mod special;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::EvalError;

pub use crossval::{cross_validate, CrossValOptions, CrossValReport};

/// Extraction counts for one evaluation run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionCounts {
    /// Correctly extracted relations.
    pub correct: usize,
    /// Extracted pairs that are not relations.
    pub incorrect: usize,
    /// Gold relations that should have been extracted.
    pub positives_total: usize,
}

impl std::ops::Add for ConfusionCounts {
    type Output = ConfusionCounts;

    fn add(self, rhs: Self) -> Self {
        ConfusionCounts {
            correct: self.correct + rhs.correct,
            incorrect: self.incorrect + rhs.incorrect,
            positives_total: self.positives_total + rhs.positives_total,
        }
    }
}

/// `C / P`, or 0 when there are no gold positives.
pub fn recall(counts: &ConfusionCounts) -> f64 {
    if counts.positives_total == 0 {
        0.0
    } else {
        counts.correct as f64 / counts.positives_total as f64
    }
}

/// `C / (C + I)`, or 0 when nothing was extracted.
pub fn precision(counts: &ConfusionCounts) -> f64 {
    let extracted = counts.correct + counts.incorrect;
    if extracted == 0 {
        0.0
    } else {
        counts.correct as f64 / extracted as f64
    }
}

/// `(beta^2 + 1) p r / (beta^2 p + r)`, or 0 when the denominator is 0.
pub fn f_measure(p: f64, r: f64, beta: f64) -> Result<f64, EvalError> {
    if beta.is_nan() || beta <= 0.0 {
        return Err(EvalError::InvalidParameter(format!(
            "beta must be positive, got {beta}"
        )));
    }
    let b2 = beta * beta;
    let denom = b2 * p + r;
    Ok(if denom == 0.0 {
        0.0
    } else {
        (b2 + 1.0) * p * r / denom
    })
}

fn f1(p: f64, r: f64) -> f64 {
    f_measure(p, r, 1.0).expect("beta = 1 is valid")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitResult {
    pub split_id: u32,
    pub counts: ConfusionCounts,
    pub recall: f64,
    pub precision: f64,
    pub f1: f64,
}

impl SplitResult {
    pub fn from_counts(split_id: u32, counts: ConfusionCounts) -> Self {
        let r = recall(&counts);
        let p = precision(&counts);
        SplitResult {
            split_id,
            counts,
            recall: r,
            precision: p,
            f1: f1(p, r),
        }
    }

    pub fn metric(&self, metric: Metric) -> f64 {
        match metric {
            Metric::Recall => self.recall,
            Metric::Precision => self.precision,
            Metric::F1 => self.f1,
        }
    }
}

/// Counts predictions against gold labels (`+1` = related).
pub fn evaluate_split(
    predictions: &[i8],
    gold: &[i8],
    split_id: u32,
) -> Result<SplitResult, EvalError> {
    if predictions.len() != gold.len() {
        return Err(EvalError::InvalidInput(format!(
            "{} predictions but {} gold labels",
            predictions.len(),
            gold.len()
        )));
    }
    let mut counts = ConfusionCounts::default();
    for (&p, &g) in predictions.iter().zip(gold) {
        match (p > 0, g > 0) {
            (true, true) => counts.correct += 1,
            (true, false) => counts.incorrect += 1,
            _ => {}
        }
        if g > 0 {
            counts.positives_total += 1;
        }
    }
    Ok(SplitResult::from_counts(split_id, counts))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Averages {
    pub recall: f64,
    pub precision: f64,
    pub f1: f64,
}

/// Unweighted mean of the per-split metrics.
pub fn macro_average(results: &[SplitResult]) -> Result<Averages, EvalError> {
    if results.is_empty() {
        return Err(EvalError::InvalidInput(
            "no split results to average".into(),
        ));
    }
    let n = results.len() as f64;
    let mean = |m: Metric| results.iter().map(|r| r.metric(m)).sum::<f64>() / n;
    Ok(Averages {
        recall: mean(Metric::Recall),
        precision: mean(Metric::Precision),
        f1: mean(Metric::F1),
    })
}

/// Metrics of the summed counts of all splits.
pub fn pooled(results: &[SplitResult]) -> Result<Averages, EvalError> {
    if results.is_empty() {
        return Err(EvalError::InvalidInput("no split results to pool".into()));
    }
    let total = results
        .iter()
        .fold(ConfusionCounts::default(), |acc, r| acc + r.counts);
    let r = SplitResult::from_counts(0, total);
    Ok(Averages {
        recall: r.recall,
        precision: r.precision,
        f1: r.f1,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Recall,
    Precision,
    F1,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::Recall => "recall",
            Metric::Precision => "precision",
            Metric::F1 => "f1",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = EvalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "recall" | "r" => Ok(Metric::Recall),
            "precision" | "p" => Ok(Metric::Precision),
            "f1" | "f" => Ok(Metric::F1),
            other => Err(EvalError::InvalidParameter(format!(
                "unknown metric {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TTestResult {
    pub metric_name: String,
    pub n: usize,
    pub mean_diff: f64,
    pub t_statistic: f64,
    pub degrees_of_freedom: usize,
    pub p_value: f64,
    pub significant_at_5pct: bool,
}

/// Two-sided paired t-test on `a[i] - b[i]`.
///
/// Zero spread is handled by convention: identical differences of zero give
/// `t = 0, p = 1`; a constant nonzero difference gives `t = +-inf, p = 0`.
pub fn paired_t_test(a: &[f64], b: &[f64]) -> Result<TTestResult, EvalError> {
    paired_t_test_named(a, b, "")
}

pub fn paired_t_test_named(
    a: &[f64],
    b: &[f64],
    metric_name: &str,
) -> Result<TTestResult, EvalError> {
    if a.len() != b.len() {
        return Err(EvalError::InvalidInput(format!(
            "paired samples differ in length ({} vs {})",
            a.len(),
            b.len()
        )));
    }
    let n = a.len();
    if n < 2 {
        return Err(EvalError::InvalidInput(format!(
            "paired t-test needs at least 2 pairs, got {n}"
        )));
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let nf = n as f64;
    let mean = d.iter().sum::<f64>() / nf;
    let var = d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (nf - 1.0);
    let sd = var.sqrt();
    let df = n - 1;
    let (t, p) = if sd == 0.0 {
        if mean == 0.0 {
            (0.0, 1.0)
        } else {
            (mean.signum() * f64::INFINITY, 0.0)
        }
    } else {
        let t = mean / (sd / nf.sqrt());
        (t, special::student_t_two_sided_p(t, df as f64))
    };
    Ok(TTestResult {
        metric_name: metric_name.to_string(),
        n,
        mean_diff: mean,
        t_statistic: t,
        degrees_of_freedom: df,
        p_value: p,
        significant_at_5pct: p < 0.05,
    })
}
