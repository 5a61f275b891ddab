use std::collections::HashMap;

use crate::error::Error;
use crate::graph::{Candidate, Corpus};
use crate::kernel::{KernelMatrixBuilder, KernelSpec, WalkParams};
use crate::svm::{train, SvmParams};

use super::{evaluate_split, macro_average, pooled, Averages, SplitResult};

#[derive(Debug, Clone, Copy, Default)]
pub struct CrossValOptions {
    /// Worker threads for kernel evaluation; `None` uses the global pool.
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossValReport {
    /// Ordered by split id.
    pub splits: Vec<SplitResult>,
    pub macro_avg: Averages,
    pub pooled: Averages,
    /// Labeled candidates per split that took part (train, test).
    pub sizes: Vec<(usize, usize)>,
}

/// Document-level cross-validation over the corpus splits.
///
/// Every kernel value between two labeled candidates of the split documents
/// is computed once and shared by all splits; each split then trains on its
/// train block and predicts its test rows. Candidates without a gold label
/// are skipped.
pub fn cross_validate(
    corpus: &Corpus,
    spec: &KernelSpec,
    walk: &WalkParams,
    svm: &SvmParams,
    options: CrossValOptions,
) -> Result<CrossValReport, Error> {
    if corpus.splits.is_empty() {
        return Err(Error::Format("corpus has no splits".into()));
    }
    corpus.check_splits()?;

    let mut splits = corpus.splits.clone();
    splits.sort_by_key(|s| s.id);

    // Candidate indices per document, for every document some split uses.
    let mut candidates: Vec<Candidate> = Vec::new();
    let mut by_doc: HashMap<&str, Vec<usize>> = HashMap::new();
    for doc in &corpus.documents {
        let used = splits
            .iter()
            .any(|s| s.train_docs.contains(&doc.doc_id) || s.test_docs.contains(&doc.doc_id));
        if !used {
            continue;
        }
        let ids = by_doc.entry(doc.doc_id.as_str()).or_default();
        for c in corpus.candidates_for(std::slice::from_ref(&doc.doc_id))? {
            if c.label.is_some() {
                ids.push(candidates.len());
                candidates.push(c);
            }
        }
    }

    let mut builder = KernelMatrixBuilder::new(spec.clone(), *walk);
    if let Some(t) = options.threads {
        builder = builder.threads(t);
    }
    let gram = builder.gram(&candidates)?;
    let label = |i: usize| {
        if candidates[i].label == Some(true) {
            1i8
        } else {
            -1
        }
    };

    let mut results = Vec::with_capacity(splits.len());
    let mut sizes = Vec::with_capacity(splits.len());
    for split in &splits {
        let wrap = |e: Error| Error::Split {
            split: split.id,
            source: Box::new(e),
        };
        let gather = |docs: &[String]| -> Vec<usize> {
            docs.iter()
                .flat_map(|d| by_doc.get(d.as_str()).cloned().unwrap_or_default())
                .collect()
        };
        let train_idx = gather(&split.train_docs);
        let test_idx = gather(&split.test_docs);
        if train_idx.is_empty() || test_idx.is_empty() {
            return Err(wrap(Error::Format(
                "split has no labeled train or test candidates".into(),
            )));
        }
        let train_labels: Vec<i8> = train_idx.iter().map(|&i| label(i)).collect();
        let train_gram = gram.select(&train_idx);
        let model = train(&train_gram.values, &train_labels, svm).map_err(|e| wrap(e.into()))?;

        let mut predictions = Vec::with_capacity(test_idx.len());
        for &t in &test_idx {
            let row: Vec<f64> = train_idx.iter().map(|&j| gram.get(t, j)).collect();
            predictions.push(model.predict(&row).map_err(|e| wrap(e.into()))?);
        }
        let gold: Vec<i8> = test_idx.iter().map(|&i| label(i)).collect();
        results.push(evaluate_split(&predictions, &gold, split.id).map_err(|e| wrap(e.into()))?);
        sizes.push((train_idx.len(), test_idx.len()));
    }

    Ok(CrossValReport {
        macro_avg: macro_average(&results)?,
        pooled: pooled(&results)?,
        splits: results,
        sizes,
    })
}
