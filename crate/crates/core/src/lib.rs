//! Marginalized random-walk kernels over labeled dependency graphs for
//! binary relation extraction.
//!
//! The pipeline is:
//!
//! 1. [`ingest`] reads pre-parsed sentences (JSON lines) into
//!    [`graph::SentenceGraph`]s;
//! 2. [`graph::generate_candidates`] pairs up entity mentions and marks the
//!    entity and shortest-path vertices/edges of each pair;
//! 3. [`kernel`] compares candidates by the expected number of matching
//!    random walks over a full, shortest-path or path-agnostic view;
//! 4. [`svm`] trains a C-SVM on the precomputed Gram matrix;
//! 5. [`eval`] scores predictions per document split and compares kernel
//!    configurations with paired t-tests.

pub mod error;
pub mod eval;
pub mod formats;
pub mod graph;
pub mod ingest;
pub mod kernel;
pub mod svm;
pub mod synthetic;

pub use error::{Error, EvalError, GraphError, KernelError, Result, SvmError};
pub use eval::{
    cross_validate, evaluate_split, f_measure, macro_average, paired_t_test, precision, recall,
    ConfusionCounts, CrossValOptions, CrossValReport, Metric, SplitResult, TTestResult,
};
pub use graph::{
    annotate_shortest_path, generate_candidates, validate_sentence, Candidate, Caps, Corpus,
    SentenceGraph, Split, TokenFeatures,
};
pub use kernel::{
    combined_kernel, gram_matrix, rw_kernel, GramMatrix, KernelMatrixBuilder, KernelSpec,
    KernelVariant, Solver, WalkParams,
};
pub use svm::{SvmModel, SvmParams};
