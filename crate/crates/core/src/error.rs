use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("unsupported relation arity {0}: only binary relations are supported")]
    UnsupportedArity(usize),
    #[error("split {split} references unknown document {doc_id}")]
    UnknownDocument { split: u32, doc_id: String },
    #[error("split {split} places document {doc_id} in both train and test")]
    OverlappingSplit { split: u32, doc_id: String },
    #[error("unknown document {0}")]
    MissingDocument(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error("graph view has no vertices")]
    EmptyGraph,
    #[error("invalid walk parameters: {0}")]
    InvalidParams(String),
    #[error("invalid kernel spec: {0}")]
    InvalidSpec(String),
    #[error("fixed-point iteration did not converge after {iterations} iterations (last change {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("linear system (I - T) is singular")]
    Singular,
    #[error("kernel between candidates {i} and {j} failed: {source}")]
    Pair {
        i: usize,
        j: usize,
        #[source]
        source: Box<KernelError>,
    },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SvmError {
    #[error("training labels contain a single class")]
    DegenerateLabels,
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("SMO did not reach the KKT tolerance within {0} iterations")]
    NotConverged(usize),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// Errors surfaced by the cross-validation driver and the file readers.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Svm(#[from] SvmError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("split {split}: {source}")]
    Split {
        split: u32,
        #[source]
        source: Box<Error>,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
