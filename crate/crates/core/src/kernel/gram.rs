use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

use crate::error::KernelError;
use crate::graph::Candidate;

use super::system::{assemble_matrices, solve_walk_system};
use super::view::{variant_view, GraphView};
use super::{KernelSpec, KernelVariant, WalkParams};

/// Unnormalized random-walk kernel between two candidates under `variant`.
pub fn rw_kernel(
    c1: &Candidate,
    c2: &Candidate,
    variant: KernelVariant,
    params: &WalkParams,
) -> Result<f64, KernelError> {
    params.validate()?;
    view_kernel(
        &variant_view(c1, variant),
        &variant_view(c2, variant),
        params,
    )
}

fn view_kernel(v1: &GraphView, v2: &GraphView, params: &WalkParams) -> Result<f64, KernelError> {
    let system = assemble_matrices(v1, v2, params)?;
    solve_walk_system(&system, params)
}

/// Cosine normalization with the zero-diagonal convention.
fn normalized(raw: f64, self1: f64, self2: f64) -> f64 {
    if self1 <= 0.0 || self2 <= 0.0 {
        0.0
    } else {
        raw / (self1 * self2).sqrt()
    }
}

/// Sum of the spec's component kernels, each cosine-normalized when
/// `spec.normalize_each` is set.
pub fn combined_kernel(
    c1: &Candidate,
    c2: &Candidate,
    spec: &KernelSpec,
    params: &WalkParams,
) -> Result<f64, KernelError> {
    params.validate()?;
    let mut total = 0.0;
    for &variant in spec.components() {
        let v1 = variant_view(c1, variant);
        let v2 = variant_view(c2, variant);
        let raw = view_kernel(&v1, &v2, params)?;
        total += if spec.normalize_each {
            normalized(
                raw,
                view_kernel(&v1, &v1, params)?,
                view_kernel(&v2, &v2, params)?,
            )
        } else {
            raw
        };
    }
    Ok(total)
}

/// Symmetric kernel matrix over a candidate list.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    pub values: DMatrix<f64>,
    pub spec: KernelSpec,
    pub params: WalkParams,
}

impl GramMatrix {
    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[(i, j)]
    }

    /// Row `i` as a plain vector.
    pub fn row(&self, i: usize) -> Vec<f64> {
        self.values.row(i).iter().copied().collect()
    }

    /// Principal submatrix on `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> GramMatrix {
        GramMatrix {
            values: DMatrix::from_fn(indices.len(), indices.len(), |a, b| {
                self.values[(indices[a], indices[b])]
            }),
            spec: self.spec.clone(),
            params: self.params,
        }
    }
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Computes Gram matrices and test-versus-train kernel rows.
///
/// Each unordered pair is evaluated exactly once, so the result does not
/// depend on the thread count.
#[derive(Debug, Clone)]
pub struct KernelMatrixBuilder {
    spec: KernelSpec,
    params: WalkParams,
    threads: Option<usize>,
}

/// Per-candidate views and self-kernels for every spec component.
struct Prepared {
    views: Vec<Vec<GraphView>>,
    self_kernels: Vec<Vec<f64>>,
}

impl KernelMatrixBuilder {
    pub fn new(spec: KernelSpec, params: WalkParams) -> Self {
        KernelMatrixBuilder {
            spec,
            params,
            threads: None,
        }
    }

    /// Uses a dedicated pool of `threads` workers instead of the global one.
    pub fn threads(mut self, threads: usize) -> Self {
        self.threads = Some(threads.max(1));
        self
    }

    fn run<T: Send>(&self, job: impl FnOnce() -> T + Send) -> T {
        match self.threads {
            Some(n) => rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .expect("thread pool")
                .install(job),
            None => job(),
        }
    }

    fn prepare(&self, candidates: &[Candidate]) -> Result<Prepared, KernelError> {
        let views: Vec<Vec<GraphView>> = candidates
            .par_iter()
            .map(|c| {
                self.spec
                    .components()
                    .iter()
                    .map(|&v| variant_view(c, v))
                    .collect()
            })
            .collect();
        let self_kernels = views
            .par_iter()
            .enumerate()
            .map(|(i, vs)| {
                vs.iter()
                    .map(|v| view_kernel(v, v, &self.params))
                    .collect::<Result<Vec<f64>, _>>()
                    .map_err(|e| pair_error(i, i, e))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Prepared {
            views,
            self_kernels,
        })
    }

    fn entry(&self, a: &Prepared, i: usize, b: &Prepared, j: usize) -> Result<f64, KernelError> {
        let mut total = 0.0;
        for k in 0..self.spec.components().len() {
            let raw = view_kernel(&a.views[i][k], &b.views[j][k], &self.params)?;
            total += if self.spec.normalize_each {
                normalized(raw, a.self_kernels[i][k], b.self_kernels[j][k])
            } else {
                raw
            };
        }
        Ok(total)
    }

    fn diagonal(&self, p: &Prepared, i: usize) -> f64 {
        p.self_kernels[i]
            .iter()
            .map(|&d| match (self.spec.normalize_each, d > 0.0) {
                (true, true) => 1.0,
                (true, false) => 0.0,
                (false, _) => d,
            })
            .sum()
    }

    pub fn gram(&self, candidates: &[Candidate]) -> Result<GramMatrix, KernelError> {
        self.params.validate()?;
        let n = candidates.len();
        let values = self.run(|| -> Result<DMatrix<f64>, KernelError> {
            let prepared = self.prepare(candidates)?;
            let pairs: Vec<(usize, usize)> = (0..n)
                .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
                .collect();
            let upper = pairs
                .par_iter()
                .map(|&(i, j)| {
                    self.entry(&prepared, i, &prepared, j)
                        .map_err(|e| pair_error(i, j, e))
                })
                .collect::<Result<Vec<f64>, _>>()?;
            let mut m = DMatrix::zeros(n, n);
            for (&(i, j), &v) in pairs.iter().zip(&upper) {
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
            for i in 0..n {
                m[(i, i)] = self.diagonal(&prepared, i);
            }
            Ok(m)
        })?;
        Ok(GramMatrix {
            values,
            spec: self.spec.clone(),
            params: self.params,
        })
    }

    /// Kernel values between every `rows` candidate and every `cols`
    /// candidate (`rows.len() x cols.len()`).
    pub fn cross(
        &self,
        rows: &[Candidate],
        cols: &[Candidate],
    ) -> Result<DMatrix<f64>, KernelError> {
        self.params.validate()?;
        let (m, n) = (rows.len(), cols.len());
        self.run(|| {
            let a = self.prepare(rows)?;
            let b = self.prepare(cols)?;
            let values = (0..m * n)
                .into_par_iter()
                .map(|k| {
                    let (i, j) = (k / n, k % n);
                    self.entry(&a, i, &b, j).map_err(|e| pair_error(i, j, e))
                })
                .collect::<Result<Vec<f64>, _>>()?;
            Ok(DMatrix::from_row_slice(m, n, &values))
        })
    }
}

fn pair_error(i: usize, j: usize, source: KernelError) -> KernelError {
    match source {
        e @ KernelError::Pair { .. } => e,
        e => KernelError::Pair {
            i,
            j,
            source: Box::new(e),
        },
    }
}

/// Gram matrix over `candidates` on the global thread pool.
pub fn gram_matrix(
    candidates: &[Candidate],
    spec: &KernelSpec,
    params: &WalkParams,
) -> Result<GramMatrix, KernelError> {
    KernelMatrixBuilder::new(spec.clone(), *params).gram(candidates)
}

/// Test-versus-train kernel rows on the global thread pool.
pub fn cross_kernel_matrix(
    rows: &[Candidate],
    cols: &[Candidate],
    spec: &KernelSpec,
    params: &WalkParams,
) -> Result<DMatrix<f64>, KernelError> {
    KernelMatrixBuilder::new(spec.clone(), *params).cross(rows, cols)
}
