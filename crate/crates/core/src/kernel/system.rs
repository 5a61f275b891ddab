use nalgebra::{DMatrix, DVector};

use crate::error::KernelError;

use super::view::{edge_kernel, vertex_kernel, walk_distributions, GraphView};
use super::{Solver, WalkParams};

/// Sparse square matrix in compressed-row form.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    dim: usize,
    row_start: Vec<usize>,
    cols: Vec<usize>,
    values: Vec<f64>,
}

impl TransitionMatrix {
    /// Builds from `(row, col, value)` triplets; repeated positions are summed
    /// in input order.
    pub fn from_triplets(dim: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_start = vec![0; dim + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *values.last_mut().expect("previous entry") += v;
            } else {
                row_start[r + 1] += 1;
                cols.push(c);
                values.push(v);
                last = Some((r, c));
            }
        }
        for r in 0..dim {
            row_start[r + 1] += row_start[r];
        }
        TransitionMatrix {
            dim,
            row_start,
            cols,
            values,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Stored entries (all strictly positive).
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_start[r]..self.row_start[r + 1];
        self.cols[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.dim)
            .map(|r| self.row(r).map(|(_, v)| v).sum())
            .collect()
    }

    /// `out = q + T x`.
    fn affine_step(&self, q: &[f64], x: &[f64], out: &mut [f64]) {
        for (r, o) in out.iter_mut().enumerate() {
            *o = q[r] + self.row(r).map(|(c, v)| v * x[c]).sum::<f64>();
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for r in 0..self.dim {
            for (c, v) in self.row(r) {
                m[(r, c)] = v;
            }
        }
        m
    }
}

/// The `(S, Q, T)` triple over vertex pairs of two views. Pair `(i, j)`
/// sits at position `i * n2 + j`.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkSystem {
    pub n1: usize,
    pub n2: usize,
    pub start: Vec<f64>,
    pub stop: Vec<f64>,
    pub transition: TransitionMatrix,
}

impl WalkSystem {
    pub fn dim(&self) -> usize {
        self.n1 * self.n2
    }
}

/// Assembles the product-graph system of two views.
pub fn assemble_matrices(
    view1: &GraphView,
    view2: &GraphView,
    params: &WalkParams,
) -> Result<WalkSystem, KernelError> {
    let d1 = walk_distributions(view1, params)?;
    let d2 = walk_distributions(view2, params)?;
    let (n1, n2) = (view1.len(), view2.len());

    let vk: Vec<f64> = view1
        .vertices
        .iter()
        .flat_map(|v| view2.vertices.iter().map(move |w| vertex_kernel(v, w)))
        .collect();

    let mut start = Vec::with_capacity(n1 * n2);
    let mut stop = Vec::with_capacity(n1 * n2);
    for i in 0..n1 {
        for j in 0..n2 {
            start.push(d1.start[i] * d2.start[j] * vk[i * n2 + j]);
            stop.push(d1.stop[i] * d2.stop[j]);
        }
    }

    let mut triplets = Vec::new();
    for (e, pe) in view1.edges.iter().zip(&d1.transition) {
        for (f, pf) in view2.edges.iter().zip(&d2.transition) {
            let weight = pe * pf * vk[e.to * n2 + f.to] * edge_kernel(e, f);
            if weight > 0.0 {
                triplets.push((e.from * n2 + f.from, e.to * n2 + f.to, weight));
            }
        }
    }

    Ok(WalkSystem {
        n1,
        n2,
        start,
        stop,
        transition: TransitionMatrix::from_triplets(n1 * n2, triplets),
    })
}

/// Solves `(I - T) X = Q` and returns `<S, X>`.
pub fn solve_walk_system(system: &WalkSystem, params: &WalkParams) -> Result<f64, KernelError> {
    let x = match params.resolve_solver(system.dim()) {
        Solver::FixedPoint => fixed_point(system, params)?,
        _ => dense_direct(system)?,
    };
    Ok(system.start.iter().zip(&x).map(|(s, x)| s * x).sum())
}

fn dense_direct(system: &WalkSystem) -> Result<Vec<f64>, KernelError> {
    let dim = system.dim();
    let mut a = -system.transition.to_dense();
    for k in 0..dim {
        a[(k, k)] += 1.0;
    }
    let q = DVector::from_column_slice(&system.stop);
    let x = a.lu().solve(&q).ok_or(KernelError::Singular)?;
    Ok(x.iter().copied().collect())
}

fn fixed_point(system: &WalkSystem, params: &WalkParams) -> Result<Vec<f64>, KernelError> {
    let q = &system.stop;
    let mut x = q.clone();
    let mut next = vec![0.0; q.len()];
    let mut change = f64::INFINITY;
    for _ in 0..params.fp_max_iters {
        system.transition.affine_step(q, &x, &mut next);
        change = x
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        std::mem::swap(&mut x, &mut next);
        if change < params.fp_tolerance {
            return Ok(x);
        }
    }
    Err(KernelError::NotConverged {
        iterations: params.fp_max_iters,
        residual: change,
    })
}
