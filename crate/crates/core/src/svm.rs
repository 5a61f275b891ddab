//! Binary C-SVM on a precomputed kernel, trained by sequential minimal
//! optimization with maximal-violating-pair working-set selection.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::SvmError;

/// Curvature floor for indefinite or degenerate pairs.
const TAU: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmParams {
    pub c: f64,
    pub kkt_tolerance: f64,
    /// Cap on SMO work, in sweeps of `n` pair updates. `None` means `10 * n`.
    pub max_passes: Option<usize>,
    /// Multiplies `c` for positive examples.
    pub positive_weight: f64,
    /// Multiplies `c` for negative examples.
    pub negative_weight: f64,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams {
            c: 50.0,
            kkt_tolerance: 1e-3,
            max_passes: None,
            positive_weight: 1.0,
            negative_weight: 1.0,
        }
    }
}

impl SvmParams {
    pub fn with_c(c: f64) -> Self {
        SvmParams {
            c,
            ..Default::default()
        }
    }

    fn bound(&self, label: i8) -> f64 {
        if label > 0 {
            self.c * self.positive_weight
        } else {
            self.c * self.negative_weight
        }
    }

    fn validate(&self) -> Result<(), SvmError> {
        let positive = |x: f64| x > 0.0 && x.is_finite();
        if !positive(self.c) {
            return Err(SvmError::InvalidInput(format!(
                "C must be positive, got {}",
                self.c
            )));
        }
        if !positive(self.kkt_tolerance) {
            return Err(SvmError::InvalidInput(format!(
                "kkt_tolerance must be positive, got {}",
                self.kkt_tolerance
            )));
        }
        if !positive(self.positive_weight) || !positive(self.negative_weight) {
            return Err(SvmError::InvalidInput(
                "class weights must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    pub alphas: Vec<f64>,
    pub bias: f64,
    /// Training labels, each `-1` or `+1`.
    pub labels: Vec<i8>,
    pub c: f64,
    pub support_indices: Vec<usize>,
}

impl SvmModel {
    pub fn new(alphas: Vec<f64>, labels: Vec<i8>, bias: f64, c: f64) -> Self {
        let support_indices = alphas
            .iter()
            .enumerate()
            .filter(|(_, a)| **a > 0.0)
            .map(|(i, _)| i)
            .collect();
        SvmModel {
            alphas,
            bias,
            labels,
            c,
            support_indices,
        }
    }

    pub fn n(&self) -> usize {
        self.alphas.len()
    }

    /// `sum_i alpha_i y_i k_i + bias`.
    pub fn decision_value(&self, kernel_row: &[f64]) -> Result<f64, SvmError> {
        if kernel_row.len() != self.n() {
            return Err(SvmError::InvalidInput(format!(
                "kernel row has {} entries, model was trained on {}",
                kernel_row.len(),
                self.n()
            )));
        }
        Ok(self
            .support_indices
            .iter()
            .map(|&i| self.alphas[i] * f64::from(self.labels[i]) * kernel_row[i])
            .sum::<f64>()
            + self.bias)
    }

    /// Sign of the decision value; exactly zero maps to `+1`.
    pub fn predict(&self, kernel_row: &[f64]) -> Result<i8, SvmError> {
        Ok(sign(self.decision_value(kernel_row)?))
    }

    /// Largest KKT violation over the training set, measured on the
    /// functional margin `y_i f(x_i)`.
    pub fn kkt_violation(&self, kernel: &DMatrix<f64>, params: &SvmParams) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n() {
            let row: Vec<f64> = kernel.row(i).iter().copied().collect();
            let margin = f64::from(self.labels[i]) * self.decision_value(&row).unwrap_or(f64::NAN);
            let a = self.alphas[i];
            let upper = params.bound(self.labels[i]);
            let v = if a <= 0.0 {
                1.0 - margin
            } else if a >= upper {
                margin - 1.0
            } else {
                (margin - 1.0).abs()
            };
            worst = worst.max(v);
        }
        worst
    }
}

pub fn sign(value: f64) -> i8 {
    if value >= 0.0 {
        1
    } else {
        -1
    }
}

/// Dual objective `sum(alpha) - 1/2 sum_ij alpha_i alpha_j y_i y_j K_ij`.
pub fn dual_objective(kernel: &DMatrix<f64>, labels: &[i8], alphas: &[f64]) -> f64 {
    let n = alphas.len();
    let mut quad = 0.0;
    for i in 0..n {
        if alphas[i] == 0.0 {
            continue;
        }
        for j in 0..n {
            quad += alphas[i] * alphas[j] * f64::from(labels[i] * labels[j]) * kernel[(i, j)];
        }
    }
    alphas.iter().sum::<f64>() - 0.5 * quad
}

fn check_inputs(kernel: &DMatrix<f64>, labels: &[i8]) -> Result<(), SvmError> {
    let n = labels.len();
    if kernel.nrows() != n || kernel.ncols() != n {
        return Err(SvmError::InvalidInput(format!(
            "kernel is {}x{} but there are {n} labels",
            kernel.nrows(),
            kernel.ncols()
        )));
    }
    if let Some(bad) = labels.iter().find(|&&y| y != 1 && y != -1) {
        return Err(SvmError::InvalidInput(format!(
            "label {bad} is not -1 or +1"
        )));
    }
    if kernel.iter().any(|v| !v.is_finite()) {
        return Err(SvmError::InvalidInput(
            "kernel has non-finite entries".into(),
        ));
    }
    if !(labels.contains(&1) && labels.contains(&-1)) {
        return Err(SvmError::DegenerateLabels);
    }
    Ok(())
}

/// Observer hook called with the dual objective after every accepted step.
pub type StepObserver<'a> = &'a mut dyn FnMut(usize, f64);

pub fn train(
    kernel: &DMatrix<f64>,
    labels: &[i8],
    params: &SvmParams,
) -> Result<SvmModel, SvmError> {
    train_observed(kernel, labels, params, None)
}

/// [`train`] with an optional per-step objective observer (used to check
/// monotone ascent).
pub fn train_observed(
    kernel: &DMatrix<f64>,
    labels: &[i8],
    params: &SvmParams,
    mut observer: Option<StepObserver<'_>>,
) -> Result<SvmModel, SvmError> {
    params.validate()?;
    check_inputs(kernel, labels)?;
    let n = labels.len();
    let y: Vec<f64> = labels.iter().map(|&l| f64::from(l)).collect();
    let upper: Vec<f64> = labels.iter().map(|&l| params.bound(l)).collect();
    let q = |i: usize, j: usize| y[i] * y[j] * kernel[(i, j)];

    let mut alpha = vec![0.0; n];
    // Gradient of 1/2 a'Qa - e'a.
    let mut grad = vec![-1.0; n];
    let max_iter = params.max_passes.unwrap_or(10 * n).saturating_mul(n).max(1);

    let in_up = |a: f64, t: usize| (y[t] > 0.0 && a < upper[t]) || (y[t] < 0.0 && a > 0.0);
    let in_low = |a: f64, t: usize| (y[t] > 0.0 && a > 0.0) || (y[t] < 0.0 && a < upper[t]);

    let mut iter = 0;
    loop {
        let mut i = usize::MAX;
        let mut j = usize::MAX;
        let mut gmax = f64::NEG_INFINITY;
        let mut gmin = f64::INFINITY;
        for t in 0..n {
            let v = -y[t] * grad[t];
            if in_up(alpha[t], t) && v > gmax {
                gmax = v;
                i = t;
            }
            if in_low(alpha[t], t) && v < gmin {
                gmin = v;
                j = t;
            }
        }
        if i == usize::MAX || j == usize::MAX || gmax - gmin < params.kkt_tolerance {
            break;
        }
        if iter >= max_iter {
            return Err(SvmError::NotConverged(iter));
        }
        iter += 1;

        let (old_i, old_j) = (alpha[i], alpha[j]);
        let (ci, cj) = (upper[i], upper[j]);
        let (mut ai, mut aj) = (old_i, old_j);
        if y[i] != y[j] {
            let quad = positive_curvature(q(i, i) + q(j, j) + 2.0 * q(i, j));
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = ai - aj;
            ai += delta;
            aj += delta;
            if diff > 0.0 {
                if aj < 0.0 {
                    aj = 0.0;
                    ai = diff;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = -diff;
            }
            if diff > ci - cj {
                if ai > ci {
                    ai = ci;
                    aj = ci - diff;
                }
            } else if aj > cj {
                aj = cj;
                ai = cj + diff;
            }
        } else {
            let quad = positive_curvature(q(i, i) + q(j, j) - 2.0 * q(i, j));
            let delta = (grad[i] - grad[j]) / quad;
            let sum = ai + aj;
            ai -= delta;
            aj += delta;
            if sum > ci {
                if ai > ci {
                    ai = ci;
                    aj = sum - ci;
                }
            } else if aj < 0.0 {
                aj = 0.0;
                ai = sum;
            }
            if sum > cj {
                if aj > cj {
                    aj = cj;
                    ai = sum - cj;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = sum;
            }
        }
        alpha[i] = ai;
        alpha[j] = aj;

        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for (t, g) in grad.iter_mut().enumerate() {
            *g += q(t, i) * di + q(t, j) * dj;
        }
        if let Some(obs) = observer.as_mut() {
            obs(iter, dual_objective(kernel, labels, &alpha));
        }
    }

    let bias = -threshold(&alpha, &grad, &y, &upper);
    Ok(SvmModel::new(alpha, labels.to_vec(), bias, params.c))
}

fn positive_curvature(quad: f64) -> f64 {
    if quad > 0.0 {
        quad
    } else {
        TAU
    }
}

/// Average of `y_t grad_t` over free vectors, or the midpoint of the
/// feasible interval when every vector sits at a bound.
fn threshold(alpha: &[f64], grad: &[f64], y: &[f64], upper: &[f64]) -> f64 {
    let mut ub = f64::INFINITY;
    let mut lb = f64::NEG_INFINITY;
    let mut sum = 0.0;
    let mut free = 0usize;
    for t in 0..alpha.len() {
        let yg = y[t] * grad[t];
        if alpha[t] >= upper[t] {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            sum += yg;
            free += 1;
        }
    }
    if free > 0 {
        sum / free as f64
    } else {
        (ub + lb) / 2.0
    }
}
