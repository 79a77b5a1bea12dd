// SPDX-License-Identifier: Apache-2.0

//! Binary logistic regression trained by full-batch gradient descent.
//!
//! The objective is the mean cross-entropy plus `lambda / (2N) * ||w||^2`
//! (the bias is not penalized), i.e. the same trade-off as an inverse
//! regularization strength `C = 1 / lambda`. Training starts from zero
//! weights. A step that would increase the objective is retried with half
//! the learning rate, so the recorded loss sequence never increases.

use serde::{Deserialize, Serialize};

use crate::error::{MlError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LogisticParams {
    pub l2_lambda: f64,
    pub learning_rate: f64,
    pub max_iters: usize,
    pub tol: f64,
}

impl Default for LogisticParams {
    fn default() -> Self {
        Self { l2_lambda: 1.0, learning_rate: 0.1, max_iters: 1000, tol: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub l2_lambda: f64,
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check_shapes(x: &[Vec<f64>], y: &[bool], dim: Option<usize>) -> Result<usize> {
    if x.is_empty() {
        return Err(MlError::EmptyInput("no training rows"));
    }
    if x.len() != y.len() {
        return Err(MlError::DimensionMismatch { expected: x.len(), found: y.len() });
    }
    let d = dim.unwrap_or(x[0].len());
    for row in x {
        if row.len() != d {
            return Err(MlError::DimensionMismatch { expected: d, found: row.len() });
        }
    }
    Ok(d)
}

fn margins(x: &[Vec<f64>], weights: &[f64], bias: f64) -> Vec<f64> {
    x.iter().map(|row| dot(row, weights) + bias).collect()
}

fn loss_from_margins(z: &[f64], y: &[bool], weights: &[f64], lambda: f64) -> f64 {
    let n = z.len() as f64;
    let ce: f64 = z
        .iter()
        .zip(y)
        .map(|(&zi, &yi)| softplus(zi) - if yi { zi } else { 0.0 })
        .sum();
    ce / n + lambda / (2.0 * n) * dot(weights, weights)
}

fn gradient_from_margins(
    x: &[Vec<f64>],
    z: &[f64],
    y: &[bool],
    weights: &[f64],
    lambda: f64,
) -> (Vec<f64>, f64) {
    let n = x.len() as f64;
    let mut gw = vec![0.0; weights.len()];
    let mut gb = 0.0;
    for ((row, &zi), &yi) in x.iter().zip(z).zip(y) {
        let r = sigmoid(zi) - if yi { 1.0 } else { 0.0 };
        gb += r;
        for (g, v) in gw.iter_mut().zip(row) {
            *g += r * v;
        }
    }
    for (g, w) in gw.iter_mut().zip(weights) {
        *g = *g / n + lambda / n * w;
    }
    (gw, gb / n)
}

/// Regularized objective at `(weights, bias)`.
pub fn objective(x: &[Vec<f64>], y: &[bool], weights: &[f64], bias: f64, lambda: f64) -> f64 {
    loss_from_margins(&margins(x, weights, bias), y, weights, lambda)
}

/// Analytic gradient of [`objective`] as `(d/dw, d/db)`.
pub fn gradient(
    x: &[Vec<f64>],
    y: &[bool],
    weights: &[f64],
    bias: f64,
    lambda: f64,
) -> (Vec<f64>, f64) {
    gradient_from_margins(x, &margins(x, weights, bias), y, weights, lambda)
}

impl LogisticModel {
    pub fn zeros(dim: usize, l2_lambda: f64) -> Self {
        Self { weights: vec![0.0; dim], bias: 0.0, l2_lambda }
    }

    pub fn fit(x: &[Vec<f64>], y: &[bool], params: &LogisticParams) -> Result<Self> {
        Self::fit_with_history(x, y, params).map(|(m, _)| m)
    }

    /// Trains and also returns the objective value after every accepted step
    /// (the first entry is the objective at zero weights).
    pub fn fit_with_history(
        x: &[Vec<f64>],
        y: &[bool],
        params: &LogisticParams,
    ) -> Result<(Self, Vec<f64>)> {
        let d = check_shapes(x, y, None)?;
        Self::descend(x, y, params, Self::zeros(d, params.l2_lambda))
    }

    /// Continues gradient descent from `init` instead of zero weights.
    pub fn fit_from(
        x: &[Vec<f64>],
        y: &[bool],
        params: &LogisticParams,
        init: LogisticModel,
    ) -> Result<Self> {
        check_shapes(x, y, Some(init.weights.len()))?;
        Self::descend(x, y, params, init).map(|(m, _)| m)
    }

    fn descend(
        x: &[Vec<f64>],
        y: &[bool],
        params: &LogisticParams,
        init: LogisticModel,
    ) -> Result<(Self, Vec<f64>)> {
        if params.l2_lambda < 0.0 || params.learning_rate <= 0.0 {
            return Err(MlError::InvalidParameter(
                "l2_lambda must be >= 0 and learning_rate > 0".into(),
            ));
        }
        let positives = y.iter().filter(|&&v| v).count();
        if positives == 0 || positives == y.len() {
            log::warn!("logistic regression trained on a single class ({positives}/{})", y.len());
        }

        let lambda = params.l2_lambda;
        let mut weights = init.weights;
        let mut bias = init.bias;
        let mut z = margins(x, &weights, bias);
        let mut loss = loss_from_margins(&z, y, &weights, lambda);
        let mut history = vec![loss];
        let mut lr = params.learning_rate;

        let mut iter = 0;
        while iter < params.max_iters {
            iter += 1;
            let (gw, gb) = gradient_from_margins(x, &z, y, &weights, lambda);
            let cand_w: Vec<f64> = weights.iter().zip(&gw).map(|(w, g)| w - lr * g).collect();
            let cand_b = bias - lr * gb;
            let cand_z = margins(x, &cand_w, cand_b);
            let cand_loss = loss_from_margins(&cand_z, y, &cand_w, lambda);
            if !(cand_loss <= loss) {
                lr *= 0.5;
                if lr < 1e-12 {
                    break;
                }
                continue;
            }
            let improvement = loss - cand_loss;
            weights = cand_w;
            bias = cand_b;
            z = cand_z;
            loss = cand_loss;
            history.push(loss);
            if improvement < params.tol {
                break;
            }
        }

        Ok((Self { weights, bias, l2_lambda: lambda }, history))
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn decision(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.weights.len(), "feature dimension mismatch");
        dot(x, &self.weights) + self.bias
    }

    pub fn predict_proba(&self, x: &[f64]) -> f64 {
        sigmoid(self.decision(x))
    }

    pub fn predict(&self, x: &[f64]) -> bool {
        self.predict_proba(x) >= 0.5
    }
}
