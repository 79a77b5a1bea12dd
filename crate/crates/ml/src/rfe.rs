// SPDX-License-Identifier: Apache-2.0

//! Recursive feature elimination driven by logistic-regression weights.

use crate::error::{MlError, Result};
use crate::logistic::{LogisticModel, LogisticParams};

fn project(x: &[Vec<f64>], columns: &[usize]) -> Vec<Vec<f64>> {
    x.iter().map(|row| columns.iter().map(|&c| row[c]).collect()).collect()
}

/// Drops the surviving feature with the smallest absolute weight (ties drop
/// the larger index) until `target_k` remain. Returns ascending indices.
///
/// Each round starts gradient descent from the previous round's weights with
/// the dropped coordinate removed; see [`rfe_select_cold`] for refits from
/// zero.
pub fn rfe_select(
    x: &[Vec<f64>],
    y: &[bool],
    target_k: usize,
    params: &LogisticParams,
) -> Result<Vec<usize>> {
    eliminate(x, y, target_k, params, true)
}

/// Like [`rfe_select`] but every round refits from zero weights.
pub fn rfe_select_cold(
    x: &[Vec<f64>],
    y: &[bool],
    target_k: usize,
    params: &LogisticParams,
) -> Result<Vec<usize>> {
    eliminate(x, y, target_k, params, false)
}

fn eliminate(
    x: &[Vec<f64>],
    y: &[bool],
    target_k: usize,
    params: &LogisticParams,
    warm: bool,
) -> Result<Vec<usize>> {
    if target_k < 1 {
        return Err(MlError::InvalidParameter("target_k must be at least 1".into()));
    }
    if x.is_empty() {
        return Err(MlError::EmptyInput("no training rows"));
    }
    let d = x[0].len();
    if target_k > d {
        return Err(MlError::InvalidParameter(format!(
            "target_k {target_k} exceeds feature count {d}"
        )));
    }

    let mut surviving: Vec<usize> = (0..d).collect();
    let mut previous: Option<LogisticModel> = None;
    while surviving.len() > target_k {
        let xs = project(x, &surviving);
        let model = match previous.take() {
            Some(init) => LogisticModel::fit_from(&xs, y, params, init)?,
            None => LogisticModel::fit(&xs, y, params)?,
        };
        let weakest = weakest_position(&model.weights, &surviving);
        surviving.remove(weakest);
        if warm {
            let mut next = model;
            next.weights.remove(weakest);
            previous = Some(next);
        }
    }
    Ok(surviving)
}

/// Position (into `surviving`) of the feature to eliminate next.
pub fn weakest_position(weights: &[f64], surviving: &[usize]) -> usize {
    let mut best = 0;
    for pos in 1..weights.len() {
        let (w, b) = (weights[pos].abs(), weights[best].abs());
        if w < b || (w == b && surviving[pos] > surviving[best]) {
            best = pos;
        }
    }
    best
}
