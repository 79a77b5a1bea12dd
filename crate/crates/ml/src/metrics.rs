// SPDX-License-Identifier: Apache-2.0

//! Precision, recall and F1 for one positive class.

use serde::{Deserialize, Serialize};

use crate::error::{MlError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BinaryScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    /// Items whose true label is the positive class.
    pub support: usize,
    pub total: usize,
}

impl BinaryScores {
    /// Scores from confusion counts. Undefined ratios are 0.
    pub fn from_counts(tp: usize, fp: usize, fn_: usize, total: usize) -> Self {
        let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        Self {
            precision,
            recall,
            f1,
            true_positives: tp,
            false_positives: fp,
            false_negatives: fn_,
            support: tp + fn_,
            total,
        }
    }
}

pub fn prf1<T: PartialEq>(y_true: &[T], y_pred: &[T], positive: &T) -> Result<BinaryScores> {
    if y_true.len() != y_pred.len() {
        return Err(MlError::DimensionMismatch { expected: y_true.len(), found: y_pred.len() });
    }
    let (mut tp, mut fp, mut fn_) = (0, 0, 0);
    for (t, p) in y_true.iter().zip(y_pred) {
        match (t == positive, p == positive) {
            (true, true) => tp += 1,
            (false, true) => fp += 1,
            (true, false) => fn_ += 1,
            (false, false) => {}
        }
    }
    Ok(BinaryScores::from_counts(tp, fp, fn_, y_true.len()))
}

/// Cross-validated scores for one class: headline numbers from the
/// confusion counts pooled over all held-out folds, plus each fold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub label: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
    pub total: usize,
    pub folds: Vec<BinaryScores>,
}

impl EvalReport {
    pub fn from_folds(label: impl Into<String>, folds: Vec<BinaryScores>) -> Self {
        let sum = |f: fn(&BinaryScores) -> usize| folds.iter().map(f).sum::<usize>();
        let pooled = BinaryScores::from_counts(
            sum(|s| s.true_positives),
            sum(|s| s.false_positives),
            sum(|s| s.false_negatives),
            sum(|s| s.total),
        );
        Self {
            label: label.into(),
            precision: pooled.precision,
            recall: pooled.recall,
            f1: pooled.f1,
            support: pooled.support,
            total: pooled.total,
            folds,
        }
    }

    /// Unweighted mean of the per-fold `(precision, recall, f1)`.
    pub fn fold_mean(&self) -> (f64, f64, f64) {
        let n = self.folds.len().max(1) as f64;
        let (p, r, f) = self
            .folds
            .iter()
            .fold((0.0, 0.0, 0.0), |acc, s| (acc.0 + s.precision, acc.1 + s.recall, acc.2 + s.f1));
        (p / n, r / n, f / n)
    }
}

pub fn macro_f1(reports: &[EvalReport]) -> f64 {
    if reports.is_empty() {
        return 0.0;
    }
    reports.iter().map(|r| r.f1).sum::<f64>() / reports.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect() {
        let y = ["a", "b", "a"];
        let s = prf1(&y, &y, &"a").unwrap();
        assert_eq!((s.precision, s.recall, s.f1), (1.0, 1.0, 1.0));
    }

    #[test]
    fn harmonic_mean() {
        let t = [true, true, false, false];
        let p = [true, false, false, false];
        let s = prf1(&t, &p, &true).unwrap();
        assert_eq!(s.precision, 1.0);
        assert_eq!(s.recall, 0.5);
        assert!((s.f1 - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn no_predicted_positives() {
        let s = prf1(&[true, false], &[false, false], &true).unwrap();
        assert_eq!((s.precision, s.recall, s.f1), (0.0, 0.0, 0.0));
    }

    #[test]
    fn length_mismatch() {
        assert!(prf1(&[1], &[1, 2], &1).is_err());
    }

    #[test]
    fn pooled_report_keeps_f1_identity() {
        let folds = vec![BinaryScores::from_counts(3, 1, 0, 10), BinaryScores::from_counts(1, 0, 2, 10)];
        let r = EvalReport::from_folds("x", folds);
        assert_eq!(r.support, 6);
        assert!((r.f1 - 2.0 * r.precision * r.recall / (r.precision + r.recall)).abs() < 1e-15);
    }
}
