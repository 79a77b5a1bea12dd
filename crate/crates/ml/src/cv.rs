// SPDX-License-Identifier: Apache-2.0

//! Stratified k-fold partitioning.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;

use crate::error::{MlError, Result};
use crate::rng;

/// Splits `0..labels.len()` into `k` disjoint folds. Indices of each class
/// are shuffled with the seeded stream and dealt round-robin, continuing
/// from where the previous class stopped, so per-class counts differ by at
/// most one across folds and fold sizes stay balanced. Each fold is sorted.
pub fn stratified_kfold<L: Ord>(labels: &[L], k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(MlError::InvalidParameter(format!("k must be at least 2, got {k}")));
    }
    if labels.len() < k {
        return Err(MlError::InvalidParameter(format!(
            "cannot split {} items into {k} folds",
            labels.len()
        )));
    }

    let mut by_class: BTreeMap<&L, Vec<usize>> = BTreeMap::new();
    for (i, label) in labels.iter().enumerate() {
        by_class.entry(label).or_default().push(i);
    }

    let mut rng = rng::stream(seed, &[0x6b66]);
    let mut folds = vec![Vec::new(); k];
    let mut next = 0;
    for indices in by_class.values_mut() {
        indices.shuffle(&mut rng);
        for &i in indices.iter() {
            folds[next].push(i);
            next = (next + 1) % k;
        }
    }
    for fold in &mut folds {
        fold.sort_unstable();
    }
    Ok(folds)
}

/// Indices not in `folds[held_out]`, ascending.
pub fn training_indices(folds: &[Vec<usize>], held_out: usize) -> Vec<usize> {
    let mut train: Vec<usize> = folds
        .iter()
        .enumerate()
        .filter(|(f, _)| *f != held_out)
        .flat_map(|(_, idx)| idx.iter().copied())
        .collect();
    train.sort_unstable();
    train
}
