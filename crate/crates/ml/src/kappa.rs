// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;

use crate::error::{MlError, Result};

/// Cohen's kappa between two raters' labelings of the same items.
///
/// When chance agreement is total (`p_e = 1`, both raters used one and the
/// same label throughout) the labelings are identical and kappa is 1.
pub fn cohens_kappa<L: Ord>(a: &[L], b: &[L]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(MlError::DimensionMismatch { expected: a.len(), found: b.len() });
    }
    if a.is_empty() {
        return Err(MlError::EmptyInput("no labels"));
    }
    let n = a.len() as f64;
    let mut marginals: BTreeMap<&L, (usize, usize)> = BTreeMap::new();
    let mut agree = 0usize;
    for (x, y) in a.iter().zip(b) {
        marginals.entry(x).or_default().0 += 1;
        marginals.entry(y).or_default().1 += 1;
        if x == y {
            agree += 1;
        }
    }
    let p_o = agree as f64 / n;
    let p_e: f64 = marginals.values().map(|&(ca, cb)| (ca as f64 / n) * (cb as f64 / n)).sum();
    if (1.0 - p_e).abs() < f64::EPSILON {
        return Ok(if agree == a.len() { 1.0 } else { 0.0 });
    }
    Ok((p_o - p_e) / (1.0 - p_e))
}
