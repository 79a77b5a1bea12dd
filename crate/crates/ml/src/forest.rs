// SPDX-License-Identifier: Apache-2.0

//! Random forest of Gini-impurity decision trees.
//!
//! Each tree is grown on a bootstrap sample drawn from its own random
//! stream `(seed, tree index)`, so trees can be built in parallel and still
//! produce exactly the forest a serial build would.

use rand::seq::index::sample;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{MlError, Result};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestParams {
    pub n_trees: usize,
    /// `None` grows trees until leaves are pure or too small to split.
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self { n_trees: 100, max_depth: None, min_leaf: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Node {
    Leaf {
        counts: Vec<usize>,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
        /// Impurity decrease weighted by the fraction of the tree's samples
        /// that reach this node.
        weighted_gain: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub nodes: Vec<Node>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub trees: Vec<DecisionTree>,
    pub n_trees: usize,
    pub n_features: usize,
    pub n_classes: usize,
    pub seed: u64,
    pub params: ForestParams,
}

/// Features examined per node: `floor(sqrt(d))`, at least one.
pub fn features_per_node(d: usize) -> usize {
    ((d as f64).sqrt().floor() as usize).max(1)
}

fn gini(counts: &[usize], n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / n).powi(2)).sum::<f64>()
}

fn argmax(counts: impl IntoIterator<Item = usize>) -> usize {
    let mut best = 0;
    let mut best_count = None;
    for (i, c) in counts.into_iter().enumerate() {
        if best_count.is_none_or(|b| c > b) {
            best = i;
            best_count = Some(c);
        }
    }
    best
}

struct SplitCandidate {
    feature: usize,
    threshold: f64,
    impurity: f64,
}

struct TreeBuilder<'a> {
    x: &'a [Vec<f64>],
    y: &'a [usize],
    n_classes: usize,
    n_features: usize,
    params: &'a ForestParams,
    root_samples: f64,
    nodes: Vec<Node>,
}

impl TreeBuilder<'_> {
    fn class_counts(&self, samples: &[usize]) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes];
        for &i in samples {
            counts[self.y[i]] += 1;
        }
        counts
    }

    fn best_split_on(&self, feature: usize, samples: &[usize]) -> Option<SplitCandidate> {
        let min_leaf = self.params.min_leaf.max(1);
        let n = samples.len();
        let mut pairs: Vec<(f64, usize)> =
            samples.iter().map(|&i| (self.x[i][feature], self.y[i])).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));

        let total = self.class_counts(samples);
        let mut left = vec![0usize; self.n_classes];
        let mut best: Option<SplitCandidate> = None;
        for i in 1..n {
            left[pairs[i - 1].1] += 1;
            if i < min_leaf || n - i < min_leaf || pairs[i - 1].0 >= pairs[i].0 {
                continue;
            }
            let right: Vec<usize> = total.iter().zip(&left).map(|(t, l)| t - l).collect();
            let impurity =
                (i as f64 * gini(&left, i) + (n - i) as f64 * gini(&right, n - i)) / n as f64;
            if best.as_ref().is_none_or(|b| impurity < b.impurity) {
                let (lo, hi) = (pairs[i - 1].0, pairs[i].0);
                let mid = lo + (hi - lo) / 2.0;
                let threshold = if mid < hi { mid } else { lo };
                best = Some(SplitCandidate { feature, threshold, impurity });
            }
        }
        best
    }

    fn grow(&mut self, samples: Vec<usize>, depth: usize, rng: &mut ChaCha8Rng) -> usize {
        let counts = self.class_counts(&samples);
        let n = samples.len();
        let parent = gini(&counts, n);
        let min_leaf = self.params.min_leaf.max(1);
        let depth_exhausted = self.params.max_depth.is_some_and(|d| depth >= d);
        if parent == 0.0 || depth_exhausted || n < 2 * min_leaf {
            self.nodes.push(Node::Leaf { counts });
            return self.nodes.len() - 1;
        }

        // Examine a random subset first; if none of it yields a useful
        // split, keep drawing the remaining features in random order.
        let k = features_per_node(self.n_features);
        let order = sample(rng, self.n_features, self.n_features).into_vec();
        let mut best: Option<SplitCandidate> = None;
        for (visited, &feature) in order.iter().enumerate() {
            if visited >= k && best.as_ref().is_some_and(|b| b.impurity < parent) {
                break;
            }
            if let Some(c) = self.best_split_on(feature, &samples) {
                if best.as_ref().is_none_or(|b| c.impurity < b.impurity) {
                    best = Some(c);
                }
            }
        }

        let split = match best {
            Some(b) if b.impurity < parent => b,
            _ => {
                self.nodes.push(Node::Leaf { counts });
                return self.nodes.len() - 1;
            }
        };

        let (left_samples, right_samples): (Vec<usize>, Vec<usize>) =
            samples.iter().partition(|&&i| self.x[i][split.feature] <= split.threshold);
        let weighted_gain = n as f64 / self.root_samples * (parent - split.impurity);

        let id = self.nodes.len();
        self.nodes.push(Node::Leaf { counts: Vec::new() });
        let left = self.grow(left_samples, depth + 1, rng);
        let right = self.grow(right_samples, depth + 1, rng);
        self.nodes[id] = Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            left,
            right,
            weighted_gain,
        };
        id
    }
}

impl DecisionTree {
    fn leaf_counts(&self, x: &[f64]) -> &[usize] {
        let mut id = 0;
        loop {
            match &self.nodes[id] {
                Node::Leaf { counts } => return counts,
                Node::Split { feature, threshold, left, right, .. } => {
                    id = if x[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }

    pub fn predict(&self, x: &[f64]) -> usize {
        argmax(self.leaf_counts(x).iter().copied())
    }

    pub fn split_count(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Split { .. })).count()
    }
}

impl ForestModel {
    pub fn fit(
        x: &[Vec<f64>],
        y: &[usize],
        n_classes: usize,
        params: &ForestParams,
        seed: u64,
    ) -> Result<Self> {
        Self::fit_with(x, y, n_classes, params, seed, true)
    }

    /// Binary convenience: `true` is class 1.
    pub fn fit_binary(x: &[Vec<f64>], y: &[bool], params: &ForestParams, seed: u64) -> Result<Self> {
        let labels: Vec<usize> = y.iter().map(|&b| usize::from(b)).collect();
        Self::fit(x, &labels, 2, params, seed)
    }

    pub fn fit_with(
        x: &[Vec<f64>],
        y: &[usize],
        n_classes: usize,
        params: &ForestParams,
        seed: u64,
        parallel: bool,
    ) -> Result<Self> {
        if x.is_empty() {
            return Err(MlError::EmptyInput("no training rows"));
        }
        if x.len() != y.len() {
            return Err(MlError::DimensionMismatch { expected: x.len(), found: y.len() });
        }
        if params.n_trees == 0 {
            return Err(MlError::InvalidParameter("n_trees must be positive".into()));
        }
        let n_features = x[0].len();
        if n_features == 0 {
            return Err(MlError::EmptyInput("no features"));
        }
        if let Some(row) = x.iter().find(|r| r.len() != n_features) {
            return Err(MlError::DimensionMismatch { expected: n_features, found: row.len() });
        }
        if let Some(&bad) = y.iter().find(|&&c| c >= n_classes) {
            return Err(MlError::InvalidParameter(format!(
                "label {bad} out of range for {n_classes} classes"
            )));
        }

        let build = |t: usize| {
            let mut rng = rng::stream(seed, &[t as u64]);
            let n = x.len();
            let samples: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
            let mut builder = TreeBuilder {
                x,
                y,
                n_classes,
                n_features,
                params,
                root_samples: n as f64,
                nodes: Vec::new(),
            };
            builder.grow(samples, 0, &mut rng);
            DecisionTree { nodes: builder.nodes }
        };
        let trees: Vec<DecisionTree> = if parallel {
            (0..params.n_trees).into_par_iter().map(build).collect()
        } else {
            (0..params.n_trees).map(build).collect()
        };

        Ok(Self { trees, n_trees: params.n_trees, n_features, n_classes, seed, params: *params })
    }

    /// Majority vote over trees; ties go to the smaller class index.
    pub fn predict(&self, x: &[f64]) -> usize {
        let mut votes = vec![0usize; self.n_classes];
        for tree in &self.trees {
            votes[tree.predict(x)] += 1;
        }
        argmax(votes)
    }

    /// Mean of the per-tree leaf class distributions.
    pub fn predict_proba(&self, x: &[f64]) -> Vec<f64> {
        let mut proba = vec![0.0; self.n_classes];
        for tree in &self.trees {
            let counts = tree.leaf_counts(x);
            let total: usize = counts.iter().sum();
            if total == 0 {
                continue;
            }
            for (p, &c) in proba.iter_mut().zip(counts) {
                *p += c as f64 / total as f64;
            }
        }
        let n = self.trees.len() as f64;
        proba.iter_mut().for_each(|p| *p /= n);
        proba
    }

    /// Mean decrease in impurity per feature, normalized to sum to one
    /// (all zeros when no tree has a split).
    pub fn feature_importances(&self) -> Vec<f64> {
        let mut importances = vec![0.0; self.n_features];
        for tree in &self.trees {
            for node in &tree.nodes {
                if let Node::Split { feature, weighted_gain, .. } = node {
                    importances[*feature] += weighted_gain;
                }
            }
        }
        let n = self.trees.len() as f64;
        importances.iter_mut().for_each(|v| *v /= n);
        let total: f64 = importances.iter().sum();
        if total > 0.0 {
            importances.iter_mut().for_each(|v| *v /= total);
        }
        importances
    }
}
