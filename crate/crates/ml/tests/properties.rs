// SPDX-License-Identifier: Apache-2.0

use gitteams_ml::logistic::{gradient, objective};
use gitteams_ml::{
    cohens_kappa, prf1, rfe_select, rfe_select_cold, rng, stratified_kfold, ForestModel, ForestParams,
    LogisticModel, LogisticParams, ModelDocument, TfidfModel,
};
use proptest::prelude::*;
use rand::Rng;

fn random_problem(seed: u64, n: usize, d: usize) -> (Vec<Vec<f64>>, Vec<bool>, Vec<f64>, f64) {
    let mut r = rng::stream(seed, &[]);
    let x: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| r.gen_range(-2.0..2.0)).collect()).collect();
    let y: Vec<bool> = (0..n).map(|_| r.gen_bool(0.5)).collect();
    let w: Vec<f64> = (0..d).map(|_| r.gen_range(-1.5..1.5)).collect();
    let b = r.gen_range(-1.0..1.0);
    (x, y, w, b)
}

/// Central finite differences of the objective, independent of the
/// analytic gradient code path.
fn numeric_gradient(x: &[Vec<f64>], y: &[bool], w: &[f64], b: f64, lambda: f64) -> (Vec<f64>, f64) {
    let h = 1e-5;
    let gw = (0..w.len())
        .map(|j| {
            let mut plus = w.to_vec();
            let mut minus = w.to_vec();
            plus[j] += h;
            minus[j] -= h;
            (objective(x, y, &plus, b, lambda) - objective(x, y, &minus, b, lambda)) / (2.0 * h)
        })
        .collect();
    let gb = (objective(x, y, w, b + h, lambda) - objective(x, y, w, b - h, lambda)) / (2.0 * h);
    (gw, gb)
}

fn relative_error(a: f64, n: f64) -> f64 {
    (a - n).abs() / a.abs().max(n.abs()).max(1e-6)
}

#[test]
fn gradient_matches_finite_differences() {
    let mut worst: f64 = 0.0;
    for seed in 0..100 {
        let (x, y, w, b) = random_problem(seed, 5, 3);
        let lambda = if seed % 2 == 0 { 1.0 } else { 0.0 };
        let (aw, ab) = gradient(&x, &y, &w, b, lambda);
        let (nw, nb) = numeric_gradient(&x, &y, &w, b, lambda);
        for (a, n) in aw.iter().zip(&nw) {
            worst = worst.max(relative_error(*a, *n));
        }
        worst = worst.max(relative_error(ab, nb));
    }
    assert!(worst < 1e-4, "max relative error {worst}");
}

#[test]
fn loss_never_increases_at_small_learning_rate() {
    let (x, y, _, _) = random_problem(42, 40, 4);
    let params = LogisticParams { learning_rate: 0.01, max_iters: 500, tol: 0.0, ..Default::default() };
    let (_, history) = LogisticModel::fit_with_history(&x, &y, &params).unwrap();
    assert!(history.len() > 100);
    for pair in history.windows(2) {
        assert!(pair[1] <= pair[0], "{} -> {}", pair[0], pair[1]);
    }
}

#[test]
fn rfe_keeps_a_copy_of_the_informative_feature() {
    let mut r = rng::stream(5, &[]);
    let mut x = Vec::new();
    let mut y = Vec::new();
    for _ in 0..80 {
        let label = r.gen_bool(0.5);
        let signal = if label { 1.0 } else { -1.0 } + r.gen_range(-0.3..0.3);
        x.push(vec![r.gen_range(-1.0..1.0), signal, signal]);
        y.push(label);
    }
    let params = LogisticParams::default();
    let first = rfe_select(&x, &y, 1, &params).unwrap();
    assert!(first == vec![1] || first == vec![2], "{first:?}");
    assert_eq!(first, rfe_select(&x, &y, 1, &params).unwrap());
    let two = rfe_select(&x, &y, 2, &params).unwrap();
    assert_eq!(two, vec![1, 2]);
    assert_eq!(rfe_select_cold(&x, &y, 2, &params).unwrap(), vec![1, 2]);
}

#[test]
fn informative_feature_dominates_importance() {
    let mut r = rng::stream(8, &[]);
    let mut x = Vec::new();
    let mut y = Vec::new();
    for _ in 0..200 {
        let label = r.gen_range(0..2usize);
        x.push(vec![label as f64 * 2.0 + r.gen_range(-0.8..0.8), r.gen_range(0.0..1.0)]);
        y.push(label);
    }
    let f = ForestModel::fit(&x, &y, 2, &ForestParams { n_trees: 30, ..Default::default() }, 3).unwrap();
    let imp = f.feature_importances();
    assert!(imp[0] > imp[1], "{imp:?}");
    assert!((imp.iter().sum::<f64>() - 1.0).abs() < 1e-9);
}

#[test]
fn forest_same_seed_serializes_identically() {
    let (x, yb, _, _) = random_problem(3, 60, 5);
    let p = ForestParams { n_trees: 10, ..Default::default() };
    let a = ForestModel::fit_binary(&x, &yb, &p, 99).unwrap();
    let b = ForestModel::fit_binary(&x, &yb, &p, 99).unwrap();
    let ja = ModelDocument::new("forest", a).to_json().unwrap();
    let jb = ModelDocument::new("forest", b).to_json().unwrap();
    assert_eq!(ja, jb);
    let c = ForestModel::fit_binary(&x, &yb, &p, 100).unwrap();
    assert_ne!(ja, ModelDocument::new("forest", c).to_json().unwrap());
}

#[test]
fn reloaded_models_predict_bit_identically() {
    let (x, y, _, _) = random_problem(12, 50, 4);
    let lr = LogisticModel::fit(&x, &y, &LogisticParams::default()).unwrap();
    let json = ModelDocument::new("logistic", lr.clone()).to_json().unwrap();
    let back = ModelDocument::<LogisticModel>::from_json(&json, "logistic").unwrap().model;
    let forest = ForestModel::fit_binary(&x, &y, &ForestParams { n_trees: 7, ..Default::default() }, 1).unwrap();
    let fjson = ModelDocument::new("forest", forest.clone()).to_json().unwrap();
    let fback = ModelDocument::<ForestModel>::from_json(&fjson, "forest").unwrap().model;
    for row in &x {
        assert_eq!(lr.predict_proba(row).to_bits(), back.predict_proba(row).to_bits());
        assert_eq!(forest.predict_proba(row), fback.predict_proba(row));
    }
}

fn tokens() -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec(prop::sample::select(vec!["fix", "bug", "test", "add", "case", "ui"]), 0..8)
        .prop_map(|v| v.into_iter().map(String::from).collect())
}

proptest! {
    #[test]
    fn tfidf_output_has_unit_or_zero_norm(docs in prop::collection::vec(tokens(), 1..12), probe in tokens()) {
        prop_assume!(docs.iter().any(|d| !d.is_empty()));
        let m = TfidfModel::fit(&docs, 6, (1, 3)).unwrap();
        prop_assert!(m.vocabulary.len() <= 6);
        prop_assert!(m.idf.iter().all(|&w| w > 0.0));
        let v = m.transform(&probe);
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        prop_assert!(norm == 0.0 || (norm - 1.0).abs() < 1e-12, "norm {}", norm);
    }

    #[test]
    fn folds_partition_and_balance(labels in prop::collection::vec(0u8..4, 10..120), k in 2usize..7, seed: u64) {
        prop_assume!(labels.len() >= k);
        let folds = stratified_kfold(&labels, k, seed).unwrap();
        prop_assert_eq!(folds.len(), k);
        let mut all: Vec<usize> = folds.iter().flatten().copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..labels.len()).collect::<Vec<_>>());
        for class in 0u8..4 {
            let counts: Vec<usize> = folds.iter()
                .map(|f| f.iter().filter(|&&i| labels[i] == class).count())
                .collect();
            let (lo, hi) = (counts.iter().min().unwrap(), counts.iter().max().unwrap());
            prop_assert!(hi - lo <= 1);
        }
        prop_assert_eq!(folds, stratified_kfold(&labels, k, seed).unwrap());
    }

    #[test]
    fn self_agreement(labels in prop::collection::vec(0u8..3, 2..50)) {
        let s = prf1(&labels, &labels, &labels[0]).unwrap();
        prop_assert_eq!((s.precision, s.recall, s.f1), (1.0, 1.0, 1.0));
        prop_assert_eq!(cohens_kappa(&labels, &labels).unwrap(), 1.0);
    }

    #[test]
    fn kappa_is_symmetric(a in prop::collection::vec(0u8..3, 1..40), seed: u64) {
        let mut r = rng::stream(seed, &[]);
        let b: Vec<u8> = a.iter().map(|_| r.gen_range(0..3)).collect();
        let k1 = cohens_kappa(&a, &b).unwrap();
        let k2 = cohens_kappa(&b, &a).unwrap();
        prop_assert!((k1 - k2).abs() < 1e-12);
    }
}
