// SPDX-License-Identifier: Apache-2.0

//! Statistical machinery for the commit and team-style classifiers.
//!
//! Everything here is deterministic: models are pure functions of their
//! inputs, hyperparameters and a single `u64` seed, and all fitted models
//! serialize to versioned JSON that reloads to bit-identical predictions.

pub mod cv;
pub mod error;
pub mod forest;
pub mod kappa;
pub mod logistic;
pub mod metrics;
pub mod persist;
pub mod rfe;
pub mod rng;
pub mod standardize;
pub mod tfidf;

pub use cv::stratified_kfold;
pub use error::{MlError, Result};
pub use forest::{ForestModel, ForestParams};
pub use kappa::cohens_kappa;
pub use logistic::{LogisticModel, LogisticParams};
pub use metrics::{prf1, BinaryScores, EvalReport};
pub use persist::ModelDocument;
pub use rfe::{rfe_select, rfe_select_cold};
pub use standardize::Standardizer;
pub use tfidf::TfidfModel;
