// SPDX-License-Identifier: Apache-2.0

//! Mining student team work styles from git histories.
//!
//! The pipeline runs in two stages. Commit messages are first sorted into
//! project-part categories by a cascade of keyword rules and TF-IDF logistic
//! classifiers ([`commitcls`]). Per-team contribution features are then
//! computed from the labeled commits ([`teamfeat`]) and used to predict
//! whether a pair worked collaboratively, cooperatively, or left the work to
//! one member ([`teamstyle`]).

pub mod commitcls;
pub mod error;
pub mod ingest;
pub mod synthgen;
pub mod teamfeat;
pub mod teamstyle;
pub mod textnorm;

pub use commitcls::{CascadeConfig, CascadeModel, CommitCategory, LabeledCommit};
pub use error::{Error, Result};
pub use ingest::{CommitRecord, FileStat, RosterMember, TeamRecord};
pub use teamfeat::{PartScope, TeamFeatureVector, UserOrdering};
pub use teamstyle::{TeamStyle, TeamStyleModel};
pub use textnorm::{Lexicon, TokenStream};
