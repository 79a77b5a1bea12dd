// SPDX-License-Identifier: Apache-2.0

use gitteams_ml::MlError;
use thiserror::Error;

use crate::commitcls::CommitCategory;
use crate::teamstyle::TeamStyle;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: duplicate commit sha {sha}")]
    DuplicateSha { sha: String, line: usize },

    #[error("author key '{key}' matches both '{first}' and '{second}'")]
    AmbiguousAuthor { key: String, first: String, second: String },

    #[error("roster: {0}")]
    Roster(String),

    #[error("commit {sha} is not authored by either member of team {team}")]
    UnknownAuthor { sha: String, team: String },

    #[error("no training examples of category {0} survive the earlier cascade stages")]
    MissingCategory(CommitCategory),

    #[error("team {0}: insufficient activity")]
    InsufficientActivity(String),

    #[error("no training teams labeled {0}")]
    MissingStyle(TeamStyle),

    #[error("synthetic generation: {0}")]
    Generation(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Ml(#[from] MlError),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Whether the error stems from the input data rather than from the
    /// program or its environment.
    pub fn is_data_error(&self) -> bool {
        !matches!(self, Error::Io(_))
    }
}
