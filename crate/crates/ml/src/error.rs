// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

pub type Result<T, E = MlError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum MlError {
    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("empty vocabulary")]
    EmptyVocabulary,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unsupported model document: {0}")]
    Document(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
