// SPDX-License-Identifier: Apache-2.0

//! Versioned JSON envelope shared by every serialized model.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{MlError, Result};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument<T> {
    pub format_version: u32,
    pub kind: String,
    pub model: T,
}

impl<T: Serialize + DeserializeOwned> ModelDocument<T> {
    pub fn new(kind: impl Into<String>, model: T) -> Self {
        Self { format_version: FORMAT_VERSION, kind: kind.into(), model }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Parses a document and checks its version and kind.
    pub fn from_json(text: &str, expected_kind: &str) -> Result<Self> {
        let doc: Self = serde_json::from_str(text)?;
        if doc.format_version != FORMAT_VERSION {
            return Err(MlError::Document(format!(
                "format version {} (expected {FORMAT_VERSION})",
                doc.format_version
            )));
        }
        if doc.kind != expected_kind {
            return Err(MlError::Document(format!(
                "kind '{}' (expected '{expected_kind}')",
                doc.kind
            )));
        }
        Ok(doc)
    }
}
