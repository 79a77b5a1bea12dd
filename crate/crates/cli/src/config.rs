// SPDX-License-Identifier: Apache-2.0

//! Optional run configuration file (TOML or JSON). Command-line flags
//! override the file, which overrides the built-in defaults.

use std::path::Path;

use gitteams_core::commitcls::CascadeConfig;
use gitteams_core::synthgen::GenConfig;
use gitteams_core::teamstyle::{OracleConfig, TeamModelConfig};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const DEFAULT_SEED: u64 = 7;
pub const DEFAULT_FOLDS: usize = 5;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub folds: Option<usize>,
    pub cascade: CascadeConfig,
    pub oracle: OracleConfig,
    pub team: TeamModelConfig,
    pub synth: GenConfig,
}

impl FileConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::input(path, e))?;
        let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
        if is_json {
            serde_json::from_str(&text).map_err(|e| CliError::input(path, e))
        } else {
            toml::from_str(&text).map_err(|e| CliError::input(path, e))
        }
    }
}
