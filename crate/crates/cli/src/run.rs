// SPDX-License-Identifier: Apache-2.0

//! Input/output bookkeeping for one invocation and its manifest.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::args::{Command, GlobalOpts};
use crate::config::FileConfig;
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Serialize)]
struct FileDigest {
    path: String,
    sha256: String,
}

fn digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Default)]
pub struct Run {
    inputs: Vec<FileDigest>,
    outputs: Vec<(PathBuf, String)>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a Command,
    seed: u64,
    format: crate::args::Format,
    config: &'a FileConfig,
    registry_version: u32,
    model_format_version: u32,
    inputs: &'a [FileDigest],
    outputs: Vec<FileDigest>,
}

impl Run {
    /// Reads an input file; failures are data errors.
    pub fn read(&mut self, path: &Path) -> CliResult<String> {
        let bytes = fs::read(path).map_err(|e| CliError::input(path, e))?;
        self.inputs.push(FileDigest { path: path.display().to_string(), sha256: digest(&bytes) });
        String::from_utf8(bytes).map_err(|e| CliError::input(path, e))
    }

    pub fn write(&mut self, path: &Path, bytes: &[u8]) -> CliResult<()> {
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(parent)?;
        }
        fs::write(path, bytes)?;
        self.outputs.push((path.to_path_buf(), digest(bytes)));
        Ok(())
    }

    /// Registers a file some other code already wrote.
    pub fn record(&mut self, path: &Path) -> CliResult<()> {
        let bytes = fs::read(path)?;
        self.outputs.push((path.to_path_buf(), digest(&bytes)));
        Ok(())
    }

    pub fn has_outputs(&self) -> bool {
        !self.outputs.is_empty()
    }

    /// Writes `<stem>.manifest.json` into `dir`. Output paths inside
    /// `dir` are recorded relative to it, so reruns into another directory
    /// produce the same manifest.
    pub fn finish(
        self,
        dir: &Path,
        stem: &str,
        command: &Command,
        global: &GlobalOpts,
        seed: u64,
        config: &FileConfig,
    ) -> CliResult<()> {
        let outputs = self
            .outputs
            .iter()
            .map(|(p, sha256)| FileDigest {
                path: p.strip_prefix(dir).unwrap_or(p).display().to_string(),
                sha256: sha256.clone(),
            })
            .collect();
        let manifest = Manifest {
            tool: "gitteams",
            version: env!("CARGO_PKG_VERSION"),
            command,
            seed,
            format: global.format,
            config,
            registry_version: gitteams_core::teamfeat::REGISTRY_VERSION,
            model_format_version: gitteams_ml::persist::FORMAT_VERSION,
            inputs: &self.inputs,
            outputs,
        };
        fs::create_dir_all(dir)?;
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        fs::write(dir.join(format!("{stem}.manifest.json")), text)?;
        Ok(())
    }
}
