//! Run manifests: a JSON record of what a command consumed and produced.
//!
//! Manifests carry input file names with content hashes, the full config
//! snapshot, effective parameters and the package version — but no
//! timestamps or absolute paths, so a rerun with identical inputs writes an
//! identical manifest.

use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::PipelineConfig;
use crate::error::CliError;

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub inputs: Vec<InputRecord>,
    pub parameters: serde_json::Value,
    pub outputs: Vec<String>,
    pub config: PipelineConfig,
}

#[derive(Debug, Serialize)]
pub struct InputRecord {
    pub name: String,
    pub sha256: String,
}

impl RunManifest {
    pub fn new(command: &str, config: &PipelineConfig) -> Self {
        RunManifest {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            inputs: Vec::new(),
            parameters: serde_json::json!({}),
            outputs: Vec::new(),
            config: config.clone(),
        }
    }

    pub fn add_input(&mut self, path: &Path) -> Result<(), CliError> {
        let bytes = std::fs::read(path)
            .map_err(|e| CliError::Data(format!("cannot hash {}: {e}", path.display())))?;
        let digest = Sha256::digest(&bytes);
        self.inputs.push(InputRecord {
            name: path
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_else(|| path.display().to_string()),
            sha256: format!("{digest:x}"),
        });
        Ok(())
    }

    pub fn set_parameters(&mut self, parameters: serde_json::Value) {
        self.parameters = parameters;
    }

    pub fn add_output(&mut self, name: &str) {
        self.outputs.push(name.to_string());
    }

    /// Write `run_manifest.json` into the output directory.
    pub fn write(&self, out_dir: &Path) -> Result<(), CliError> {
        let path = out_dir.join("run_manifest.json");
        let json = serde_json::to_string_pretty(self)
            .map_err(|e| CliError::Data(format!("manifest serialization: {e}")))?;
        std::fs::write(&path, json + "\n")?;
        Ok(())
    }
}
