//! Reproducible run manifests: identical inputs and tool version give a
//! byte-identical file.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};
use staticarb::TolerancePolicy;

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    /// Path as given on the command line → SHA-256 of the file contents.
    pub inputs: BTreeMap<String, String>,
    pub tolerance: TolerancePolicy,
    pub exit_code: i32,
    pub summary: Value,
}

pub fn digest(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

impl RunManifest {
    pub fn new(
        command: &str,
        inputs: &[&Path],
        tolerance: TolerancePolicy,
        exit_code: i32,
        summary: Value,
    ) -> Result<Self> {
        let inputs = inputs
            .iter()
            .map(|p| Ok((p.display().to_string(), digest(p)?)))
            .collect::<Result<_>>()?;
        Ok(Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            inputs,
            tolerance,
            exit_code,
            summary,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(path, text).with_context(|| format!("writing manifest {}", path.display()))
    }
}
