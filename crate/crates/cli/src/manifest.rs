//! Run manifests: every subcommand writes exactly one `manifest.json` next
//! to its outputs, recording the command, its effective configuration, the
//! seed, input/output locators with content digests, and wall-clock bounds.
//! Re-running a command with the manifest's config and seed reproduces the
//! output digests (deterministic backends).

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::Serialize;

use dikt_core::hash::fnv1a64_hex;

#[derive(Debug, Serialize)]
pub struct ArtifactRef {
    pub path: String,
    /// FNV-1a 64 over the file bytes.
    pub digest: String,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config: serde_json::Value,
    pub seed: u64,
    pub inputs: Vec<ArtifactRef>,
    pub outputs: Vec<ArtifactRef>,
    pub started_at_ms: u64,
    pub finished_at_ms: u64,
}

pub struct ManifestBuilder {
    command: String,
    config: serde_json::Value,
    seed: u64,
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
    started_at_ms: u64,
}

fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .expect("clock after epoch")
        .as_millis() as u64
}

fn digest_file(path: &Path) -> Result<ArtifactRef> {
    let bytes = std::fs::read(path).with_context(|| format!("digest {}", path.display()))?;
    Ok(ArtifactRef {
        path: path.display().to_string(),
        digest: format!("fnv1a64:{}", fnv1a64_hex(&bytes)),
    })
}

impl ManifestBuilder {
    pub fn new(command: &str, config: serde_json::Value, seed: u64) -> ManifestBuilder {
        ManifestBuilder {
            command: command.to_string(),
            config,
            seed,
            inputs: Vec::new(),
            outputs: Vec::new(),
            started_at_ms: now_ms(),
        }
    }

    pub fn input(&mut self, path: &Path) -> &mut Self {
        self.inputs.push(path.to_path_buf());
        self
    }

    pub fn output(&mut self, path: &Path) -> &mut Self {
        self.outputs.push(path.to_path_buf());
        self
    }

    /// Digest all artifacts and write `manifest.json` into `dir`.
    pub fn write(self, dir: &Path) -> Result<PathBuf> {
        let manifest = RunManifest {
            command: self.command,
            config: self.config,
            seed: self.seed,
            inputs: self
                .inputs
                .iter()
                .map(|p| digest_file(p))
                .collect::<Result<_>>()?,
            outputs: self
                .outputs
                .iter()
                .map(|p| digest_file(p))
                .collect::<Result<_>>()?,
            started_at_ms: self.started_at_ms,
            finished_at_ms: now_ms(),
        };
        let path = dir.join("manifest.json");
        let text = serde_json::to_string_pretty(&manifest).context("serialize manifest")?;
        std::fs::write(&path, text + "\n").with_context(|| format!("write {}", path.display()))?;
        Ok(path)
    }
}
