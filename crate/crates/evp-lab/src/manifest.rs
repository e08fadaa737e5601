//! Reproducible experiment manifests: the resolved configuration, seeds,
//! input digests, and output digests for every run. Re-running a manifest's
//! command byte-identically reproduces the outputs (exact modes) or
//! reproduces the Monte Carlo numbers given the recorded seed.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ExperimentManifest {
    pub command: String,
    pub version: String,
    /// Resolved configuration snapshot.
    pub config: serde_json::Value,
    /// Digest of the serialized config; CSV headers carry its prefix.
    pub config_digest: String,
    pub seed: u64,
    /// RNG stream indices used, as `start..end` per parallel block.
    pub streams: Vec<String>,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    let out = h.finalize();
    let mut s = String::with_capacity(64);
    for b in out {
        s.push_str(&format!("{b:02x}"));
    }
    s
}

pub fn digest_file(path: &Path) -> Result<FileDigest> {
    let bytes =
        fs::read(path).with_context(|| format!("digesting {}", path.display()))?;
    Ok(FileDigest { path: path.display().to_string(), sha256: sha256_hex(&bytes) })
}

impl ExperimentManifest {
    pub fn new(command: &str, config: serde_json::Value, seed: u64) -> Self {
        let config_digest = sha256_hex(config.to_string().as_bytes());
        ExperimentManifest {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config,
            config_digest,
            seed,
            streams: Vec::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }

    /// Short digest for CSV headers.
    pub fn short_digest(&self) -> &str {
        &self.config_digest[..12]
    }

    pub fn record_input(&mut self, path: &Path) -> Result<()> {
        self.inputs.push(digest_file(path)?);
        Ok(())
    }

    pub fn record_output(&mut self, path: &Path) -> Result<()> {
        self.outputs.push(digest_file(path)?);
        Ok(())
    }

    pub fn record_streams(&mut self, range: core::ops::Range<u64>) {
        self.streams.push(format!("{}..{}", range.start, range.end));
    }

    /// Write `<out_dir>/<command>-manifest.json`.
    pub fn write(&self, out_dir: &Path) -> Result<PathBuf> {
        let path = out_dir.join(format!("{}-manifest.json", self.command));
        let json = serde_json::to_string_pretty(self)?;
        fs::write(&path, json)
            .with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}
