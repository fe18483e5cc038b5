//! Run manifests: what was run, with which inputs, so it can be repeated.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use super::HarnessError;

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunManifest {
    pub command: String,
    pub seed: Option<u64>,
    pub config_hash: String,
    /// `(path, sha256)` of every input file.
    pub inputs: Vec<(PathBuf, String)>,
    pub outputs: Vec<PathBuf>,
}

impl RunManifest {
    pub fn new(command: impl Into<String>, config_text: &str, seed: Option<u64>) -> Self {
        Self {
            command: command.into(),
            seed,
            config_hash: sha256_hex(config_text.as_bytes()),
            ..Self::default()
        }
    }

    /// Records derived content (for example a parsed mesh) under `label`.
    pub fn add_content(&mut self, label: &str, bytes: &[u8]) {
        self.inputs.push((PathBuf::from(label), sha256_hex(bytes)));
    }

    pub fn add_input(&mut self, path: &Path) -> Result<(), HarnessError> {
        let bytes = std::fs::read(path).map_err(|e| HarnessError::io(path, e))?;
        self.inputs.push((path.to_path_buf(), sha256_hex(&bytes)));
        Ok(())
    }

    /// Combined digest over the config hash and all input hashes.
    pub fn content_hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.config_hash.as_bytes());
        for (_, d) in &self.inputs {
            h.update(d.as_bytes());
        }
        hex::encode(h.finalize())
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "version {}", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(s, "command {}", self.command);
        if let Some(seed) = self.seed {
            let _ = writeln!(s, "seed {seed}");
        }
        let _ = writeln!(s, "config {}", self.config_hash);
        for (p, d) in &self.inputs {
            let _ = writeln!(s, "input {d} {}", p.display());
        }
        for p in &self.outputs {
            let _ = writeln!(s, "output {}", p.display());
        }
        let _ = writeln!(s, "content {}", self.content_hash());
        s
    }

    pub fn save(&self, path: &Path) -> Result<(), HarnessError> {
        std::fs::write(path, self.to_text()).map_err(|e| HarnessError::io(path, e))
    }
}
