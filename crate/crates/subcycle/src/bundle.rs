//! In-memory artifact bundles and their on-disk form.
//!
//! Everything a run produces is collected here first and written only after
//! the computation succeeded, so a failed run never leaves a partial bundle.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::error::{AppError, AppResult};

pub const MANIFEST: &str = "manifest.json";

/// File name to contents, ordered so that serialisation is deterministic.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Bundle {
    pub files: BTreeMap<String, Vec<u8>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub name: String,
    pub bytes: usize,
    pub sha256: String,
}

/// Config echo, code version, seed and a digest of every file. No timestamps,
/// so identical runs give identical manifests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub scenario: String,
    pub seed: u64,
    pub config: ExperimentConfig,
    pub files: Vec<FileEntry>,
}

pub fn sha256_hex(data: &[u8]) -> String {
    Sha256::digest(data).iter().map(|b| format!("{b:02x}")).collect()
}

impl Bundle {
    pub fn insert(&mut self, name: impl Into<String>, data: impl Into<Vec<u8>>) {
        self.files.insert(name.into(), data.into());
    }

    pub fn text(&self, name: &str) -> Option<&str> {
        self.files.get(name).and_then(|d| std::str::from_utf8(d).ok())
    }

    /// Adds the manifest describing the current files.
    pub fn seal(&mut self, config: &ExperimentConfig) {
        let files = self
            .files
            .iter()
            .filter(|(n, _)| n.as_str() != MANIFEST)
            .map(|(name, data)| FileEntry { name: name.clone(), bytes: data.len(), sha256: sha256_hex(data) })
            .collect();
        let m = Manifest {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            scenario: config.scenario.name().into(),
            seed: config.seed,
            config: config.clone(),
            files,
        };
        let mut text = serde_json::to_string_pretty(&m).expect("manifest serialises");
        text.push('\n');
        self.insert(MANIFEST, text);
    }

    pub fn manifest(&self) -> AppResult<Manifest> {
        let text = self.text(MANIFEST).ok_or_else(|| AppError::MissingArtifact(MANIFEST.into()))?;
        serde_json::from_str(text)
            .map_err(|e| AppError::MalformedArtifact { path: MANIFEST.into(), reason: e.to_string() })
    }

    pub fn write_to(&self, dir: &Path) -> AppResult<()> {
        std::fs::create_dir_all(dir).map_err(|e| AppError::io(dir, e))?;
        for (name, data) in &self.files {
            let p = dir.join(name);
            std::fs::write(&p, data).map_err(|e| AppError::io(&p, e))?;
        }
        Ok(())
    }

    /// Reads the files listed in the manifest of `dir`.
    pub fn read_from(dir: &Path) -> AppResult<Self> {
        let mp = dir.join(MANIFEST);
        if !mp.is_file() {
            return Err(AppError::MissingArtifact(mp));
        }
        let mut b = Bundle::default();
        let text = std::fs::read(&mp).map_err(|e| AppError::io(&mp, e))?;
        b.insert(MANIFEST, text);
        for f in b.manifest()?.files {
            let p = dir.join(&f.name);
            if !p.is_file() {
                return Err(AppError::MissingArtifact(p));
            }
            let data = std::fs::read(&p).map_err(|e| AppError::io(&p, e))?;
            b.insert(f.name, data);
        }
        Ok(b)
    }
}
