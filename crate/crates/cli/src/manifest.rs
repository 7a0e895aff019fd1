//! Run manifests: the command, its config snapshot, input hashes, seed,
//! and expected artifacts. Written atomically before long-running work.
//! Deliberately timestamp-free so identical runs produce identical trees.

use serde::Serialize;
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

#[derive(Debug, Serialize)]
pub struct FileHash {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub tool_version: String,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config: Option<String>,
    pub inputs: Vec<FileHash>,
    pub artifacts: Vec<String>,
}

pub fn hash_file(path: &Path) -> anyhow::Result<FileHash> {
    let bytes = std::fs::read(path)?;
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    Ok(FileHash {
        path: path.display().to_string(),
        sha256: format!("{:x}", hasher.finalize()),
    })
}

impl RunManifest {
    pub fn write_atomic(&self, path: &Path) -> anyhow::Result<()> {
        let mut bytes = serde_json::to_vec_pretty(self)?;
        bytes.push(b'\n');
        let tmp: PathBuf = path.with_extension("tmp");
        std::fs::write(&tmp, &bytes)?;
        std::fs::rename(&tmp, path)?;
        Ok(())
    }
}
