//! Checkpoint format: one file holding a single-line JSON manifest
//! (version, per-parameter name/shape/byte-offset/dtype) terminated by a
//! newline, followed by the raw little-endian f32 payload concatenated in
//! manifest order. Byte-exact round trips are part of the contract.

use crate::error::{CoreError, Result};
use crate::nn::store::ParameterStore;
use crate::nn::tensor::Tensor;
use serde::{Deserialize, Serialize};
use std::fs;
use std::io::Write;
use std::path::Path;

pub const CHECKPOINT_VERSION: &str = "tqr-ckpt-1";

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    version: String,
    params: Vec<ManifestParam>,
    data_len: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct ManifestParam {
    name: String,
    shape: Vec<usize>,
    offset: usize,
    dtype: String,
}

pub fn save_checkpoint(store: &ParameterStore<f32>, path: &Path) -> Result<()> {
    let mut params = Vec::new();
    let mut offset = 0usize;
    for e in store.iter() {
        params.push(ManifestParam {
            name: e.name.clone(),
            shape: e.value.shape().to_vec(),
            offset,
            dtype: "f32".to_string(),
        });
        offset += e.value.len() * 4;
    }
    let manifest = Manifest {
        version: CHECKPOINT_VERSION.to_string(),
        params,
        data_len: offset,
    };
    let mut bytes = serde_json::to_vec(&manifest)?;
    bytes.push(b'\n');
    for e in store.iter() {
        for v in e.value.data() {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
    }
    let tmp = path.with_extension("tmp");
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(&bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<ParameterStore<f32>> {
    let bytes = fs::read(path)?;
    let newline = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| CoreError::CheckpointMalformed("missing manifest line".into()))?;
    let manifest: Manifest = serde_json::from_slice(&bytes[..newline])
        .map_err(|e| CoreError::CheckpointMalformed(format!("manifest: {e}")))?;
    if manifest.version != CHECKPOINT_VERSION {
        return Err(CoreError::CheckpointVersion {
            expected: CHECKPOINT_VERSION.to_string(),
            found: manifest.version,
        });
    }
    let data = &bytes[newline + 1..];
    if data.len() != manifest.data_len {
        return Err(CoreError::CheckpointMalformed(format!(
            "payload is {} bytes, manifest says {}",
            data.len(),
            manifest.data_len
        )));
    }
    let mut store = ParameterStore::new();
    for p in &manifest.params {
        if p.dtype != "f32" {
            return Err(CoreError::CheckpointCorrupt {
                param: p.name.clone(),
                detail: format!("unsupported dtype '{}'", p.dtype),
            });
        }
        let count: usize = p.shape.iter().product();
        let end = p.offset + count * 4;
        if end > data.len() {
            return Err(CoreError::CheckpointCorrupt {
                param: p.name.clone(),
                detail: format!(
                    "shape {:?} needs bytes {}..{} but payload has {}",
                    p.shape,
                    p.offset,
                    end,
                    data.len()
                ),
            });
        }
        let mut values = Vec::with_capacity(count);
        for chunk in data[p.offset..end].chunks_exact(4) {
            values.push(f32::from_le_bytes([chunk[0], chunk[1], chunk[2], chunk[3]]));
        }
        let tensor = Tensor::new(p.shape.clone(), values).map_err(|e| {
            CoreError::CheckpointCorrupt {
                param: p.name.clone(),
                detail: e.to_string(),
            }
        })?;
        store.register(&p.name, tensor)?;
    }
    Ok(store)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_store() -> ParameterStore<f32> {
        let mut s = ParameterStore::new();
        s.register("b.vec", Tensor::vector(vec![1.5, -2.25, 0.0]))
            .unwrap();
        s.register(
            "a.mat",
            Tensor::new(vec![2, 2], vec![0.1, 0.2, 0.3, 0.4]).unwrap(),
        )
        .unwrap();
        s
    }

    #[test]
    fn save_load_save_is_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        let p1 = dir.path().join("a.ckpt");
        let p2 = dir.path().join("b.ckpt");
        let store = sample_store();
        save_checkpoint(&store, &p1).unwrap();
        let loaded = load_checkpoint(&p1).unwrap();
        save_checkpoint(&loaded, &p2).unwrap();
        assert_eq!(fs::read(&p1).unwrap(), fs::read(&p2).unwrap());
    }

    /// Rewrite only the manifest line, leaving the binary payload intact.
    fn patch_manifest(path: &Path, from: &str, to: &str) {
        let bytes = fs::read(path).unwrap();
        let newline = bytes.iter().position(|&b| b == b'\n').unwrap();
        let manifest = String::from_utf8(bytes[..newline].to_vec())
            .unwrap()
            .replace(from, to);
        let mut out = manifest.into_bytes();
        out.extend_from_slice(&bytes[newline..]);
        fs::write(path, out).unwrap();
    }

    #[test]
    fn version_mismatch_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.ckpt");
        save_checkpoint(&sample_store(), &p).unwrap();
        patch_manifest(&p, "tqr-ckpt-1", "tqr-ckpt-9");
        assert!(matches!(
            load_checkpoint(&p),
            Err(CoreError::CheckpointVersion { .. })
        ));
    }

    #[test]
    fn corrupted_shape_names_parameter() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.ckpt");
        save_checkpoint(&sample_store(), &p).unwrap();
        patch_manifest(&p, "[2,2]", "[9,9]");
        let err = load_checkpoint(&p).unwrap_err();
        assert!(err.to_string().contains("a.mat"), "{err}");
    }

    #[test]
    fn truncated_payload_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.ckpt");
        save_checkpoint(&sample_store(), &p).unwrap();
        let mut bytes = fs::read(&p).unwrap();
        bytes.truncate(bytes.len() - 3);
        fs::write(&p, bytes).unwrap();
        assert!(load_checkpoint(&p).is_err());
    }
}
