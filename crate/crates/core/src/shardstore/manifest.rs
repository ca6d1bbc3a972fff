use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::format::{ShardMeta, TOKEN_WIDTH};
use super::ShardError;

pub const MANIFEST_VERSION: u32 = 1;

/// Index over a set of shards sharing one geometry.
///
/// Shard paths are relative to the directory holding the manifest file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShardManifest {
    pub version: u32,
    pub context_length: u32,
    pub token_width: u32,
    pub shards: Vec<ShardMeta>,
    pub total_samples: u64,
}

impl ShardManifest {
    /// Validate and order metas into a manifest without touching disk.
    pub fn from_metas(mut metas: Vec<ShardMeta>) -> Result<Self, ShardError> {
        let first = metas.first().ok_or(ShardError::EmptyManifest)?;
        let (context_length, token_width) = (first.context_length, first.token_width);
        for m in &metas {
            if m.context_length != context_length || m.token_width != token_width {
                return Err(ShardError::MixedGeometry {
                    path: m.path.clone(),
                    expected: (context_length, token_width),
                    found: (m.context_length, m.token_width),
                });
            }
        }
        metas.sort_by(|a, b| a.path.cmp(&b.path));
        let mut seen = HashSet::new();
        for m in &metas {
            if !seen.insert(m.path.as_str()) {
                return Err(ShardError::DuplicatePath(m.path.clone()));
            }
        }
        let total_samples = metas.iter().map(|m| m.num_samples).sum();
        Ok(Self {
            version: MANIFEST_VERSION,
            context_length,
            token_width,
            shards: metas,
            total_samples,
        })
    }

    pub fn total_tokens(&self) -> u64 {
        self.total_samples * self.context_length as u64
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ShardError> {
        let path = path.as_ref();
        let mut json = serde_json::to_string_pretty(self).map_err(|e| ShardError::Manifest(e.to_string()))?;
        json.push('\n');
        fs::write(path, json).map_err(|e| ShardError::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ShardError> {
        let path = path.as_ref();
        let raw = fs::read_to_string(path).map_err(|e| ShardError::io(path, e))?;
        let mut m: Self = serde_json::from_str(&raw).map_err(|e| ShardError::Manifest(e.to_string()))?;
        if m.version != MANIFEST_VERSION {
            return Err(ShardError::Manifest(format!("unsupported manifest version {}", m.version)));
        }
        if m.token_width != TOKEN_WIDTH {
            return Err(ShardError::Manifest(format!("unsupported token width {}", m.token_width)));
        }
        for s in &mut m.shards {
            s.context_length = m.context_length;
            s.token_width = m.token_width;
        }
        let sum: u64 = m.shards.iter().map(|s| s.num_samples).sum();
        if sum != m.total_samples {
            return Err(ShardError::Manifest(format!(
                "total_samples {} disagrees with shard sum {sum}",
                m.total_samples
            )));
        }
        if m.shards.windows(2).any(|w| w[0].path >= w[1].path) {
            return Err(ShardError::Manifest("shard paths not strictly ascending".into()));
        }
        Ok(m)
    }

    /// Absolute location of each shard given the manifest's own path.
    pub fn shard_paths(&self, manifest_path: impl AsRef<Path>) -> Vec<PathBuf> {
        let root = manifest_path.as_ref().parent().unwrap_or(Path::new("."));
        self.shards.iter().map(|s| root.join(&s.path)).collect()
    }
}

/// Sort, check, total, and write a manifest to `out_path`.
pub fn merge_manifests(metas: Vec<ShardMeta>, out_path: impl AsRef<Path>) -> Result<ShardManifest, ShardError> {
    let manifest = ShardManifest::from_metas(metas)?;
    manifest.save(out_path)?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn meta(path: &str, n: u64, ctx: u32) -> ShardMeta {
        ShardMeta {
            path: path.into(),
            num_samples: n,
            payload_bytes: n * ctx as u64 * 2,
            digest_hex: "00".into(),
            context_length: ctx,
            token_width: 2,
        }
    }

    #[test]
    fn totals_and_ordering() {
        let m = ShardManifest::from_metas(vec![meta("b", 20, 4096), meta("a", 10, 4096)]).unwrap();
        assert_eq!(m.total_samples, 30);
        assert_eq!(m.shards[0].path, "a");
    }

    #[test]
    fn single_meta_wraps() {
        let m = ShardManifest::from_metas(vec![meta("only", 5, 16)]).unwrap();
        assert_eq!(m.shards.len(), 1);
        assert_eq!(m.total_samples, 5);
        assert_eq!(m.context_length, 16);
    }

    #[test]
    fn mixed_geometry_and_duplicates() {
        assert!(matches!(
            ShardManifest::from_metas(vec![meta("a", 1, 4096), meta("b", 1, 2048)]),
            Err(ShardError::MixedGeometry { .. })
        ));
        assert!(matches!(
            ShardManifest::from_metas(vec![meta("a", 1, 8), meta("a", 2, 8)]),
            Err(ShardError::DuplicatePath(_))
        ));
        assert!(matches!(ShardManifest::from_metas(vec![]), Err(ShardError::EmptyManifest)));
    }

    #[test]
    fn save_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("manifest.json");
        let m = merge_manifests(vec![meta("x", 3, 8), meta("y", 4, 8)], &path).unwrap();
        assert_eq!(ShardManifest::load(&path).unwrap(), m);
        let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
        let keys: Vec<_> = json["shards"][0].as_object().unwrap().keys().cloned().collect();
        assert_eq!(keys.len(), 4);
    }

    #[test]
    fn tampered_total_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("manifest.json");
        merge_manifests(vec![meta("x", 3, 8)], &path).unwrap();
        let raw = fs::read_to_string(&path).unwrap().replace("\"total_samples\": 3", "\"total_samples\": 4");
        fs::write(&path, raw).unwrap();
        assert!(matches!(ShardManifest::load(&path), Err(ShardError::Manifest(_))));
    }
}
