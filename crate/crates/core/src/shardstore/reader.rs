use std::path::{Path, PathBuf};
use std::sync::{Arc, OnceLock};

use super::format::{decode_row, read_shard_bytes, sha1_hex};
use super::manifest::ShardManifest;
use super::ShardError;

#[derive(Debug, Clone)]
enum LoadFailure {
    Integrity { shard: String, expected: String, actual: String },
    Other(String),
}

impl From<LoadFailure> for ShardError {
    fn from(f: LoadFailure) -> Self {
        match f {
            LoadFailure::Integrity { shard, expected, actual } => ShardError::Integrity { shard, expected, actual },
            LoadFailure::Other(msg) => ShardError::Corrupt(msg),
        }
    }
}

/// Random access over the samples of a manifest.
///
/// Each shard is loaded and digest-checked once, on first access; concurrent
/// first accesses block on the same load. Later reads are served from memory
/// without re-verification.
#[derive(Debug)]
pub struct DatasetReader {
    manifest: ShardManifest,
    paths: Vec<PathBuf>,
    /// Exclusive end of each shard's global index range.
    ends: Vec<u64>,
    payloads: Vec<OnceLock<Result<Arc<Vec<u8>>, LoadFailure>>>,
}

pub fn open_dataset(manifest_path: impl AsRef<Path>) -> Result<DatasetReader, ShardError> {
    let manifest_path = manifest_path.as_ref();
    let manifest = ShardManifest::load(manifest_path)?;
    let paths = manifest.shard_paths(manifest_path);
    let ends = manifest
        .shards
        .iter()
        .scan(0u64, |acc, s| {
            *acc += s.num_samples;
            Some(*acc)
        })
        .collect();
    let payloads = manifest.shards.iter().map(|_| OnceLock::new()).collect();
    Ok(DatasetReader {
        manifest,
        paths,
        ends,
        payloads,
    })
}

impl DatasetReader {
    pub fn manifest(&self) -> &ShardManifest {
        &self.manifest
    }

    pub fn len(&self) -> u64 {
        self.manifest.total_samples
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn context_length(&self) -> usize {
        self.manifest.context_length as usize
    }

    /// Map a global sample index to (shard, local index).
    pub fn locate(&self, index: u64) -> Result<(usize, u64), ShardError> {
        if index >= self.len() {
            return Err(ShardError::IndexOutOfRange { index, total: self.len() });
        }
        let shard = self.ends.partition_point(|&end| end <= index);
        let start = if shard == 0 { 0 } else { self.ends[shard - 1] };
        Ok((shard, index - start))
    }

    fn payload(&self, shard: usize) -> Result<Arc<Vec<u8>>, ShardError> {
        self.payloads[shard]
            .get_or_init(|| self.load_verified(shard))
            .clone()
            .map_err(Into::into)
    }

    fn load_verified(&self, shard: usize) -> Result<Arc<Vec<u8>>, LoadFailure> {
        let meta = &self.manifest.shards[shard];
        let (header, payload) =
            read_shard_bytes(&self.paths[shard]).map_err(|e| LoadFailure::Other(e.to_string()))?;
        if header.context_length != self.manifest.context_length || header.num_samples != meta.num_samples {
            return Err(LoadFailure::Other(format!(
                "{}: header geometry ({} samples x {}) disagrees with manifest ({} x {})",
                meta.path, header.num_samples, header.context_length, meta.num_samples, self.manifest.context_length
            )));
        }
        let actual = sha1_hex(&payload);
        if actual != meta.digest_hex {
            return Err(LoadFailure::Integrity {
                shard: meta.path.clone(),
                expected: meta.digest_hex.clone(),
                actual,
            });
        }
        Ok(Arc::new(payload))
    }

    pub fn read_sample(&self, index: u64) -> Result<Vec<u32>, ShardError> {
        let (shard, local) = self.locate(index)?;
        let payload = self.payload(shard)?;
        Ok(decode_row(&payload, self.context_length(), local as usize))
    }

    /// Force verification of every shard.
    pub fn verify_all(&self) -> Result<(), ShardError> {
        (0..self.payloads.len()).try_for_each(|s| self.payload(s).map(|_| ()))
    }
}
