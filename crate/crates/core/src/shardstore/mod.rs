//! Packed, digest-verified token shards.
//!
//! Documents are tokenized and packed into fixed-context rows per split,
//! each split becomes one binary shard, and a manifest indexes the shards.
//! Readers verify each shard's sha1 payload digest on first touch.

pub mod convert;
pub mod format;
pub mod manifest;
pub mod pack;
pub mod reader;
pub mod shuffle;

use std::path::{Path, PathBuf};

use thiserror::Error;

pub use convert::{convert_splits, shard_name_for, SplitConversion};
pub use format::{
    read_shard_bytes, shard_meta_from_file, write_shard, ShardHeader, ShardMeta, HEADER_LEN, MAGIC,
    SHARD_EXTENSION, SHARD_FORMAT_VERSION, TOKEN_WIDTH,
};
pub use manifest::{merge_manifests, ShardManifest, MANIFEST_VERSION};
pub use pack::{pack_tokens, PackedSamples};
pub use reader::{open_dataset, DatasetReader};
pub use shuffle::shuffled_order;

#[derive(Debug, Error)]
pub enum ShardError {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("token id {0} does not fit in 16 bits")]
    TokenOverflow(u32),
    #[error("context length {0} is below 2")]
    ContextTooShort(usize),
    #[error("bad shard header: {0}")]
    BadHeader(String),
    #[error("bad manifest: {0}")]
    Manifest(String),
    #[error("no shards to merge")]
    EmptyManifest,
    #[error("shard {path} has geometry {found:?}, expected {expected:?} (context, width)")]
    MixedGeometry {
        path: String,
        expected: (u32, u32),
        found: (u32, u32),
    },
    #[error("duplicate shard path {0}")]
    DuplicatePath(String),
    #[error("integrity check failed for {shard}: expected sha1 {expected}, got {actual}")]
    Integrity {
        shard: String,
        expected: String,
        actual: String,
    },
    #[error("shard unreadable: {0}")]
    Corrupt(String),
    #[error("sample index {index} out of range (total {total})")]
    IndexOutOfRange { index: u64, total: u64 },
    #[error("split {index}: {source}")]
    Split {
        index: usize,
        #[source]
        source: Box<ShardError>,
    },
    #[error(transparent)]
    Corpus(#[from] crate::corpus_io::CorpusError),
}

impl ShardError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        ShardError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}
