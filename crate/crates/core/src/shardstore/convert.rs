use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::format::{write_shard, ShardMeta, SHARD_EXTENSION};
use super::pack::pack_tokens;
use super::ShardError;
use crate::corpus_io::read_jsonl;
use crate::parallel::with_workers;
use crate::tokenizer::TokenizerModel;

/// Result of converting one split file into one shard.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitConversion {
    pub split: String,
    pub meta: ShardMeta,
    pub docs: u64,
    /// Document tokens, excluding the appended EOS markers.
    pub tokens: u64,
    pub dropped_tail: u64,
}

impl SplitConversion {
    /// Tokens that entered packing: document tokens plus one EOS per document.
    pub fn stream_tokens(&self) -> u64 {
        self.tokens + self.docs
    }
}

/// `<stem>.split-<i>.mlsd` for the split at `split_path`.
pub fn shard_name_for(split_path: &Path) -> String {
    let stem = split_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "split".into());
    format!("{stem}.{SHARD_EXTENSION}")
}

fn convert_one(
    split_path: &Path,
    tokenizer: &TokenizerModel,
    context_length: usize,
    out_dir: &Path,
) -> Result<SplitConversion, ShardError> {
    let docs = read_jsonl(split_path)?;
    let encoded: Vec<Vec<u32>> = docs.iter().map(|d| tokenizer.encode(&d.text)).collect();
    let tokens = encoded.iter().map(|e| e.len() as u64).sum();
    let packed = pack_tokens(&encoded, context_length, tokenizer.specials().eos);
    let meta = write_shard(&packed, out_dir.join(shard_name_for(split_path)))?;
    Ok(SplitConversion {
        split: split_path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default(),
        meta,
        docs: docs.len() as u64,
        tokens,
        dropped_tail: packed.dropped_tail as u64,
    })
}

/// Tokenize, pack, and write each split independently.
///
/// Tails are dropped per split. Results come back in split order whatever
/// the worker count.
pub fn convert_splits(
    split_paths: &[PathBuf],
    tokenizer: &TokenizerModel,
    context_length: usize,
    out_dir: impl AsRef<Path>,
    workers: usize,
) -> Result<Vec<SplitConversion>, ShardError> {
    if context_length < 2 {
        return Err(ShardError::ContextTooShort(context_length));
    }
    let out_dir = out_dir.as_ref();
    std::fs::create_dir_all(out_dir).map_err(|e| ShardError::io(out_dir, e))?;
    with_workers(workers, || {
        split_paths
            .par_iter()
            .enumerate()
            .map(|(index, p)| {
                convert_one(p, tokenizer, context_length, out_dir).map_err(|source| ShardError::Split {
                    index,
                    source: Box::new(source),
                })
            })
            .collect()
    })
}
