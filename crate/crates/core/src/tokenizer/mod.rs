//! Byte-level BPE: training, encoding, persistence, and token-count comparison.
//!
//! Ids 0-3 are the specials (pad, bos, eos, unk), ids 4-259 the 256 bytes,
//! and merge `i` produces id `260 + i`. A vocabulary size therefore counts the
//! specials, so a 32,000-token model carries 31,740 merges.

pub mod model;
pub mod pretokenize;
pub mod trainer;

use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus_io::Document;

pub use model::{Specials, TokenizerModel, BYTE_OFFSET, FIRST_MERGE_ID, NUM_SPECIALS};
pub use pretokenize::pretokenize;
pub use trainer::{train_bpe, train_bpe_with_workers, MIN_PAIR_FREQUENCY};

#[derive(Debug, Error)]
pub enum TokenizerError {
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("vocab size {0} leaves no room for merges (minimum 261)")]
    VocabTooSmall(usize),
    #[error("unknown token id {0}")]
    UnknownId(u32),
    #[error("decoded bytes are not valid UTF-8")]
    InvalidUtf8,
    #[error("model schema error: {0}")]
    Schema(String),
    #[error("io error on {0}: {1}")]
    Io(PathBuf, #[source] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompressionReport {
    pub tokens_a: u64,
    pub tokens_b: u64,
    /// `1 - tokens_a / tokens_b`: positive when `a` needs fewer tokens.
    pub reduction: f64,
}

impl CompressionReport {
    pub fn from_counts(tokens_a: u64, tokens_b: u64) -> Self {
        let reduction = if tokens_b == 0 {
            0.0
        } else {
            1.0 - tokens_a as f64 / tokens_b as f64
        };
        Self {
            tokens_a,
            tokens_b,
            reduction,
        }
    }
}

pub fn count_tokens(model: &TokenizerModel, corpus: &[Document]) -> u64 {
    corpus
        .par_iter()
        .map(|d| model.encode(&d.text).len() as u64)
        .sum()
}

pub fn compare_tokenizers(
    a: &TokenizerModel,
    b: &TokenizerModel,
    corpus: &[Document],
) -> Result<CompressionReport, TokenizerError> {
    if corpus.is_empty() {
        return Err(TokenizerError::EmptyCorpus);
    }
    Ok(CompressionReport::from_counts(
        count_tokens(a, corpus),
        count_tokens(b, corpus),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn headline_metric_arithmetic() {
        let r = CompressionReport::from_counts(57, 100);
        assert!((r.reduction - 0.43).abs() < 1e-12);
    }

    #[test]
    fn identical_models_have_zero_reduction() {
        let m = TokenizerModel::byte_level();
        let corpus = vec![Document::new(0, "sama sahaja")];
        assert_eq!(compare_tokenizers(&m, &m, &corpus).unwrap().reduction, 0.0);
        assert!(matches!(
            compare_tokenizers(&m, &m, &[]),
            Err(TokenizerError::EmptyCorpus)
        ));
    }
}
