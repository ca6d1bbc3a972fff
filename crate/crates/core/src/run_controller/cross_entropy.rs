use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ControllerError;

/// A causal language model reduced to what cross-entropy needs:
/// `P(next | prefix)`.
pub trait NextTokenModel: Sync {
    fn vocab_size(&self) -> usize;
    fn prob(&self, prefix: &[u32], next: u32) -> f64;
}

/// Token ids `x_1..x_T`, validated against a vocabulary size.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenSequence {
    ids: Vec<u32>,
}

impl TokenSequence {
    pub fn new(ids: Vec<u32>, vocab_size: usize) -> Result<Self, ControllerError> {
        if ids.is_empty() {
            return Err(ControllerError::EmptySequence);
        }
        if let Some(&bad) = ids.iter().find(|&&id| id as usize >= vocab_size) {
            return Err(ControllerError::TokenOutOfVocab { id: bad, vocab_size });
        }
        Ok(Self { ids })
    }

    pub fn ids(&self) -> &[u32] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossEntropy {
    pub nats_per_token: f64,
    pub perplexity: f64,
    pub tokens: usize,
}

fn total_nll<M: NextTokenModel + ?Sized>(model: &M, ids: &[u32]) -> Result<f64, ControllerError> {
    let mut nll = 0.0;
    for t in 0..ids.len() {
        let p = model.prob(&ids[..t], ids[t]);
        if !(p > 0.0 && p <= 1.0) {
            return Err(ControllerError::InvalidDistribution { position: t, prob: p });
        }
        nll -= p.ln();
    }
    Ok(nll)
}

/// Mean negative log-likelihood per token under the causal factorization.
pub fn cross_entropy<M: NextTokenModel + ?Sized>(
    model: &M,
    seq: &TokenSequence,
) -> Result<CrossEntropy, ControllerError> {
    let ce = total_nll(model, seq.ids())? / seq.len() as f64;
    Ok(CrossEntropy {
        nats_per_token: ce,
        perplexity: ce.exp(),
        tokens: seq.len(),
    })
}

/// Token-weighted cross-entropy over many sequences, evaluated in parallel.
pub fn corpus_cross_entropy<M: NextTokenModel + ?Sized>(
    model: &M,
    seqs: &[TokenSequence],
) -> Result<CrossEntropy, ControllerError> {
    if seqs.is_empty() {
        return Err(ControllerError::EmptySequence);
    }
    let parts: Vec<f64> = seqs
        .par_iter()
        .map(|s| total_nll(model, s.ids()))
        .collect::<Result<_, _>>()?;
    let tokens: usize = seqs.iter().map(TokenSequence::len).sum();
    let ce = parts.iter().sum::<f64>() / tokens as f64;
    Ok(CrossEntropy {
        nats_per_token: ce,
        perplexity: ce.exp(),
        tokens,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct UniformModel {
    pub vocab_size: usize,
}

impl NextTokenModel for UniformModel {
    fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    fn prob(&self, _prefix: &[u32], _next: u32) -> f64 {
        1.0 / self.vocab_size as f64
    }
}

/// Context-free model from token frequencies.
#[derive(Debug, Clone)]
pub struct UnigramModel {
    probs: Vec<f64>,
}

impl UnigramModel {
    pub fn from_counts(counts: &[u64]) -> Self {
        let total: u64 = counts.iter().sum();
        Self {
            probs: counts.iter().map(|&c| c as f64 / total as f64).collect(),
        }
    }
}

impl NextTokenModel for UnigramModel {
    fn vocab_size(&self) -> usize {
        self.probs.len()
    }

    fn prob(&self, _prefix: &[u32], next: u32) -> f64 {
        self.probs.get(next as usize).copied().unwrap_or(0.0)
    }
}

/// Adapter for closures `(prefix, next) -> probability`.
pub struct FnModel<F> {
    pub vocab_size: usize,
    pub f: F,
}

impl<F: Fn(&[u32], u32) -> f64 + Sync> NextTokenModel for FnModel<F> {
    fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    fn prob(&self, prefix: &[u32], next: u32) -> f64 {
        (self.f)(prefix, next)
    }
}
