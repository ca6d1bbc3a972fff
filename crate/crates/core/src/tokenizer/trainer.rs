//! Byte-level BPE training with incremental pair counts.
//!
//! Words are deduplicated with their frequencies, pair counts are maintained
//! incrementally, and the best pair is taken from a lazy max-heap. A heap
//! entry is stale when its count no longer matches the live count.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::sync::Arc;

use rayon::prelude::*;

use super::model::{TokenizerModel, FIRST_MERGE_ID};
use super::pretokenize::pretokenize;
use super::TokenizerError;
use crate::corpus_io::Document;
use crate::parallel::with_workers;

/// Smallest pair frequency eligible for a merge.
pub const MIN_PAIR_FREQUENCY: i64 = 2;

type Pair = (u32, u32);

#[derive(Debug, Eq, PartialEq)]
struct Candidate {
    count: i64,
    left: Arc<[u8]>,
    right: Arc<[u8]>,
    pair: Pair,
}

impl Ord for Candidate {
    // Max-heap: higher count first, then the lexicographically smallest
    // (left bytes, right bytes), then the smallest ids.
    fn cmp(&self, other: &Self) -> Ordering {
        self.count
            .cmp(&other.count)
            .then_with(|| other.left.cmp(&self.left))
            .then_with(|| other.right.cmp(&self.right))
            .then_with(|| other.pair.cmp(&self.pair))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Pre-token byte strings with their corpus frequencies, sorted by bytes.
pub fn word_counts(corpus: &[Document]) -> Vec<(Vec<u8>, i64)> {
    let merged = corpus
        .par_iter()
        .fold(HashMap::<&[u8], i64>::new, |mut acc, doc| {
            for piece in pretokenize(&doc.text) {
                *acc.entry(piece.as_bytes()).or_default() += 1;
            }
            acc
        })
        .reduce(HashMap::new, |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_default() += v;
            }
            a
        });
    let mut words: Vec<(Vec<u8>, i64)> = merged.into_iter().map(|(k, v)| (k.to_vec(), v)).collect();
    words.sort_unstable();
    words
}

pub fn train_bpe(corpus: &[Document], vocab_size: usize) -> Result<TokenizerModel, TokenizerError> {
    if corpus.is_empty() {
        return Err(TokenizerError::EmptyCorpus);
    }
    if vocab_size <= FIRST_MERGE_ID as usize {
        return Err(TokenizerError::VocabTooSmall(vocab_size));
    }
    let words = word_counts(corpus);
    let merges = learn_merges(&words, vocab_size - FIRST_MERGE_ID as usize);
    TokenizerModel::from_merges(merges)
}

pub fn train_bpe_with_workers(
    corpus: &[Document],
    vocab_size: usize,
    workers: usize,
) -> Result<TokenizerModel, TokenizerError> {
    with_workers(workers, || train_bpe(corpus, vocab_size))
}

fn adjacent_pairs(syms: &[u32]) -> impl Iterator<Item = Pair> + '_ {
    syms.windows(2).map(|w| (w[0], w[1]))
}

fn apply_merge(syms: &mut Vec<u32>, pair: Pair, new_id: u32) {
    let mut write = 0;
    let mut read = 0;
    while read < syms.len() {
        if read + 1 < syms.len() && (syms[read], syms[read + 1]) == pair {
            syms[write] = new_id;
            read += 2;
        } else {
            syms[write] = syms[read];
            read += 1;
        }
        write += 1;
    }
    syms.truncate(write);
}

/// Learn up to `max_merges` merges from weighted words.
pub fn learn_merges(words: &[(Vec<u8>, i64)], max_merges: usize) -> Vec<Pair> {
    let mut token_bytes: Vec<Arc<[u8]>> = TokenizerModel::byte_level()
        .vocab()
        .iter()
        .map(|b| Arc::from(b.as_slice()))
        .collect();
    let mut symbols: Vec<Vec<u32>> = words
        .iter()
        .map(|(w, _)| w.iter().map(|&b| TokenizerModel::byte_token(b)).collect())
        .collect();
    let freqs: Vec<i64> = words.iter().map(|(_, c)| *c).collect();

    let mut counts: HashMap<Pair, i64> = HashMap::new();
    let mut occurs_in: HashMap<Pair, Vec<usize>> = HashMap::new();
    for (w, syms) in symbols.iter().enumerate() {
        for p in adjacent_pairs(syms) {
            *counts.entry(p).or_default() += freqs[w];
            occurs_in.entry(p).or_default().push(w);
        }
    }

    let candidate = |p: Pair, count: i64, bytes: &[Arc<[u8]>]| Candidate {
        count,
        left: bytes[p.0 as usize].clone(),
        right: bytes[p.1 as usize].clone(),
        pair: p,
    };
    let mut heap: BinaryHeap<Candidate> = counts
        .iter()
        .map(|(&p, &c)| candidate(p, c, &token_bytes))
        .collect();

    let mut merges = Vec::new();
    while merges.len() < max_merges {
        let Some(top) = heap.pop() else { break };
        if counts.get(&top.pair) != Some(&top.count) {
            continue;
        }
        if top.count < MIN_PAIR_FREQUENCY {
            break;
        }
        let pair = top.pair;
        let new_id = token_bytes.len() as u32;
        let mut bytes = top.left.to_vec();
        bytes.extend_from_slice(&top.right);
        token_bytes.push(Arc::from(bytes));
        merges.push(pair);

        let mut affected = occurs_in.remove(&pair).unwrap_or_default();
        affected.sort_unstable();
        affected.dedup();

        let mut delta: HashMap<Pair, i64> = HashMap::new();
        for w in affected {
            let syms = &mut symbols[w];
            if !adjacent_pairs(syms).any(|p| p == pair) {
                continue;
            }
            let f = freqs[w];
            for p in adjacent_pairs(syms) {
                *delta.entry(p).or_default() -= f;
            }
            apply_merge(syms, pair, new_id);
            for p in adjacent_pairs(syms) {
                *delta.entry(p).or_default() += f;
                if p.0 == new_id || p.1 == new_id {
                    occurs_in.entry(p).or_default().push(w);
                }
            }
        }

        for (p, d) in delta {
            if d == 0 {
                continue;
            }
            let c = counts.entry(p).or_default();
            *c += d;
            if *c <= 0 {
                counts.remove(&p);
                occurs_in.remove(&p);
            } else {
                heap.push(candidate(p, *c, &token_bytes));
            }
        }
    }
    merges
}
