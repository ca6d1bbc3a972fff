//! Near-duplicate removal with MinHash signatures and LSH banding.
//!
//! Pipeline: shingle every document, compute its signature, bucket each
//! signature's bands, confirm bucket-mates whose estimated Jaccard reaches the
//! threshold, union confirmed pairs, and keep the smallest id of each cluster.
//! Every stage is either per-document or per-band and the final reduction is
//! sequential, so output does not depend on the worker count.

pub mod lsh;
pub mod minhash;
pub mod union_find;

use std::collections::{HashMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus_io::Document;
use crate::parallel::with_workers;

pub use lsh::optimal_bands;
pub use minhash::{
    estimate_jaccard, minhash_signature, shingle, DedupConfig, MinHashSignature, Permutations,
};
pub use union_find::UnionFind;

#[derive(Debug, Error)]
pub enum DedupError {
    #[error("invalid dedup config: {0}")]
    InvalidConfig(String),
    #[error("document has no shingles")]
    EmptyDocument,
    #[error("signature length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("duplicate document id {0}")]
    DuplicateId(u64),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cluster {
    pub kept: u64,
    pub removed: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DedupReport {
    pub clusters: Vec<Cluster>,
    pub docs_in: usize,
    pub docs_kept: usize,
    pub pairs_candidates: usize,
    /// Id pairs whose estimated Jaccard met the threshold, smaller id first.
    pub confirmed_pairs: Vec<(u64, u64)>,
    /// Documents with no shingles; kept verbatim and never compared.
    pub empty_docs: Vec<u64>,
    pub bands: usize,
    pub rows: usize,
    pub shingling: String,
    pub config: DedupConfig,
}

impl DedupReport {
    pub fn removed_count(&self) -> usize {
        self.clusters.iter().map(|c| c.removed.len()).sum()
    }
}

/// Deduplicate on the current rayon pool.
pub fn dedup_corpus(
    docs: &[Document],
    cfg: &DedupConfig,
) -> Result<(Vec<Document>, DedupReport), DedupError> {
    dedup_core(docs, cfg)
}

/// Deduplicate on a dedicated pool of `workers` threads.
pub fn dedup_corpus_with_workers(
    docs: &[Document],
    cfg: &DedupConfig,
    workers: usize,
) -> Result<(Vec<Document>, DedupReport), DedupError> {
    with_workers(workers, || dedup_core(docs, cfg))
}

fn dedup_core(
    docs: &[Document],
    cfg: &DedupConfig,
) -> Result<(Vec<Document>, DedupReport), DedupError> {
    cfg.validate()?;
    let mut seen = HashSet::with_capacity(docs.len());
    for d in docs {
        if !seen.insert(d.id) {
            return Err(DedupError::DuplicateId(d.id));
        }
    }

    let perms = Permutations::new(cfg);
    let signatures: Vec<Option<MinHashSignature>> = docs
        .par_iter()
        .map(|d| {
            let sh = shingle(&d.text, cfg.shingle_n);
            perms.signature(&sh).ok()
        })
        .collect();

    let empty_docs: Vec<u64> = docs
        .iter()
        .zip(&signatures)
        .filter(|(_, s)| s.is_none())
        .map(|(d, _)| d.id)
        .collect();
    // Positions (into `docs`) of documents that take part in banding.
    let active: Vec<usize> = (0..docs.len()).filter(|&i| signatures[i].is_some()).collect();
    let sig = |i: usize| signatures[i].as_ref().expect("active documents have signatures");

    let (bands, rows) = optimal_bands(cfg.threshold, cfg.num_perm);

    let mut candidates: Vec<(usize, usize)> = (0..bands)
        .into_par_iter()
        .flat_map_iter(|band| {
            let range = band * rows..(band + 1) * rows;
            let mut buckets: HashMap<&[u64], Vec<usize>> = HashMap::new();
            for &i in &active {
                buckets.entry(&sig(i).slots[range.clone()]).or_default().push(i);
            }
            let mut pairs = Vec::new();
            for members in buckets.values().filter(|m| m.len() > 1) {
                for (k, &a) in members.iter().enumerate() {
                    for &b in &members[k + 1..] {
                        pairs.push((a, b));
                    }
                }
            }
            pairs
        })
        .collect();
    candidates.par_sort_unstable();
    candidates.dedup();

    let confirmed: Vec<(usize, usize)> = candidates
        .par_iter()
        .copied()
        .filter(|&(a, b)| {
            estimate_jaccard(sig(a), sig(b)).map_or(false, |j| j >= cfg.threshold)
        })
        .collect();

    let mut uf = UnionFind::new(docs.len());
    for &(a, b) in &confirmed {
        uf.union(a, b);
    }

    let mut confirmed_pairs: Vec<(u64, u64)> = confirmed
        .iter()
        .map(|&(a, b)| (docs[a].id.min(docs[b].id), docs[a].id.max(docs[b].id)))
        .collect();
    confirmed_pairs.sort_unstable();

    let mut keep = vec![true; docs.len()];
    let mut clusters = Vec::new();
    for group in uf.groups().into_iter().filter(|g| g.len() > 1) {
        let kept_pos = *group
            .iter()
            .min_by_key(|&&i| docs[i].id)
            .expect("group is non-empty");
        let mut removed: Vec<u64> = group
            .iter()
            .filter(|&&i| i != kept_pos)
            .map(|&i| {
                keep[i] = false;
                docs[i].id
            })
            .collect();
        removed.sort_unstable();
        clusters.push(Cluster {
            kept: docs[kept_pos].id,
            removed,
        });
    }
    clusters.sort_by_key(|c| c.kept);

    let kept: Vec<Document> = docs
        .iter()
        .zip(&keep)
        .filter(|(_, &k)| k)
        .map(|(d, _)| d.clone())
        .collect();

    let report = DedupReport {
        clusters,
        docs_in: docs.len(),
        docs_kept: kept.len(),
        pairs_candidates: candidates.len(),
        confirmed_pairs,
        empty_docs,
        bands,
        rows,
        shingling: format!(
            "nfc+lowercase, whitespace words, {}-gram, sha1 low 64 bits",
            cfg.shingle_n
        ),
        config: cfg.clone(),
    };
    Ok((kept, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn words(prefix: &str, n: usize) -> String {
        (0..n).map(|i| format!("{prefix}{i}")).collect::<Vec<_>>().join(" ")
    }

    #[test]
    fn exact_copy_is_removed() {
        let mut docs: Vec<Document> = (0..10).map(|i| Document::new(i, words(&format!("w{i}x"), 30))).collect();
        docs[7].text = docs[2].text.clone();
        let (kept, report) = dedup_corpus(&docs, &DedupConfig::default()).unwrap();
        assert_eq!(report.clusters, vec![Cluster { kept: 2, removed: vec![7] }]);
        assert_eq!(kept.len(), 9);
        assert!(kept.iter().all(|d| d.id != 7));
        assert_eq!(report.docs_kept + report.removed_count(), report.docs_in);
    }

    #[test]
    fn disjoint_vocabularies_all_kept() {
        let docs: Vec<Document> = (0..20).map(|i| Document::new(i, words(&format!("v{i}_"), 40))).collect();
        let (kept, report) = dedup_corpus(&docs, &DedupConfig::default()).unwrap();
        assert_eq!(kept.len(), 20);
        assert!(report.clusters.is_empty());
    }

    #[test]
    fn empty_docs_bypass_dedup() {
        let docs = vec![
            Document::new(0, ""),
            Document::new(1, "   "),
            Document::new(2, words("a", 20)),
        ];
        let (kept, report) = dedup_corpus(&docs, &DedupConfig::default()).unwrap();
        assert_eq!(kept.len(), 3);
        assert_eq!(report.empty_docs, vec![0, 1]);
    }

    #[test]
    fn representative_is_min_id_not_first_position() {
        let text = words("z", 25);
        let docs = vec![
            Document::new(9, text.clone()),
            Document::new(3, text.clone()),
            Document::new(5, text),
        ];
        let (kept, report) = dedup_corpus(&docs, &DedupConfig::default()).unwrap();
        assert_eq!(kept.len(), 1);
        assert_eq!(kept[0].id, 3);
        assert_eq!(report.clusters, vec![Cluster { kept: 3, removed: vec![5, 9] }]);
    }

    #[test]
    fn duplicate_ids_rejected() {
        let docs = vec![Document::new(1, "a"), Document::new(1, "b")];
        assert!(matches!(
            dedup_corpus(&docs, &DedupConfig::default()),
            Err(DedupError::DuplicateId(1))
        ));
    }
}
