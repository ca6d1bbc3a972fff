use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use sha1::{Digest, Sha1};
use unicode_normalization::UnicodeNormalization;

use super::DedupError;
use crate::rng;

/// Mersenne prime 2^61 - 1, modulus of the permutation family.
pub const MERSENNE_61: u64 = (1 << 61) - 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DedupConfig {
    pub num_perm: usize,
    pub threshold: f64,
    pub hash_bits: u32,
    pub seed: u64,
    pub shingle_n: usize,
}

impl Default for DedupConfig {
    fn default() -> Self {
        Self {
            num_perm: 256,
            threshold: 0.95,
            hash_bits: 64,
            seed: 42,
            shingle_n: 5,
        }
    }
}

impl DedupConfig {
    pub fn validate(&self) -> Result<(), DedupError> {
        let bad = |msg: String| Err(DedupError::InvalidConfig(msg));
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return bad(format!("threshold {} not in (0, 1)", self.threshold));
        }
        if self.num_perm < 16 {
            return bad(format!("num_perm {} < 16", self.num_perm));
        }
        if self.hash_bits != 32 && self.hash_bits != 64 {
            return bad(format!("hash_bits {} not in {{32, 64}}", self.hash_bits));
        }
        if self.shingle_n == 0 {
            return bad("shingle_n must be positive".into());
        }
        Ok(())
    }
}

/// sha1 of the UTF-8 bytes, keeping the low-order 64 bits of the digest
/// read as a big-endian integer (the last eight digest bytes).
pub fn sha1_low64(bytes: &[u8]) -> u64 {
    let digest = Sha1::digest(bytes);
    u64::from_be_bytes(digest[12..20].try_into().expect("sha1 digest is 20 bytes"))
}

/// NFC, lowercase, whitespace split.
pub fn normalize_words(text: &str) -> Vec<String> {
    let normalized: String = text.nfc().collect::<String>().to_lowercase();
    normalized.split_whitespace().map(str::to_owned).collect()
}

/// Word `n`-gram shingle hashes of `text`.
///
/// Texts shorter than `n` words become a single shingle of the whole
/// normalized text; whitespace-only text has no shingles.
pub fn shingle(text: &str, n: usize) -> BTreeSet<u64> {
    assert!(n >= 1, "shingle size must be positive");
    let words = normalize_words(text);
    if words.is_empty() {
        return BTreeSet::new();
    }
    if words.len() < n {
        return BTreeSet::from([sha1_low64(words.join(" ").as_bytes())]);
    }
    words
        .windows(n)
        .map(|w| sha1_low64(w.join(" ").as_bytes()))
        .collect()
}

/// The affine hash family `h_i(s) = ((a_i s + b_i) mod p) mod 2^bits`.
#[derive(Debug, Clone)]
pub struct Permutations {
    coeffs: Vec<(u64, u64)>,
    mask: u64,
}

impl Permutations {
    pub fn new(cfg: &DedupConfig) -> Self {
        // a_i in [1, p-1], b_i in [0, p-1]; 61-bit draws are in [0, p] so
        // rejection only discards the endpoints.
        let mut counter = 0u64;
        let mut draw = |accept: &dyn Fn(u64) -> bool| loop {
            let x = rng::at(cfg.seed, counter) >> 3;
            counter += 1;
            if accept(x) {
                return x;
            }
        };
        let coeffs = (0..cfg.num_perm)
            .map(|_| {
                let a = draw(&|x| x >= 1 && x < MERSENNE_61);
                let b = draw(&|x| x < MERSENNE_61);
                (a, b)
            })
            .collect();
        let mask = if cfg.hash_bits >= 64 {
            u64::MAX
        } else {
            (1u64 << cfg.hash_bits) - 1
        };
        Self { coeffs, mask }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    #[inline]
    pub fn apply(&self, i: usize, s: u64) -> u64 {
        let (a, b) = self.coeffs[i];
        let v = (a as u128 * s as u128 + b as u128) % MERSENNE_61 as u128;
        (v as u64) & self.mask
    }

    pub fn signature(&self, shingles: &BTreeSet<u64>) -> Result<MinHashSignature, DedupError> {
        if shingles.is_empty() {
            return Err(DedupError::EmptyDocument);
        }
        let mut slots = vec![u64::MAX; self.len()];
        for &s in shingles {
            for (i, slot) in slots.iter_mut().enumerate() {
                let h = self.apply(i, s);
                if h < *slot {
                    *slot = h;
                }
            }
        }
        Ok(MinHashSignature { slots })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MinHashSignature {
    pub slots: Vec<u64>,
}

impl MinHashSignature {
    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }
}

/// Convenience wrapper building the permutation family on each call.
pub fn minhash_signature(
    shingles: &BTreeSet<u64>,
    cfg: &DedupConfig,
) -> Result<MinHashSignature, DedupError> {
    Permutations::new(cfg).signature(shingles)
}

/// Fraction of slots on which the two signatures agree.
pub fn estimate_jaccard(a: &MinHashSignature, b: &MinHashSignature) -> Result<f64, DedupError> {
    if a.len() != b.len() {
        return Err(DedupError::LengthMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Ok(0.0);
    }
    let equal = a.slots.iter().zip(&b.slots).filter(|(x, y)| x == y).count();
    Ok(equal as f64 / a.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bigram_shingles() {
        let got = shingle("a b c", 2);
        let want: BTreeSet<u64> = ["a b", "b c"].iter().map(|s| sha1_low64(s.as_bytes())).collect();
        assert_eq!(got, want);
    }

    #[test]
    fn short_text_is_one_shingle() {
        assert_eq!(shingle("Hello", 5), BTreeSet::from([sha1_low64(b"hello")]));
    }

    #[test]
    fn case_and_spacing_do_not_matter() {
        assert_eq!(
            shingle("The  Quick brown\tfox jumps over", 3),
            shingle("the quick BROWN fox\n jumps   over ", 3)
        );
    }

    #[test]
    fn nfc_equivalent_forms_match() {
        // "é" precomposed vs e + combining acute
        assert_eq!(shingle("caf\u{e9} noir", 1), shingle("cafe\u{301} noir", 1));
    }

    #[test]
    fn blank_text_has_no_shingles() {
        assert!(shingle("  \n\t ", 5).is_empty());
        assert!(shingle("", 1).is_empty());
    }

    #[test]
    fn sha1_low64_known_value() {
        // sha1("abc") = a9993e364706816aba3e25717850c26c9cd0d89d
        assert_eq!(sha1_low64(b"abc"), 0x7850_c26c_9cd0_d89d);
    }

    #[test]
    fn singleton_signature_is_the_hash() {
        let cfg = DedupConfig::default();
        let perms = Permutations::new(&cfg);
        let s = 0xDEAD_BEEF_u64;
        let sig = perms.signature(&BTreeSet::from([s])).unwrap();
        for (i, slot) in sig.slots.iter().enumerate() {
            assert_eq!(*slot, perms.apply(i, s));
        }
    }

    #[test]
    fn coefficients_in_range() {
        let perms = Permutations::new(&DedupConfig::default());
        for &(a, b) in &perms.coeffs {
            assert!(a >= 1 && a < MERSENNE_61);
            assert!(b < MERSENNE_61);
        }
    }

    #[test]
    fn thirty_two_bit_masking() {
        let cfg = DedupConfig {
            hash_bits: 32,
            ..Default::default()
        };
        let perms = Permutations::new(&cfg);
        for s in [0u64, 1, u64::MAX, 123_456_789] {
            for i in 0..perms.len() {
                assert!(perms.apply(i, s) <= u32::MAX as u64);
            }
        }
    }

    #[test]
    fn empty_set_rejected() {
        let err = minhash_signature(&BTreeSet::new(), &DedupConfig::default()).unwrap_err();
        assert!(matches!(err, DedupError::EmptyDocument));
    }

    #[test]
    fn jaccard_identity_and_single_change() {
        let cfg = DedupConfig::default();
        let a = minhash_signature(&BTreeSet::from([1, 2, 3]), &cfg).unwrap();
        assert_eq!(estimate_jaccard(&a, &a).unwrap(), 1.0);
        let mut b = a.clone();
        b.slots[17] ^= 1;
        assert_eq!(estimate_jaccard(&a, &b).unwrap(), 255.0 / 256.0);
    }

    #[test]
    fn jaccard_length_mismatch() {
        let a = MinHashSignature { slots: vec![1; 4] };
        let b = MinHashSignature { slots: vec![1; 5] };
        assert!(matches!(
            estimate_jaccard(&a, &b),
            Err(DedupError::LengthMismatch(4, 5))
        ));
    }

    #[test]
    fn config_validation() {
        assert!(DedupConfig::default().validate().is_ok());
        for bad in [
            DedupConfig { threshold: 1.0, ..Default::default() },
            DedupConfig { threshold: 0.0, ..Default::default() },
            DedupConfig { num_perm: 8, ..Default::default() },
            DedupConfig { hash_bits: 16, ..Default::default() },
        ] {
            assert!(bad.validate().is_err());
        }
    }
}
