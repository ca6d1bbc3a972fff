use serde::{Deserialize, Serialize};

/// Fixed-width rows of token ids, stored row-major.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PackedSamples {
    pub context_length: usize,
    pub tokens: Vec<u32>,
    pub dropped_tail: usize,
}

impl PackedSamples {
    pub fn num_samples(&self) -> usize {
        self.tokens.len() / self.context_length
    }

    pub fn row(&self, i: usize) -> &[u32] {
        &self.tokens[i * self.context_length..(i + 1) * self.context_length]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u32]> {
        self.tokens.chunks_exact(self.context_length)
    }
}

/// Concatenate documents, each followed by `eos_id`, and cut the stream into
/// `context_length` rows. The final partial row is dropped and counted.
pub fn pack_tokens<D: AsRef<[u32]>>(docs: &[D], context_length: usize, eos_id: u32) -> PackedSamples {
    assert!(context_length >= 2, "context length must be at least 2");
    let total: usize = docs.iter().map(|d| d.as_ref().len() + 1).sum();
    let mut tokens = Vec::with_capacity(total);
    for d in docs {
        tokens.extend_from_slice(d.as_ref());
        tokens.push(eos_id);
    }
    let dropped_tail = tokens.len() % context_length;
    tokens.truncate(tokens.len() - dropped_tail);
    PackedSamples {
        context_length,
        tokens,
        dropped_tail,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn five_and_three_at_four() {
        let p = pack_tokens(&[vec![10, 11, 12, 13, 14], vec![20, 21, 22]], 4, 2);
        assert_eq!(p.num_samples(), 2);
        assert_eq!(p.dropped_tail, 2);
        assert_eq!(p.row(0), &[10, 11, 12, 13]);
        assert_eq!(p.row(1), &[14, 2, 20, 21]);
    }

    #[test]
    fn nothing_in_nothing_out() {
        let p = pack_tokens::<Vec<u32>>(&[], 4096, 2);
        assert_eq!((p.num_samples(), p.dropped_tail), (0, 0));
    }

    #[test]
    fn empty_docs_still_emit_eos() {
        let p = pack_tokens(&[vec![], vec![]], 2, 2);
        assert_eq!(p.tokens, vec![2, 2]);
        assert_eq!(p.dropped_tail, 0);
    }
}
