use std::collections::HashMap;
use std::fs;
use std::path::Path;

use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine;
use serde::{Deserialize, Serialize};

use super::pretokenize::pretokenize;
use super::TokenizerError;

pub const NUM_SPECIALS: u32 = 4;
/// Id of byte 0; bytes occupy `BYTE_OFFSET..BYTE_OFFSET + 256`.
pub const BYTE_OFFSET: u32 = NUM_SPECIALS;
/// Id produced by the first merge.
pub const FIRST_MERGE_ID: u32 = BYTE_OFFSET + 256;
pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Specials {
    pub pad: u32,
    pub bos: u32,
    pub eos: u32,
    pub unk: u32,
}

impl Default for Specials {
    fn default() -> Self {
        Self {
            pad: 0,
            bos: 1,
            eos: 2,
            unk: 3,
        }
    }
}

const SPECIAL_TEXT: [&[u8]; 4] = [b"<pad>", b"<s>", b"</s>", b"<unk>"];

/// Byte-level BPE vocabulary and ordered merge list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenizerModel {
    vocab: Vec<Vec<u8>>,
    merges: Vec<(u32, u32)>,
    specials: Specials,
    ranks: HashMap<(u32, u32), u32>,
}

impl TokenizerModel {
    /// The merge-free model: specials plus the 256 byte tokens.
    pub fn byte_level() -> Self {
        Self::from_merges(Vec::new()).expect("empty merge list is valid")
    }

    /// Build the vocabulary implied by an ordered merge list.
    pub fn from_merges(merges: Vec<(u32, u32)>) -> Result<Self, TokenizerError> {
        let mut vocab: Vec<Vec<u8>> = SPECIAL_TEXT.iter().map(|s| s.to_vec()).collect();
        vocab.extend((0..=255u8).map(|b| vec![b]));
        for (i, &(l, r)) in merges.iter().enumerate() {
            let next = FIRST_MERGE_ID + i as u32;
            for side in [l, r] {
                if side < BYTE_OFFSET || side >= next {
                    return Err(TokenizerError::Schema(format!(
                        "merge {i} references id {side} outside [{BYTE_OFFSET}, {next})"
                    )));
                }
            }
            let mut bytes = vocab[l as usize].clone();
            bytes.extend_from_slice(&vocab[r as usize]);
            vocab.push(bytes);
        }
        let ranks = merges
            .iter()
            .enumerate()
            .map(|(i, &p)| (p, i as u32))
            .collect::<HashMap<_, _>>();
        Ok(Self {
            vocab,
            merges,
            specials: Specials::default(),
            ranks,
        })
    }

    pub fn vocab(&self) -> &[Vec<u8>] {
        &self.vocab
    }

    pub fn merges(&self) -> &[(u32, u32)] {
        &self.merges
    }

    pub fn specials(&self) -> Specials {
        self.specials
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab.len()
    }

    pub fn token_bytes(&self, id: u32) -> Option<&[u8]> {
        self.vocab.get(id as usize).map(Vec::as_slice)
    }

    pub fn is_special(&self, id: u32) -> bool {
        id < NUM_SPECIALS
    }

    pub fn byte_token(b: u8) -> u32 {
        BYTE_OFFSET + b as u32
    }

    pub fn encode(&self, text: &str) -> Vec<u32> {
        let mut out = Vec::with_capacity(text.len() / 3 + 1);
        for piece in pretokenize(text) {
            self.encode_piece(piece.as_bytes(), &mut out);
        }
        out
    }

    /// Apply merges to one pre-token, lowest rank first; every occurrence of
    /// the chosen pair is merged left to right before the next rank is picked.
    fn encode_piece(&self, bytes: &[u8], out: &mut Vec<u32>) {
        let mut syms: Vec<u32> = bytes.iter().map(|&b| Self::byte_token(b)).collect();
        while syms.len() > 1 {
            let best = syms
                .windows(2)
                .filter_map(|w| self.ranks.get(&(w[0], w[1])).map(|&r| (r, (w[0], w[1]))))
                .min();
            let Some((rank, pair)) = best else { break };
            let new_id = FIRST_MERGE_ID + rank;
            let mut merged = Vec::with_capacity(syms.len());
            let mut i = 0;
            while i < syms.len() {
                if i + 1 < syms.len() && (syms[i], syms[i + 1]) == pair {
                    merged.push(new_id);
                    i += 2;
                } else {
                    merged.push(syms[i]);
                    i += 1;
                }
            }
            syms = merged;
        }
        out.extend_from_slice(&syms);
    }

    /// Concatenated token bytes, specials skipped.
    pub fn decode_bytes(&self, ids: &[u32]) -> Result<Vec<u8>, TokenizerError> {
        let mut out = Vec::new();
        for &id in ids {
            let bytes = self.token_bytes(id).ok_or(TokenizerError::UnknownId(id))?;
            if !self.is_special(id) {
                out.extend_from_slice(bytes);
            }
        }
        Ok(out)
    }

    pub fn decode(&self, ids: &[u32]) -> Result<String, TokenizerError> {
        String::from_utf8(self.decode_bytes(ids)?).map_err(|_| TokenizerError::InvalidUtf8)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), TokenizerError> {
        let file = ModelFile {
            version: MODEL_FORMAT_VERSION,
            vocab: self.vocab.iter().map(|b| BASE64.encode(b)).collect(),
            merges: self.merges.iter().map(|&(l, r)| [l, r]).collect(),
            specials: self.specials,
        };
        let json = serde_json::to_string(&file).map_err(|e| TokenizerError::Schema(e.to_string()))?;
        fs::write(path.as_ref(), json).map_err(|e| TokenizerError::Io(path.as_ref().into(), e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, TokenizerError> {
        let raw = fs::read_to_string(path.as_ref())
            .map_err(|e| TokenizerError::Io(path.as_ref().into(), e))?;
        Self::from_json(&raw)
    }

    pub fn from_json(raw: &str) -> Result<Self, TokenizerError> {
        let schema = |m: String| TokenizerError::Schema(m);
        let file: ModelFile = serde_json::from_str(raw).map_err(|e| schema(e.to_string()))?;
        if file.version != MODEL_FORMAT_VERSION {
            return Err(schema(format!("unsupported model version {}", file.version)));
        }
        if file.specials != Specials::default() {
            return Err(schema(format!("unexpected special ids {:?}", file.specials)));
        }
        let expected = FIRST_MERGE_ID as usize + file.merges.len();
        if file.vocab.len() != expected {
            return Err(schema(format!(
                "vocab has {} entries, expected {expected} for {} merges",
                file.vocab.len(),
                file.merges.len()
            )));
        }
        let model = Self::from_merges(file.merges.iter().map(|m| (m[0], m[1])).collect())?;
        for (id, (stored, built)) in file.vocab.iter().zip(&model.vocab).enumerate() {
            let bytes = BASE64
                .decode(stored)
                .map_err(|e| schema(format!("vocab entry {id}: {e}")))?;
            if &bytes != built {
                return Err(schema(format!("vocab entry {id} disagrees with merge list")));
            }
        }
        Ok(model)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    version: u32,
    vocab: Vec<String>,
    merges: Vec<[u32; 2]>,
    specials: Specials,
}
