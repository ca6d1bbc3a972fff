//! On-disk shard layout.
//!
//! ```text
//! offset  size  field
//! 0       4     magic "MLSD" (4D 4C 53 44)
//! 4       4     format version, u32 LE
//! 8       4     context_length, u32 LE
//! 12      4     token_width in bytes, u32 LE
//! 16      8     num_samples, u64 LE
//! 24      ...   payload: num_samples * context_length tokens, u16 LE
//! ```
//!
//! The manifest digest covers the payload only.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha1::{Digest, Sha1};

use super::pack::PackedSamples;
use super::ShardError;

pub const MAGIC: [u8; 4] = *b"MLSD";
pub const SHARD_FORMAT_VERSION: u32 = 1;
pub const TOKEN_WIDTH: u32 = 2;
pub const HEADER_LEN: usize = 24;
pub const SHARD_EXTENSION: &str = "mlsd";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShardHeader {
    pub version: u32,
    pub context_length: u32,
    pub token_width: u32,
    pub num_samples: u64,
}

impl ShardHeader {
    pub fn to_bytes(&self) -> [u8; HEADER_LEN] {
        let mut out = [0u8; HEADER_LEN];
        out[0..4].copy_from_slice(&MAGIC);
        out[4..8].copy_from_slice(&self.version.to_le_bytes());
        out[8..12].copy_from_slice(&self.context_length.to_le_bytes());
        out[12..16].copy_from_slice(&self.token_width.to_le_bytes());
        out[16..24].copy_from_slice(&self.num_samples.to_le_bytes());
        out
    }

    pub fn parse(bytes: &[u8]) -> Result<Self, ShardError> {
        if bytes.len() < HEADER_LEN {
            return Err(ShardError::BadHeader(format!("{} bytes, need {HEADER_LEN}", bytes.len())));
        }
        if bytes[0..4] != MAGIC {
            return Err(ShardError::BadHeader("bad magic".into()));
        }
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
        let header = Self {
            version: u32_at(4),
            context_length: u32_at(8),
            token_width: u32_at(12),
            num_samples: u64::from_le_bytes(bytes[16..24].try_into().unwrap()),
        };
        if header.version != SHARD_FORMAT_VERSION {
            return Err(ShardError::BadHeader(format!("unsupported version {}", header.version)));
        }
        if header.token_width != TOKEN_WIDTH {
            return Err(ShardError::BadHeader(format!("unsupported token width {}", header.token_width)));
        }
        Ok(header)
    }

    pub fn payload_bytes(&self) -> u64 {
        self.num_samples * self.context_length as u64 * self.token_width as u64
    }
}

/// One shard's manifest entry.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShardMeta {
    pub path: String,
    pub num_samples: u64,
    pub payload_bytes: u64,
    pub digest_hex: String,
    /// Geometry; carried once at manifest level on disk.
    #[serde(skip)]
    pub context_length: u32,
    #[serde(skip)]
    pub token_width: u32,
}

pub fn sha1_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha1::digest(bytes))
}

pub fn encode_payload(samples: &PackedSamples) -> Result<Vec<u8>, ShardError> {
    let mut payload = Vec::with_capacity(samples.tokens.len() * TOKEN_WIDTH as usize);
    for &id in &samples.tokens {
        let narrow = u16::try_from(id).map_err(|_| ShardError::TokenOverflow(id))?;
        payload.extend_from_slice(&narrow.to_le_bytes());
    }
    Ok(payload)
}

pub fn write_shard(samples: &PackedSamples, path: impl AsRef<Path>) -> Result<ShardMeta, ShardError> {
    let path = path.as_ref();
    let context_length = u32::try_from(samples.context_length)
        .map_err(|_| ShardError::BadHeader("context length exceeds u32".into()))?;
    let payload = encode_payload(samples)?;
    let header = ShardHeader {
        version: SHARD_FORMAT_VERSION,
        context_length,
        token_width: TOKEN_WIDTH,
        num_samples: samples.num_samples() as u64,
    };
    let io = |e| ShardError::io(path, e);
    let mut out = BufWriter::new(File::create(path).map_err(io)?);
    out.write_all(&header.to_bytes()).map_err(io)?;
    out.write_all(&payload).map_err(io)?;
    out.flush().map_err(io)?;
    Ok(ShardMeta {
        path: file_name(path),
        num_samples: header.num_samples,
        payload_bytes: payload.len() as u64,
        digest_hex: sha1_hex(&payload),
        context_length,
        token_width: TOKEN_WIDTH,
    })
}

/// Header plus raw payload bytes, checked for length but not digest.
pub fn read_shard_bytes(path: impl AsRef<Path>) -> Result<(ShardHeader, Vec<u8>), ShardError> {
    let path = path.as_ref();
    let mut bytes = fs::read(path).map_err(|e| ShardError::io(path, e))?;
    let header = ShardHeader::parse(&bytes)?;
    let payload = bytes.split_off(HEADER_LEN);
    if payload.len() as u64 != header.payload_bytes() {
        return Err(ShardError::BadHeader(format!(
            "{}: payload is {} bytes, header implies {}",
            path.display(),
            payload.len(),
            header.payload_bytes()
        )));
    }
    Ok((header, payload))
}

/// Build a manifest entry by reading an existing shard file.
pub fn shard_meta_from_file(path: impl AsRef<Path>) -> Result<ShardMeta, ShardError> {
    let path = path.as_ref();
    let (header, payload) = read_shard_bytes(path)?;
    Ok(ShardMeta {
        path: file_name(path),
        num_samples: header.num_samples,
        payload_bytes: payload.len() as u64,
        digest_hex: sha1_hex(&payload),
        context_length: header.context_length,
        token_width: header.token_width,
    })
}

pub fn decode_row(payload: &[u8], context_length: usize, index: usize) -> Vec<u32> {
    let width = TOKEN_WIDTH as usize;
    let start = index * context_length * width;
    payload[start..start + context_length * width]
        .chunks_exact(width)
        .map(|c| u16::from_le_bytes([c[0], c[1]]) as u32)
        .collect()
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.to_string_lossy().into_owned())
}
