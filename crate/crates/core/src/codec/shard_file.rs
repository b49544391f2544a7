//! On-disk shard format. All integers little-endian:
//!
//! ```text
//! offset  size  field
//!      0     4  magic "CDSH"
//!      4     2  version (1)
//!      6     2  n
//!      8     2  k
//!     10     2  index
//!     12     8  original_len
//!     20     8  payload_len
//!     28     -  payload
//! ```

use super::mds::{Shard, MAX_SHARDS};
use super::CodecError;

pub const SHARD_MAGIC: [u8; 4] = *b"CDSH";
pub const SHARD_VERSION: u16 = 1;
pub const HEADER_LEN: usize = 28;

pub fn serialize_shard(shard: &Shard) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + shard.payload.len());
    out.extend_from_slice(&SHARD_MAGIC);
    out.extend_from_slice(&SHARD_VERSION.to_le_bytes());
    out.extend_from_slice(&(shard.n as u16).to_le_bytes());
    out.extend_from_slice(&(shard.k as u16).to_le_bytes());
    out.extend_from_slice(&(shard.index as u16).to_le_bytes());
    out.extend_from_slice(&shard.original_len.to_le_bytes());
    out.extend_from_slice(&(shard.payload.len() as u64).to_le_bytes());
    out.extend_from_slice(&shard.payload);
    out
}

fn u16_at(b: &[u8], at: usize) -> u16 {
    u16::from_le_bytes([b[at], b[at + 1]])
}

fn u64_at(b: &[u8], at: usize) -> u64 {
    let mut a = [0u8; 8];
    a.copy_from_slice(&b[at..at + 8]);
    u64::from_le_bytes(a)
}

pub fn parse_shard(bytes: &[u8]) -> Result<Shard, CodecError> {
    if bytes.len() >= 4 && bytes[..4] != SHARD_MAGIC {
        let mut found = [0u8; 4];
        found.copy_from_slice(&bytes[..4]);
        return Err(CodecError::BadMagic { found });
    }
    if bytes.len() < HEADER_LEN {
        return Err(CodecError::Truncated {
            needed: HEADER_LEN,
            have: bytes.len(),
        });
    }
    let version = u16_at(bytes, 4);
    if version != SHARD_VERSION {
        return Err(CodecError::BadVersion { found: version });
    }
    let n = u16_at(bytes, 6) as usize;
    let k = u16_at(bytes, 8) as usize;
    let index = u16_at(bytes, 10) as usize;
    let original_len = u64_at(bytes, 12);
    let payload_len = u64_at(bytes, 20);
    if n == 0 {
        return Err(CodecError::InvalidHeader { reason: "n is zero" });
    }
    if n > MAX_SHARDS {
        return Err(CodecError::InvalidHeader {
            reason: "n exceeds 255",
        });
    }
    if k == 0 || k > n {
        return Err(CodecError::InvalidHeader {
            reason: "k outside 1..=n",
        });
    }
    if index >= n {
        return Err(CodecError::InvalidHeader {
            reason: "index outside 0..n",
        });
    }
    let available = (bytes.len() - HEADER_LEN) as u64;
    if payload_len > available {
        return Err(CodecError::Truncated {
            needed: HEADER_LEN.saturating_add(payload_len as usize),
            have: bytes.len(),
        });
    }
    if payload_len < available {
        return Err(CodecError::TrailingBytes {
            extra: (available - payload_len) as usize,
        });
    }
    Ok(Shard {
        n,
        k,
        index,
        original_len,
        payload: bytes[HEADER_LEN..].to_vec(),
    })
}
