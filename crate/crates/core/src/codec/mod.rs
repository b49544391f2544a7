//! Systematic (n, k) MDS erasure code over GF(2^8).
//!
//! Content is zero-padded to a multiple of k and split into k equal data
//! shards; n - k parity shards are added. Any k distinct shards reconstruct
//! the content exactly.

pub mod gf256;
pub mod matrix;
mod mds;
mod shard_file;

use thiserror::Error;

pub use mds::{decode, encode, CodeSpec, ContentFile, Shard, MAX_SHARDS};
pub use shard_file::{parse_shard, serialize_shard, HEADER_LEN, SHARD_MAGIC, SHARD_VERSION};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodecError {
    #[error("invalid code ({n}, {k}): {reason}")]
    InvalidSpec { n: usize, k: usize, reason: &'static str },

    #[error("content is empty")]
    EmptyContent,

    #[error("insufficient shards: need {needed} distinct, got {got}")]
    InsufficientShards { needed: usize, got: usize },

    #[error("shard length mismatch: expected {expected} bytes, shard {index} has {found}")]
    LengthMismatch {
        index: usize,
        expected: usize,
        found: usize,
    },

    #[error("shard index {index} out of range for n = {n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("shard {index} belongs to a different encoding: {reason}")]
    Inconsistent { index: usize, reason: &'static str },

    #[error("bad shard magic {found:02x?}")]
    BadMagic { found: [u8; 4] },

    #[error("unsupported shard format version {found}")]
    BadVersion { found: u16 },

    #[error("truncated shard: need {needed} bytes, have {have}")]
    Truncated { needed: usize, have: usize },

    #[error("invalid shard header: {reason}")]
    InvalidHeader { reason: &'static str },

    #[error("{extra} unexpected bytes after shard payload")]
    TrailingBytes { extra: usize },
}
