use super::gf256;
use super::matrix::Matrix;
use super::CodecError;

/// Largest n supported: evaluation points must be distinct field elements.
pub const MAX_SHARDS: usize = 255;

/// An (n, k) code description.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeSpec {
    n: usize,
    k: usize,
    generator: Matrix,
}

impl CodeSpec {
    /// Builds the systematic generator `[I_k; C]`, where `C` is the Cauchy
    /// matrix `1 / (x_i + y_j)` with `x_i = k + i`, `y_j = j`, and each column
    /// scaled so the first parity row is all ones. Every square submatrix of a
    /// Cauchy matrix is nonsingular, and column scaling keeps that, so any k
    /// rows of the generator are invertible.
    pub fn new(n: usize, k: usize) -> Result<Self, CodecError> {
        if k < 1 {
            return Err(CodecError::InvalidSpec {
                n,
                k,
                reason: "k must be at least 1",
            });
        }
        if k > n {
            return Err(CodecError::InvalidSpec {
                n,
                k,
                reason: "k must not exceed n",
            });
        }
        if n > MAX_SHARDS {
            return Err(CodecError::InvalidSpec {
                n,
                k,
                reason: "n must not exceed 255",
            });
        }
        let mut generator = Matrix::zeros(n, k);
        for j in 0..k {
            generator.set(j, j, 1);
        }
        let parity = n - k;
        if parity > 0 {
            let scale: Vec<u8> = (0..k).map(|j| (k as u8) ^ (j as u8)).collect();
            for i in 0..parity {
                let x = (k + i) as u8;
                for (j, &s) in scale.iter().enumerate() {
                    // 1/(x ^ y_j) scaled by (x_0 ^ y_j), so row 0 is all ones.
                    generator.set(k + i, j, gf256::div(s, x ^ j as u8));
                }
            }
        }
        Ok(CodeSpec { n, k, generator })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// The n x k generator matrix; shard `i` is row `i` applied to the data.
    pub fn generator(&self) -> &Matrix {
        &self.generator
    }
}

/// Content to be stored, with its unpadded length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContentFile {
    bytes: Vec<u8>,
}

impl ContentFile {
    pub fn new(bytes: Vec<u8>) -> Self {
        ContentFile { bytes }
    }

    pub fn bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn original_len(&self) -> usize {
        self.bytes.len()
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.bytes
    }
}

/// One coded block, tagged with the code and content length it came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Shard {
    pub n: usize,
    pub k: usize,
    pub index: usize,
    pub original_len: u64,
    pub payload: Vec<u8>,
}

impl Shard {
    pub fn shard_len(&self) -> usize {
        self.payload.len()
    }

    pub fn is_data(&self) -> bool {
        self.index < self.k
    }
}

/// Splits zero-padded content into k data shards and appends n - k parity
/// shards. Shard `i < k` carries data block `i` verbatim.
pub fn encode(spec: &CodeSpec, content: &ContentFile) -> Result<Vec<Shard>, CodecError> {
    let bytes = content.bytes();
    if bytes.is_empty() {
        return Err(CodecError::EmptyContent);
    }
    let (n, k) = (spec.n, spec.k);
    let shard_len = bytes.len().div_ceil(k);
    let mut blocks: Vec<Vec<u8>> = (0..k)
        .map(|j| {
            let start = (j * shard_len).min(bytes.len());
            let end = ((j + 1) * shard_len).min(bytes.len());
            let mut b = bytes[start..end].to_vec();
            b.resize(shard_len, 0);
            b
        })
        .collect();
    for i in k..n {
        let mut parity = vec![0u8; shard_len];
        for (j, block) in blocks.iter().take(k).enumerate() {
            gf256::mul_add_slice(&mut parity, block, spec.generator.get(i, j));
        }
        blocks.push(parity);
    }
    Ok(blocks
        .into_iter()
        .enumerate()
        .map(|(index, payload)| Shard {
            n,
            k,
            index,
            original_len: bytes.len() as u64,
            payload,
        })
        .collect())
}

/// Reconstructs the original content from any k distinct shards. Extra
/// shards beyond the first k distinct indices are ignored after validation.
pub fn decode(spec: &CodeSpec, shards: &[Shard]) -> Result<ContentFile, CodecError> {
    let (n, k) = (spec.n, spec.k);
    let first = shards
        .first()
        .ok_or(CodecError::InsufficientShards { needed: k, got: 0 })?;
    let shard_len = first.shard_len();
    let original_len = first.original_len;

    let mut chosen: Vec<Option<&Shard>> = vec![None; n];
    for s in shards {
        if s.index >= n {
            return Err(CodecError::IndexOutOfRange { index: s.index, n });
        }
        if s.n != n || s.k != k {
            return Err(CodecError::Inconsistent {
                index: s.index,
                reason: "code parameters differ",
            });
        }
        if s.original_len != original_len {
            return Err(CodecError::Inconsistent {
                index: s.index,
                reason: "original length differs",
            });
        }
        if s.shard_len() != shard_len {
            return Err(CodecError::LengthMismatch {
                index: s.index,
                expected: shard_len,
                found: s.shard_len(),
            });
        }
        chosen[s.index].get_or_insert(s);
    }
    let distinct: Vec<&Shard> = chosen.iter().flatten().copied().collect();
    if distinct.len() < k {
        return Err(CodecError::InsufficientShards {
            needed: k,
            got: distinct.len(),
        });
    }
    if (original_len as usize).div_ceil(k) != shard_len || original_len == 0 {
        return Err(CodecError::Inconsistent {
            index: first.index,
            reason: "original length does not fit the shard length",
        });
    }

    // Prefer data shards; they need no arithmetic.
    let mut use_rows: Vec<&Shard> = distinct.iter().filter(|s| s.is_data()).copied().collect();
    use_rows.extend(distinct.iter().filter(|s| !s.is_data()).copied());
    use_rows.truncate(k);
    use_rows.sort_by_key(|s| s.index);

    let mut data: Vec<Option<Vec<u8>>> = vec![None; k];
    for s in use_rows.iter().filter(|s| s.is_data()) {
        data[s.index] = Some(s.payload.clone());
    }
    if data.iter().any(Option::is_none) {
        let rows: Vec<usize> = use_rows.iter().map(|s| s.index).collect();
        let inverse = spec
            .generator
            .select_rows(&rows)
            .inverse()
            .expect("every k rows of a Cauchy generator are invertible");
        for (j, slot) in data.iter_mut().enumerate() {
            if slot.is_some() {
                continue;
            }
            let mut block = vec![0u8; shard_len];
            for (i, s) in use_rows.iter().enumerate() {
                gf256::mul_add_slice(&mut block, &s.payload, inverse.get(j, i));
            }
            *slot = Some(block);
        }
    }
    let mut bytes: Vec<u8> = data.into_iter().flatten().flatten().collect();
    bytes.truncate(original_len as usize);
    Ok(ContentFile::new(bytes))
}
