//! Little-endian binary layout of an [`EspcIndex`].
//!
//! ```text
//! offset  size  field
//! 0       5     magic "ESPC1"
//! 5       8     n        (u64)
//! 13      8     K        (u64)
//! 21      8     x_first  (f64)
//! 29      8     x_last   (f64)
//! 37      8     delta    (f64)
//! 45      8K    r[1..K]  (f64)
//! ```

use alloc::vec::Vec;

use super::{EspcError, EspcIndex};

pub const MAGIC: &[u8; 5] = b"ESPC1";
pub const HEADER_BYTES: usize = 45;
pub const SLOT_BYTES: usize = 8;

impl EspcIndex {
    /// Exact size of [`EspcIndex::to_bytes`]: `HEADER_BYTES + SLOT_BYTES * K`.
    pub fn serialized_len(&self) -> usize {
        HEADER_BYTES + SLOT_BYTES * self.k()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.serialized_len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&(self.n() as u64).to_le_bytes());
        out.extend_from_slice(&(self.k() as u64).to_le_bytes());
        out.extend_from_slice(&self.x_first().to_le_bytes());
        out.extend_from_slice(&self.x_last().to_le_bytes());
        out.extend_from_slice(&self.delta().to_le_bytes());
        for r in self.ranks() {
            out.extend_from_slice(&r.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, EspcError> {
        if bytes.len() < HEADER_BYTES {
            return Err(EspcError::Corrupt("shorter than the header"));
        }
        if &bytes[..5] != MAGIC {
            return Err(EspcError::Corrupt("bad magic"));
        }
        let word = |at: usize| {
            let mut buf = [0u8; 8];
            buf.copy_from_slice(&bytes[at..at + 8]);
            buf
        };
        let n = u64::from_le_bytes(word(5));
        let k = u64::from_le_bytes(word(13));
        let x_first = f64::from_le_bytes(word(21));
        let x_last = f64::from_le_bytes(word(29));
        let delta = f64::from_le_bytes(word(37));

        if n == 0 || k == 0 {
            return Err(EspcError::Corrupt("n and K must be positive"));
        }
        let expected = usize::try_from(k)
            .ok()
            .and_then(|k| k.checked_mul(SLOT_BYTES))
            .and_then(|b| b.checked_add(HEADER_BYTES));
        if expected != Some(bytes.len()) {
            return Err(EspcError::Corrupt("length does not match K"));
        }
        if !(delta >= 0.0) || !x_first.is_finite() || !x_last.is_finite() || x_first > x_last {
            return Err(EspcError::Corrupt("invalid range anchors"));
        }
        let ranks: Vec<f64> = bytes[HEADER_BYTES..]
            .chunks_exact(SLOT_BYTES)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect();
        let n = n as usize;
        let mut prev = 0.0;
        for &r in &ranks {
            if !(r >= prev && r <= n as f64) {
                return Err(EspcError::Corrupt("rank estimates out of order"));
            }
            prev = r;
        }
        Ok(EspcIndex::from_parts(n, delta, x_first, x_last, ranks))
    }
}
