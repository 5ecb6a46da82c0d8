//! Sorted key arrays and the exact rank oracle.

use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt::Debug;
use core::ops::Deref;

use thiserror::Error;

/// Errors raised while validating raw keys.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum KeyError {
    #[error("key array must contain at least one key")]
    EmptyInput,
    #[error("key at input position {position} is NaN or infinite")]
    NonFiniteKey { position: usize },
}

/// How the 8-byte key words of a data file are interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KeyMode {
    UInt64,
    Float64,
}

/// A key type the index can work with.
///
/// Keys are compared natively, so ranks are exact in both modes. Interval
/// arithmetic always goes through [`Key::to_f64`].
pub trait Key: Copy + PartialOrd + Debug + Send + Sync + 'static {
    const MODE: KeyMode;

    fn to_f64(self) -> f64;

    /// Raw little-endian word used by the on-disk formats.
    fn to_bits(self) -> u64;

    fn from_bits(bits: u64) -> Self;

    fn is_finite(self) -> bool {
        true
    }

    /// Total order used by sorting; only called on validated keys.
    fn total_cmp(&self, other: &Self) -> Ordering {
        self.partial_cmp(other).unwrap_or(Ordering::Equal)
    }
}

impl Key for u64 {
    const MODE: KeyMode = KeyMode::UInt64;

    #[inline]
    fn to_f64(self) -> f64 {
        self as f64
    }

    #[inline]
    fn to_bits(self) -> u64 {
        self
    }

    #[inline]
    fn from_bits(bits: u64) -> Self {
        bits
    }

    #[inline]
    fn total_cmp(&self, other: &Self) -> Ordering {
        self.cmp(other)
    }
}

impl Key for f64 {
    const MODE: KeyMode = KeyMode::Float64;

    #[inline]
    fn to_f64(self) -> f64 {
        self
    }

    #[inline]
    fn to_bits(self) -> u64 {
        f64::to_bits(self)
    }

    #[inline]
    fn from_bits(bits: u64) -> Self {
        f64::from_bits(bits)
    }

    #[inline]
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }

    #[inline]
    fn total_cmp(&self, other: &Self) -> Ordering {
        f64::total_cmp(self, other)
    }
}

/// The number of keys `<= q`, always within `[0, n]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rank(usize);

impl Rank {
    pub(crate) const fn new(value: usize) -> Self {
        Rank(value)
    }

    #[inline]
    pub const fn get(self) -> usize {
        self.0
    }
}

impl From<Rank> for usize {
    fn from(rank: Rank) -> usize {
        rank.0
    }
}

/// A non-empty, non-decreasing sequence of finite keys.
///
/// Duplicates are kept. The array is immutable once validated.
#[derive(Debug, Clone, PartialEq)]
pub struct KeyArray<K> {
    keys: Vec<K>,
}

impl<K: Key> KeyArray<K> {
    /// Validates `raw`, stable-sorting it when it is not already ordered.
    pub fn new(mut raw: Vec<K>) -> Result<Self, KeyError> {
        if raw.is_empty() {
            return Err(KeyError::EmptyInput);
        }
        if let Some(position) = raw.iter().position(|k| !k.is_finite()) {
            return Err(KeyError::NonFiniteKey { position });
        }
        if !is_sorted(&raw) {
            raw.sort_by(K::total_cmp);
        }
        Ok(KeyArray { keys: raw })
    }

    /// Number of keys, `n >= 1`.
    #[inline]
    pub fn len(&self) -> usize {
        self.keys.len()
    }

    /// Always false; present for clippy and API symmetry.
    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// `x(1)`
    #[inline]
    pub fn first(&self) -> K {
        self.keys[0]
    }

    /// `x(n)`
    #[inline]
    pub fn last(&self) -> K {
        self.keys[self.keys.len() - 1]
    }

    #[inline]
    pub fn as_slice(&self) -> &[K] {
        &self.keys
    }

    pub fn into_vec(self) -> Vec<K> {
        self.keys
    }

    /// Exact `rank(q)` by linear scan. This is the reference every other rank
    /// implementation is checked against.
    pub fn rank_bruteforce(&self, q: K) -> Rank {
        Rank(self.keys.iter().filter(|&&k| k <= q).count())
    }
}

impl<K> Deref for KeyArray<K> {
    type Target = [K];

    fn deref(&self) -> &[K] {
        &self.keys
    }
}

impl<K: Key> TryFrom<Vec<K>> for KeyArray<K> {
    type Error = KeyError;

    fn try_from(raw: Vec<K>) -> Result<Self, KeyError> {
        KeyArray::new(raw)
    }
}

/// Free-function form of [`KeyArray::new`].
pub fn validate_key_array<K: Key>(raw: Vec<K>) -> Result<KeyArray<K>, KeyError> {
    KeyArray::new(raw)
}

/// Free-function form of [`KeyArray::rank_bruteforce`].
pub fn rank_bruteforce<K: Key>(keys: &KeyArray<K>, q: K) -> Rank {
    keys.rank_bruteforce(q)
}

fn is_sorted<K: Key>(keys: &[K]) -> bool {
    keys.windows(2).all(|w| w[0] <= w[1])
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn sorts_unsorted_input() {
        let a = KeyArray::new(vec![3u64, 1, 2]).unwrap();
        assert_eq!(a.as_slice(), &[1, 2, 3]);
        assert_eq!(a.len(), 3);
    }

    #[test]
    fn singleton() {
        let a = KeyArray::new(vec![5u64]).unwrap();
        assert_eq!(a.len(), 1);
        assert_eq!(a.first(), 5);
        assert_eq!(a.last(), 5);
    }

    #[test]
    fn rejects_nan_and_infinity() {
        assert_eq!(
            KeyArray::new(vec![1.0, f64::NAN]),
            Err(KeyError::NonFiniteKey { position: 1 })
        );
        assert_eq!(
            KeyArray::new(vec![f64::NEG_INFINITY, 0.0]),
            Err(KeyError::NonFiniteKey { position: 0 })
        );
    }

    #[test]
    fn rejects_empty() {
        assert_eq!(KeyArray::<u64>::new(vec![]), Err(KeyError::EmptyInput));
    }

    #[test]
    fn keeps_duplicates_stably() {
        let a = KeyArray::new(vec![2.0, -0.0, 0.0, 1.0, 1.0]).unwrap();
        assert_eq!(a.len(), 5);
        assert_eq!(a.as_slice(), &[-0.0, 0.0, 1.0, 1.0, 2.0]);
    }

    #[test]
    fn bruteforce_rank_examples() {
        let a = KeyArray::new(vec![1u64, 1, 2]).unwrap();
        assert_eq!(a.rank_bruteforce(1).get(), 2);
        let b = KeyArray::new(vec![1u64, 2, 3]).unwrap();
        assert_eq!(b.rank_bruteforce(0).get(), 0);
        assert_eq!(b.rank_bruteforce(3).get(), 3);
    }
}
