//! The equal-split piecewise constant index.
//!
//! `[x(1), x(n)]` is cut into `K` intervals of length `δ = (x(n) - x(1)) / K`.
//! Interval `k` (1-based) is `I_k = [t_{k-1}, t_k]` with `t_k = x(1) + kδ`, and
//! stores `r̂_k = rank(t_{k-1}) + n_k / 2`, where `n_k` counts the keys the
//! index assigns to `I_k`. Membership is decided only by the clamped-ceiling
//! formula `k = clamp(ceil((x - x(1)) / δ), 1, K)`, applied identically at
//! build and query time, so every value maps to exactly one interval and the
//! prediction error inside `I_k` never exceeds `n_k / 2`.

mod hier;
mod layout;
mod sizing;

use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::keys::{Key, KeyArray, Rank};
use crate::search::{gallop, SearchOutcome};

pub use hier::{build_equal_probability, evaluate_rank_hier, HierIndex};
pub use layout::{HEADER_BYTES, MAGIC, SLOT_BYTES};
pub use sizing::{choose_k, SizingPolicy};

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum EspcError {
    #[error("invalid interval count {k}: {reason}")]
    InvalidK { k: usize, reason: &'static str },
    #[error("query {q} lies outside the indexed range [{lo}, {hi}]")]
    OutOfRange { q: f64, lo: f64, hi: f64 },
    #[error("index was built over {index_n} keys but the array has {array_n}")]
    IndexMismatch { index_n: usize, array_n: usize },
    #[error("invalid sizing policy parameters: {0}")]
    InvalidPolicyParams(&'static str),
    #[error("serialized index is malformed: {0}")]
    Corrupt(&'static str),
}

/// An ESPC index over one [`KeyArray`].
///
/// The index stores only the anchors and the `K` rank estimates; the keys
/// themselves are passed back in at query time.
#[derive(Debug, Clone, PartialEq)]
pub struct EspcIndex {
    n: usize,
    delta: f64,
    x_first: f64,
    x_last: f64,
    ranks: Vec<f64>,
}

impl EspcIndex {
    /// Builds the index with `k` equal-length intervals in `O(n + k)`.
    ///
    /// When `x(1) == x(n)` the range is degenerate: the index keeps a single
    /// interval with estimate `n / 2` whatever `k` was requested.
    pub fn build<K: Key>(keys: &KeyArray<K>, k: usize) -> Result<Self, EspcError> {
        if k == 0 {
            return Err(EspcError::InvalidK {
                k,
                reason: "at least one interval is required",
            });
        }
        let n = keys.len();
        let x_first = keys.first().to_f64();
        let x_last = keys.last().to_f64();
        let span = x_last - x_first;
        if span <= 0.0 {
            return Ok(EspcIndex {
                n,
                delta: 0.0,
                x_first,
                x_last,
                ranks: vec![n as f64 / 2.0],
            });
        }

        let mut index = EspcIndex {
            n,
            delta: span / k as f64,
            x_first,
            x_last,
            ranks: vec![0.0; k],
        };
        let mut counts = vec![0usize; k];
        for key in keys.iter() {
            counts[index.slot(key.to_f64())] += 1;
        }
        // r̂_k = rank(t_{k-1}) + n_k / 2
        let mut below = 0usize;
        for (estimate, &count) in index.ranks.iter_mut().zip(&counts) {
            *estimate = below as f64 + count as f64 / 2.0;
            below += count;
        }
        Ok(index)
    }

    pub(crate) fn from_parts(
        n: usize,
        delta: f64,
        x_first: f64,
        x_last: f64,
        ranks: Vec<f64>,
    ) -> Self {
        EspcIndex {
            n,
            delta,
            x_first,
            x_last,
            ranks,
        }
    }

    /// Number of indexed keys.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of intervals actually stored.
    pub fn k(&self) -> usize {
        self.ranks.len()
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn x_first(&self) -> f64 {
        self.x_first
    }

    pub fn x_last(&self) -> f64 {
        self.x_last
    }

    /// The stored estimates `r̂_1..r̂_K`.
    pub fn ranks(&self) -> &[f64] {
        &self.ranks
    }

    pub fn is_degenerate(&self) -> bool {
        self.delta == 0.0
    }

    /// Zero-based interval of `x`. Monotone in `x`.
    #[inline]
    fn slot(&self, x: f64) -> usize {
        if self.delta == 0.0 {
            return 0;
        }
        let raw = libm::ceil((x - self.x_first) / self.delta);
        // also catches NaN
        if !(raw >= 1.0) {
            return 0;
        }
        (raw as usize).min(self.ranks.len()) - 1
    }

    /// One-based interval index `k` with `q ∈ I_k`.
    pub fn locate_interval<K: Key>(&self, q: K) -> Result<usize, EspcError> {
        let x = q.to_f64();
        if !(x >= self.x_first && x <= self.x_last) {
            return Err(EspcError::OutOfRange {
                q: x,
                lo: self.x_first,
                hi: self.x_last,
            });
        }
        Ok(self.slot(x) + 1)
    }

    /// The piecewise-constant estimate `r̂(q)`: `0` left of the range, `n`
    /// right of it, `r̂_k` inside `I_k`.
    #[inline]
    pub fn predict<K: Key>(&self, q: K) -> f64 {
        let x = q.to_f64();
        if x < self.x_first {
            0.0
        } else if x > self.x_last {
            self.n as f64
        } else {
            self.ranks[self.slot(x)]
        }
    }

    /// Exact `rank(q)`: predict, start at `ceil(r̂_k)`, correct with
    /// exponential search. Comparisons include the two range checks.
    pub fn evaluate_rank<K: Key>(
        &self,
        keys: &KeyArray<K>,
        q: K,
    ) -> Result<SearchOutcome, EspcError> {
        self.check_len(keys)?;
        let n = keys.len();
        let outcome = |rank, comparisons| SearchOutcome {
            rank: Rank::new(rank),
            comparisons,
        };
        if q < keys.first() {
            return Ok(outcome(0, 1));
        }
        if q > keys.last() {
            return Ok(outcome(n, 2));
        }
        if self.is_degenerate() && keys.first() >= keys.last() {
            // every key equals q
            return Ok(outcome(n, 2));
        }
        let start = self.search_start(q.to_f64());
        let mut comparisons = 2;
        let rank = gallop(keys.as_slice(), start, q, &mut comparisons);
        Ok(outcome(rank, comparisons))
    }

    #[inline]
    fn search_start(&self, x: f64) -> usize {
        (libm::ceil(self.ranks[self.slot(x)]) as usize).min(self.n)
    }

    /// `ε(q) = |rank(q) - r̂(q)|` using the brute-force rank.
    pub fn approximation_error<K: Key>(&self, keys: &KeyArray<K>, q: K) -> Result<f64, EspcError> {
        self.check_len(keys)?;
        Ok(self.prediction_error(keys.rank_bruteforce(q), q))
    }

    /// `|rank - r̂(q)|` for an already known exact rank.
    #[inline]
    pub fn prediction_error<K: Key>(&self, rank: Rank, q: K) -> f64 {
        libm::fabs(rank.get() as f64 - self.predict(q))
    }

    /// Number of keys the index assigns to each interval, recovered from the
    /// stored estimates.
    pub fn interval_counts(&self) -> Vec<usize> {
        let mut below = 0.0;
        self.ranks
            .iter()
            .map(|&r| {
                let count = 2.0 * (r - below);
                below += count;
                count as usize
            })
            .collect()
    }

    fn check_len<K: Key>(&self, keys: &KeyArray<K>) -> Result<(), EspcError> {
        if keys.len() != self.n {
            return Err(EspcError::IndexMismatch {
                index_n: self.n,
                array_n: keys.len(),
            });
        }
        Ok(())
    }
}

/// Free-function form of [`EspcIndex::build`].
pub fn build_espc<K: Key>(keys: &KeyArray<K>, k: usize) -> Result<EspcIndex, EspcError> {
    EspcIndex::build(keys, k)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn four() -> KeyArray<f64> {
        KeyArray::new(vec![0.0, 1.0, 2.0, 3.0]).unwrap()
    }

    #[test]
    fn build_examples() {
        let idx = EspcIndex::build(&four(), 2).unwrap();
        assert_eq!(idx.delta(), 1.5);
        assert_eq!(idx.ranks(), &[1.0, 3.0]);
        assert_eq!(idx.interval_counts(), vec![2, 2]);

        let five = KeyArray::new(vec![10u64, 20, 30, 40, 50]).unwrap();
        let idx = EspcIndex::build(&five, 1).unwrap();
        assert_eq!(idx.delta(), 40.0);
        assert_eq!(idx.ranks(), &[2.5]);
    }

    #[test]
    fn degenerate_range() {
        let same = KeyArray::new(vec![7u64, 7, 7]).unwrap();
        for k in [1, 2, 50] {
            let idx = EspcIndex::build(&same, k).unwrap();
            assert!(idx.is_degenerate());
            assert_eq!(idx.ranks(), &[1.5]);
            assert_eq!(idx.evaluate_rank(&same, 7).unwrap().rank.get(), 3);
            assert_eq!(idx.evaluate_rank(&same, 6).unwrap().rank.get(), 0);
            assert_eq!(idx.evaluate_rank(&same, 8).unwrap().rank.get(), 3);
        }
    }

    #[test]
    fn zero_intervals_rejected() {
        assert!(matches!(
            EspcIndex::build(&four(), 0),
            Err(EspcError::InvalidK { k: 0, .. })
        ));
    }

    #[test]
    fn locate_examples() {
        let idx = EspcIndex::build(&four(), 2).unwrap();
        assert_eq!(idx.locate_interval(0.0).unwrap(), 1);
        assert_eq!(idx.locate_interval(1.5).unwrap(), 1);
        assert_eq!(idx.locate_interval(2.9).unwrap(), 2);
        assert_eq!(idx.locate_interval(3.0).unwrap(), 2);
        assert!(matches!(
            idx.locate_interval(3.5),
            Err(EspcError::OutOfRange { .. })
        ));
        assert!(idx.locate_interval(-0.1).is_err());
    }

    #[test]
    fn predict_examples() {
        let idx = EspcIndex::build(&four(), 2).unwrap();
        assert_eq!(idx.predict(-1.0), 0.0);
        assert_eq!(idx.predict(4.0), 4.0);
        assert_eq!(idx.predict(2.9), 3.0);
    }

    #[test]
    fn evaluate_examples() {
        let a = four();
        let idx = EspcIndex::build(&a, 2).unwrap();
        assert_eq!(idx.evaluate_rank(&a, -5.0).unwrap().rank.get(), 0);
        assert_eq!(idx.evaluate_rank(&a, 100.0).unwrap().rank.get(), 4);
        assert_eq!(idx.evaluate_rank(&a, 2.9).unwrap().rank.get(), 3);
    }

    #[test]
    fn evaluate_rejects_foreign_array() {
        let idx = EspcIndex::build(&four(), 2).unwrap();
        let other = KeyArray::new(vec![1.0, 2.0]).unwrap();
        assert_eq!(
            idx.evaluate_rank(&other, 1.0),
            Err(EspcError::IndexMismatch {
                index_n: 4,
                array_n: 2
            })
        );
    }

    #[test]
    fn approximation_error_examples() {
        let a = four();
        let idx = EspcIndex::build(&a, 2).unwrap();
        assert_eq!(idx.approximation_error(&a, -3.0).unwrap(), 0.0);
        assert_eq!(idx.approximation_error(&a, 9.0).unwrap(), 0.0);
        assert_eq!(idx.approximation_error(&a, 1.0).unwrap(), 1.0);
        assert_eq!(idx.approximation_error(&a, 2.9).unwrap(), 0.0);
    }

    #[test]
    fn estimates_follow_definition_not_running_half_sum() {
        // Three populated intervals: a running r[k-1] + N[k]/2 would give
        // [1, 2, 3]; the definition gives cum_{k-1} + N[k]/2.
        let a = KeyArray::new(vec![0u64, 1, 5, 6, 10, 11]).unwrap();
        let idx = EspcIndex::build(&a, 3).unwrap();
        assert_eq!(idx.interval_counts(), vec![2, 2, 2]);
        assert_eq!(idx.ranks(), &[1.0, 3.0, 5.0]);
    }

    #[test]
    fn large_u64_keys_stay_exact() {
        let base = 1u64 << 60;
        let a = KeyArray::new((0..100).map(|i| base + i * 3).collect()).unwrap();
        let idx = EspcIndex::build(&a, 7).unwrap();
        for q in base - 2..base + 305 {
            assert_eq!(idx.evaluate_rank(&a, q).unwrap().rank, a.rank_bruteforce(q));
        }
    }
}
