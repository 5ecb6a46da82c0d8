//! Two-layer equal-probability variant.
//!
//! The bottom layer splits the keys into `K` buckets of (nearly) equal
//! occupancy using empirical quantiles `t_i = A[ceil(i n / K)]`. Bucket
//! boundaries are themselves a sorted array `A'`, indexed by an ordinary
//! [`EspcIndex`] with `K_top` intervals. A query finds its bucket as
//! `rank_{A'}(q)` through the top index, then predicts and corrects within
//! the bucket exactly like the flat index.
//!
//! Bucket `b` starts at array position `s_b = ceil((b - 1) n / K)`, so bucket
//! estimates are recomputed from `(n, K)` rather than stored.

use crate::keys::{Key, KeyArray, Rank};
use crate::search::{gallop, SearchOutcome};

use super::{EspcError, EspcIndex, SLOT_BYTES};

#[derive(Debug, Clone, PartialEq)]
pub struct HierIndex<K> {
    boundaries: KeyArray<K>,
    top: EspcIndex,
    n: usize,
}

impl<K: Key> HierIndex<K> {
    pub fn build(keys: &KeyArray<K>, k: usize, k_top: usize) -> Result<Self, EspcError> {
        let n = keys.len();
        if k == 0 || k > n {
            return Err(EspcError::InvalidK {
                k,
                reason: "bottom fan-out must lie in [1, n]",
            });
        }
        if k_top == 0 {
            return Err(EspcError::InvalidK {
                k: k_top,
                reason: "top index needs at least one interval",
            });
        }
        let boundaries = (0..k).map(|i| keys[bucket_start(i, n, k)]).collect();
        let boundaries = KeyArray::new(boundaries).expect("quantiles of a valid array are valid");
        let top = EspcIndex::build(&boundaries, k_top)?;
        Ok(HierIndex { boundaries, top, n })
    }

    /// Bottom fan-out `K`.
    pub fn k(&self) -> usize {
        self.boundaries.len()
    }

    pub fn boundaries(&self) -> &KeyArray<K> {
        &self.boundaries
    }

    pub fn top(&self) -> &EspcIndex {
        &self.top
    }

    /// Boundary slots plus the serialized top index.
    pub fn space_bytes(&self) -> usize {
        SLOT_BYTES * self.k() + self.top.serialized_len()
    }

    /// Slot count comparable with a flat index: `K + K_top`.
    pub fn slots(&self) -> usize {
        self.k() + self.top.k()
    }

    /// Keys per bucket.
    pub fn bucket_sizes(&self) -> impl Iterator<Item = usize> + '_ {
        let (n, k) = (self.n, self.k());
        (1..=k).map(move |b| bucket_end(b, n, k) - bucket_start(b - 1, n, k))
    }

    /// Bucket `b = rank_{A'}(q)` found through the top index, with the
    /// comparisons spent.
    fn bucket(&self, q: K) -> (usize, u32) {
        let top = self
            .top
            .evaluate_rank(&self.boundaries, q)
            .expect("top index is built over the boundaries");
        (top.rank.get(), top.comparisons)
    }

    /// Bottom-layer estimate of `rank(q)` and the comparisons spent in the top
    /// layer to find the bucket.
    pub fn predict(&self, q: K) -> (f64, u32) {
        let (b, comparisons) = self.bucket(q);
        if b == 0 {
            return (0.0, comparisons);
        }
        let (n, k) = (self.n, self.k());
        // t_{b-1} <= q < t_b  gives  rank(q) in [s_b + 1, e_b]
        let lo = bucket_start(b - 1, n, k) + 1;
        let hi = bucket_end(b, n, k);
        ((lo + hi) as f64 / 2.0, comparisons)
    }

    /// Exact `rank(q)`. Comparisons are summed over both layers.
    pub fn evaluate_rank(&self, keys: &KeyArray<K>, q: K) -> Result<SearchOutcome, EspcError> {
        if keys.len() != self.n {
            return Err(EspcError::IndexMismatch {
                index_n: self.n,
                array_n: keys.len(),
            });
        }
        if q > keys.last() {
            return Ok(SearchOutcome {
                rank: Rank::new(self.n),
                comparisons: 1,
            });
        }
        let (estimate, mut comparisons) = self.predict(q);
        comparisons += 1;
        let rank = if estimate == 0.0 {
            0
        } else {
            let start = (libm::ceil(estimate) as usize).min(self.n);
            gallop(keys.as_slice(), start, q, &mut comparisons)
        };
        Ok(SearchOutcome {
            rank: Rank::new(rank),
            comparisons,
        })
    }
}

/// `ceil(i n / k)` — array position of boundary `t_i`.
#[inline]
fn bucket_start(i: usize, n: usize, k: usize) -> usize {
    (i * n).div_ceil(k)
}

/// One past the last position of bucket `b` (1-based).
#[inline]
fn bucket_end(b: usize, n: usize, k: usize) -> usize {
    if b == k {
        n
    } else {
        bucket_start(b, n, k)
    }
}

/// Free-function form of [`HierIndex::build`].
pub fn build_equal_probability<K: Key>(
    keys: &KeyArray<K>,
    k: usize,
    k_top: usize,
) -> Result<HierIndex<K>, EspcError> {
    HierIndex::build(keys, k, k_top)
}

/// Free-function form of [`HierIndex::evaluate_rank`].
pub fn evaluate_rank_hier<K: Key>(
    index: &HierIndex<K>,
    keys: &KeyArray<K>,
    q: K,
) -> Result<SearchOutcome, EspcError> {
    index.evaluate_rank(keys, q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    fn ten() -> KeyArray<u64> {
        KeyArray::new((0..10).collect()).unwrap()
    }

    #[test]
    fn quantile_boundaries() {
        let h = HierIndex::build(&ten(), 2, 1).unwrap();
        assert_eq!(h.boundaries().as_slice(), &[0, 5]);
        let single = HierIndex::build(&ten(), 1, 1).unwrap();
        assert_eq!(single.boundaries().as_slice(), &[0]);
        assert_eq!(single.bucket_sizes().collect::<Vec<_>>(), [10]);
    }

    #[test]
    fn evaluate_examples() {
        let a = ten();
        let h = HierIndex::build(&a, 2, 1).unwrap();
        assert_eq!(h.evaluate_rank(&a, 7).unwrap().rank.get(), 8);
        assert_eq!(h.evaluate_rank(&a, 9).unwrap().rank.get(), 10);
        let shifted = KeyArray::new((5..15).collect()).unwrap();
        let h = HierIndex::build(&shifted, 3, 2).unwrap();
        assert_eq!(h.evaluate_rank(&shifted, 4).unwrap().rank.get(), 0);
    }

    #[test]
    fn invalid_fan_out() {
        assert!(HierIndex::build(&ten(), 0, 1).is_err());
        assert!(HierIndex::build(&ten(), 11, 1).is_err());
        assert!(HierIndex::build(&ten(), 2, 0).is_err());
    }

    #[test]
    fn duplicate_boundaries_stay_exact() {
        let a = KeyArray::new([1u64, 1, 1, 1, 1, 1, 2, 2, 3, 9, 9, 9].to_vec()).unwrap();
        for k in 1..=a.len() {
            for k_top in 1..5 {
                let h = HierIndex::build(&a, k, k_top).unwrap();
                for q in 0..11 {
                    assert_eq!(h.evaluate_rank(&a, q).unwrap().rank, a.rank_bruteforce(q));
                }
            }
        }
    }

    #[test]
    fn bottom_error_within_half_bucket() {
        let a = KeyArray::new((0..97u64).map(|i| i * i).collect()).unwrap();
        let h = HierIndex::build(&a, 9, 3).unwrap();
        let largest = h.bucket_sizes().max().unwrap() as f64;
        for q in 0..9500 {
            let (estimate, _) = h.predict(q);
            let err = (a.rank_bruteforce(q).get() as f64 - estimate).abs();
            assert!(err <= largest / 2.0, "q={q}");
        }
    }
}
