//! Comparison-counting search primitives.
//!
//! Both searches return `rank(q)`, the number of keys `<= q`, so a run of
//! duplicates equal to `q` resolves to its rightmost position. Only key-vs-`q`
//! comparisons are counted.

use crate::keys::{Key, KeyArray, Rank};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum SearchError {
    #[error("start position {start} is outside [0, {n}]")]
    StartOutOfRange { start: usize, n: usize },
}

/// Result of an instrumented search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchOutcome {
    pub rank: Rank,
    pub comparisons: u32,
}

/// Plain binary search over the whole array. Uses at most
/// `ceil(log2(n + 1))` comparisons.
pub fn binary_search_rank<K: Key>(keys: &KeyArray<K>, q: K) -> SearchOutcome {
    let mut comparisons = 0;
    let rank = upper_bound(keys.as_slice(), 0, keys.len(), q, &mut comparisons);
    SearchOutcome {
        rank: Rank::new(rank),
        comparisons,
    }
}

/// Galloping search outward from `start`, then binary search inside the
/// bracket. Costs `O(log ε)` comparisons where `ε = |rank(q) - start|`.
pub fn exponential_search<K: Key>(
    keys: &KeyArray<K>,
    start: usize,
    q: K,
) -> Result<SearchOutcome, SearchError> {
    let n = keys.len();
    if start > n {
        return Err(SearchError::StartOutOfRange { start, n });
    }
    let mut comparisons = 0;
    let rank = gallop(keys.as_slice(), start, q, &mut comparisons);
    Ok(SearchOutcome {
        rank: Rank::new(rank),
        comparisons,
    })
}

/// Number of keys `<= q`, searching outward from `start` (`start <= len`).
pub(crate) fn gallop<K: Key>(keys: &[K], start: usize, q: K, comparisons: &mut u32) -> usize {
    let n = keys.len();
    debug_assert!(start <= n);

    // Answer lies in [lo, hi] after bracketing.
    let (lo, hi);
    if start < n && {
        *comparisons += 1;
        keys[start] <= q
    } {
        // rank > start
        let mut known = start + 1;
        let mut step = 1usize;
        loop {
            let probe = start + step;
            if probe >= n {
                lo = known;
                hi = n;
                break;
            }
            *comparisons += 1;
            if keys[probe] <= q {
                known = probe + 1;
                step <<= 1;
            } else {
                lo = known;
                hi = probe;
                break;
            }
        }
    } else {
        // rank <= start
        let mut bound = start;
        let mut step = 1usize;
        loop {
            if step > start {
                lo = 0;
                hi = bound;
                break;
            }
            let probe = start - step;
            *comparisons += 1;
            if keys[probe] > q {
                bound = probe;
                step <<= 1;
            } else {
                lo = probe + 1;
                hi = bound;
                break;
            }
        }
    }
    upper_bound(keys, lo, hi, q, comparisons)
}

/// First index in `[lo, hi)` holding a key `> q`, or `hi`.
#[inline]
pub(crate) fn upper_bound<K: Key>(
    keys: &[K],
    mut lo: usize,
    mut hi: usize,
    q: K,
    comparisons: &mut u32,
) -> usize {
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        *comparisons += 1;
        if keys[mid] <= q {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    lo
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use alloc::vec::Vec;

    fn odd() -> KeyArray<u64> {
        KeyArray::new(vec![1, 3, 5, 7]).unwrap()
    }

    #[test]
    fn binary_examples() {
        assert_eq!(binary_search_rank(&odd(), 5).rank.get(), 3);
        assert_eq!(binary_search_rank(&odd(), 0).rank.get(), 0);
        let single = KeyArray::new(vec![2u64]).unwrap();
        let out = binary_search_rank(&single, 2);
        assert_eq!(out.rank.get(), 1);
        assert!(out.comparisons >= 1);
    }

    #[test]
    fn exponential_examples() {
        let a = odd();
        assert_eq!(exponential_search(&a, 1, 7).unwrap().rank.get(), 4);
        let exact = exponential_search(&a, 3, 5).unwrap();
        assert_eq!(exact.rank.get(), 3);
        assert!(exact.comparisons <= 2);
        assert_eq!(exponential_search(&a, 2, 0).unwrap().rank.get(), 0);
    }

    #[test]
    fn start_out_of_range() {
        assert_eq!(
            exponential_search(&odd(), 5, 1),
            Err(SearchError::StartOutOfRange { start: 5, n: 4 })
        );
    }

    #[test]
    fn duplicates_resolve_rightmost() {
        let a = KeyArray::new(vec![1u64, 2, 2, 2, 2, 3]).unwrap();
        for start in 0..=a.len() {
            assert_eq!(exponential_search(&a, start, 2).unwrap().rank.get(), 5);
        }
        assert_eq!(binary_search_rank(&a, 2).rank.get(), 5);
    }

    #[test]
    fn binary_comparison_budget() {
        for n in 1..300u64 {
            let a = KeyArray::new((0..n).map(|k| 2 * k).collect()).unwrap();
            // ceil(log2(n + 1)) + 1
            let budget = (u64::BITS - n.leading_zeros()) + 1;
            for q in 0..=2 * n + 1 {
                let out = binary_search_rank(&a, q);
                assert_eq!(out.rank, a.rank_bruteforce(q));
                assert!(out.comparisons <= budget, "n={n} q={q}");
            }
        }
    }

    #[test]
    fn exhaustive_small_grid() {
        let keys: Vec<u64> = vec![0, 2, 2, 4, 6, 6, 6, 8, 10, 12];
        let a = KeyArray::new(keys).unwrap();
        for q in 0..=13 {
            let oracle = a.rank_bruteforce(q);
            for start in 0..=a.len() {
                let out = exponential_search(&a, start, q).unwrap();
                assert_eq!(out.rank, oracle, "start={start} q={q}");
                let eps = oracle.get().abs_diff(start) as f64;
                let budget = 2.0 * libm::ceil(libm::log2(eps + 2.0)) + 3.0;
                assert!(f64::from(out.comparisons) <= budget);
            }
        }
    }
}
