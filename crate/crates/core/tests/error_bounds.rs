//! Per-interval error bound and the cost of the corrective search.

use espc_core::search::exponential_search;
use espc_core::{EspcIndex, KeyArray};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// For q in I_k the prediction error never exceeds n_k / 2.
#[test]
fn interval_error_at_most_half_occupancy() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for _ in 0..3000 {
        let n = rng.random_range(1..=12);
        let raw: Vec<u64> = (0..n).map(|_| rng.random_range(0..16)).collect();
        let a = KeyArray::new(raw.iter().map(|&x| x as f64).collect()).unwrap();
        for k in 1..=n {
            let idx = EspcIndex::build(&a, k).unwrap();
            let counts = idx.interval_counts();
            let mut q = a.first();
            while q <= a.last() {
                let slot = idx.locate_interval(q).unwrap();
                let eps = idx.approximation_error(&a, q).unwrap();
                assert!(eps <= counts[slot - 1] as f64 / 2.0, "{raw:?} k={k} q={q}");
                q += 0.125;
            }
        }
    }
}

/// Mean comparisons grow logarithmically in the displacement from the start.
#[test]
fn exponential_cost_slope() {
    let a = KeyArray::new((0..1u64 << 16).collect()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for exp in 2..14 {
        let eps = 1usize << exp;
        let mut total = 0u64;
        let trials = 2000;
        for _ in 0..trials {
            let q = rng.random_range(eps as u64..(1u64 << 16) - eps as u64);
            let rank = q as usize + 1;
            let start = if rng.random_bool(0.5) {
                rank - eps
            } else {
                rank + eps
            };
            let out = exponential_search(&a, start, q).unwrap();
            assert_eq!(out.rank.get(), rank);
            total += u64::from(out.comparisons);
        }
        xs.push((eps as f64).log2());
        ys.push(total as f64 / trials as f64);
    }
    let slope = least_squares_slope(&xs, &ys);
    assert!((0.8..=2.5).contains(&slope), "slope {slope}");
}

fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}
