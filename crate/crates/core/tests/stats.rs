//! Statistical checks against analytic densities.

use espc_core::stats::{
    error_bound_partition, error_bound_rho, estimate_rho, kde_density, partition_probabilities,
    renyi_entropy_2, LogBase, PartitionProfile, RhoMethod,
};
use espc_core::KeyArray;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, StandardNormal};

fn sample<D: Distribution<f64>>(dist: D, n: usize, seed: u64) -> KeyArray<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    KeyArray::new(dist.sample_iter(&mut rng).take(n).collect()).unwrap()
}

fn uniform(n: usize, seed: u64) -> KeyArray<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    KeyArray::new((0..n).map(|_| rng.random::<f64>()).collect()).unwrap()
}

#[test]
fn rho_of_uniform_is_one() {
    let a = uniform(1_000_000, 1);
    let r = estimate_rho(&a, 100_000, RhoMethod::Histogram, 11).unwrap();
    assert!((r.value - 1.0).abs() <= 0.05, "{}", r.value);
}

#[test]
fn rho_of_beta22_is_six_fifths() {
    // ∫ (6x(1-x))² dx = 36/30
    let a = sample(Beta::new(2.0, 2.0).unwrap(), 1_000_000, 2);
    let r = estimate_rho(&a, 100_000, RhoMethod::Histogram, 12).unwrap();
    assert!((r.value - 1.2).abs() <= 0.06, "{}", r.value);
    let k = estimate_rho(&a, 100_000, RhoMethod::Kernel, 12).unwrap();
    assert!((k.value - 1.2).abs() <= 0.06, "{}", k.value);
}

#[test]
fn kde_recovers_standard_normal_peak() {
    let a = sample(StandardNormal, 100_000, 3);
    let kde = kde_density(&a, None).unwrap();
    let peak = kde.density_at(0.0);
    assert!((peak - 0.398_942).abs() <= 0.02, "{peak}");
}

#[test]
fn kde_integrates_to_one() {
    let a = sample(Beta::new(2.0, 5.0).unwrap(), 2000, 4);
    let kde = kde_density(&a, None).unwrap();
    let (lo, hi) = kde.support();
    // composite Simpson
    let m = 4000;
    let h = (hi - lo) / m as f64;
    let mut acc = kde.density_at(lo) + kde.density_at(hi);
    for i in 1..m {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * kde.density_at(lo + i as f64 * h);
    }
    let integral = acc * h / 3.0;
    assert!((integral - 1.0).abs() <= 0.01, "{integral}");
}

#[test]
fn renyi_entropy_is_maximal_at_uniform() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..1000 {
        let k = rng.random_range(1..50);
        let w: Vec<f64> = (0..k).map(|_| rng.random::<f64>().powi(3)).collect();
        let total: f64 = w.iter().sum();
        if total == 0.0 {
            continue;
        }
        let p = PartitionProfile::new(0.0, 1.0, w.iter().map(|x| x / total).collect()).unwrap();
        let h = renyi_entropy_2(&p, LogBase::Natural);
        assert!(h <= (k as f64).ln() + 1e-12);
    }
}

#[test]
fn partition_bound_tracks_rho_bound() {
    let a = sample(Beta::new(2.0, 2.0).unwrap(), 200_000, 6);
    let rho = estimate_rho(&a, 100_000, RhoMethod::Histogram, 1)
        .unwrap()
        .value;
    for k in [10, 100, 1000] {
        let p = partition_probabilities(&a, 0.0, 1.0, k).unwrap();
        let lhs = error_bound_partition(a.len(), &p);
        let rhs = error_bound_rho(a.len(), k, 0.0, 1.0, rho);
        assert!(lhs <= rhs * 1.1, "k={k}: {lhs} vs {rhs}");
    }
}

fn stderr_across_seeds(a: &KeyArray<f64>, samples: usize) -> f64 {
    let values: Vec<f64> = (0..30)
        .map(|s| {
            estimate_rho(a, samples, RhoMethod::Histogram, 1000 + s)
                .unwrap()
                .value
        })
        .collect();
    let mean = values.iter().sum::<f64>() / 30.0;
    (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 29.0).sqrt()
}

#[test]
fn rho_spread_halves_when_samples_quadruple() {
    let a = sample(Beta::new(2.0, 5.0).unwrap(), 200_000, 8);
    let ratio = stderr_across_seeds(&a, 2000) / stderr_across_seeds(&a, 8000);
    assert!((ratio - 2.0).abs() <= 0.6, "ratio {ratio}");
}

#[test]
fn rho_scales_with_the_span() {
    let a = sample(Beta::new(2.0, 2.0).unwrap(), 100_000, 9);
    let (lo, hi) = (a.first(), a.last());
    let span = 40.0;
    let stretched = KeyArray::new(
        a.iter()
            .map(|x| 3.0 + span * (x - lo) / (hi - lo))
            .collect(),
    )
    .unwrap();
    let unit = KeyArray::new(a.iter().map(|x| (x - lo) / (hi - lo)).collect()).unwrap();
    let r_unit = estimate_rho(&unit, 50_000, RhoMethod::Histogram, 4)
        .unwrap()
        .value;
    let r_wide = estimate_rho(&stretched, 50_000, RhoMethod::Histogram, 4)
        .unwrap()
        .value;
    assert!((r_wide * span / r_unit - 1.0).abs() < 1e-6);
}
