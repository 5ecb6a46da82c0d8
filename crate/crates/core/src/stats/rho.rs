//! Monte-Carlo estimate of `ρ_f = ∫ f² = E[f(X)]`: draw keys from the array
//! and average an estimated density at the draws.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::density::{fd_bin_width, histogram_density, kde_density};
use super::StatsError;
use crate::keys::{Key, KeyArray};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RhoMethod {
    /// Freedman–Diaconis histogram.
    #[default]
    Histogram,
    /// Gaussian KDE with Silverman bandwidth.
    Kernel,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RhoEstimate {
    pub value: f64,
    /// Number of Monte-Carlo draws `J`.
    pub samples: usize,
    pub method: RhoMethod,
    pub seed: u64,
    /// Bin width or kernel bandwidth that was used.
    pub smoothing: f64,
    /// The Freedman–Diaconis rule degenerated and the fallback width was used.
    pub fallback_width: bool,
}

/// `ρ̂ = (1/J) Σ f̂(z_j)` with `z_j` drawn uniformly with replacement from the
/// keys. Deterministic per `seed`; the sum runs in draw order.
pub fn estimate_rho<K: Key>(
    keys: &KeyArray<K>,
    samples: usize,
    method: RhoMethod,
    seed: u64,
) -> Result<RhoEstimate, StatsError> {
    if samples == 0 {
        return Err(StatsError::InvalidSampleCount);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = keys.len();
    let mut draw = || keys[rng.random_range(0..n)].to_f64();

    let (sum, smoothing, fallback_width) = match method {
        RhoMethod::Histogram => {
            let (width, fallback) = match fd_bin_width(keys) {
                Ok(w) => (w, false),
                Err(StatsError::DegenerateIQR { fallback }) => (fallback, true),
                Err(e) => return Err(e),
            };
            let hist = histogram_density(keys, width)?;
            let sum: f64 = (0..samples).map(|_| hist.density_at(draw())).sum();
            (sum, width, fallback)
        }
        RhoMethod::Kernel => {
            let kde = kde_density(keys, None)?;
            let grid = kde.gridded();
            let sum: f64 = (0..samples).map(|_| grid.density_at(draw())).sum();
            (sum, kde.bandwidth(), false)
        }
    };
    Ok(RhoEstimate {
        value: sum / samples as f64,
        samples,
        method,
        seed,
        smoothing,
        fallback_width,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_per_seed() {
        let a = KeyArray::new((0..5000).map(|i| ((i * 7919) % 5000) as f64).collect()).unwrap();
        let r1 = estimate_rho(&a, 1000, RhoMethod::Histogram, 3).unwrap();
        let r2 = estimate_rho(&a, 1000, RhoMethod::Histogram, 3).unwrap();
        assert_eq!(r1.value.to_bits(), r2.value.to_bits());
        let k1 = estimate_rho(&a, 1000, RhoMethod::Kernel, 3).unwrap();
        let k2 = estimate_rho(&a, 1000, RhoMethod::Kernel, 3).unwrap();
        assert_eq!(k1, k2);
    }

    #[test]
    fn zero_samples_rejected() {
        let a = KeyArray::new(vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(
            estimate_rho(&a, 0, RhoMethod::Histogram, 0),
            Err(StatsError::InvalidSampleCount)
        );
    }

    #[test]
    fn evenly_spaced_keys_give_inverse_span() {
        let a = KeyArray::new((0..10_000).map(|i| i as f64 / 9999.0 * 4.0).collect()).unwrap();
        let r = estimate_rho(&a, 20_000, RhoMethod::Histogram, 9).unwrap();
        assert!((r.value - 0.25).abs() < 0.01, "{}", r.value);
    }
}
