//! Interval-count policies matching the asymptotic regimes of the index.

use super::EspcError;

/// How many intervals to build for `n` keys.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SizingPolicy {
    /// `K = n`: constant expected query time for bounded densities.
    Linear,
    /// `K = ceil(n / log2 n)`: `O(log log n)` expected time with sublinear space.
    Sublinear,
    /// `K = ceil(n * sqrt(n ln n))`, for unbounded support with finite mean and
    /// variance.
    Chebyshev { mean: f64, std_dev: f64 },
    /// `K = ceil(n ln n)`, for subexponential tails with rate `c`.
    Subexponential { c: f64 },
}

impl SizingPolicy {
    fn validate(&self) -> Result<(), EspcError> {
        match *self {
            SizingPolicy::Chebyshev { mean, std_dev } => {
                if !(mean > 0.0 && mean.is_finite()) {
                    return Err(EspcError::InvalidPolicyParams("mean must be positive"));
                }
                if !(std_dev > 0.0 && std_dev.is_finite()) {
                    return Err(EspcError::InvalidPolicyParams(
                        "standard deviation must be positive",
                    ));
                }
            }
            SizingPolicy::Subexponential { c } => {
                if !(c > 0.0 && c.is_finite()) {
                    return Err(EspcError::InvalidPolicyParams("C must be positive"));
                }
            }
            SizingPolicy::Linear | SizingPolicy::Sublinear => {}
        }
        Ok(())
    }
}

/// Interval count for `n >= 2` keys under `policy`.
pub fn choose_k(policy: SizingPolicy, n: usize) -> Result<usize, EspcError> {
    policy.validate()?;
    if n < 2 {
        return Err(EspcError::InvalidPolicyParams("sizing needs n >= 2"));
    }
    let nf = n as f64;
    let k = match policy {
        SizingPolicy::Linear => return Ok(n),
        SizingPolicy::Sublinear => libm::ceil(nf / libm::log2(nf)),
        SizingPolicy::Chebyshev { .. } => libm::ceil(nf * libm::sqrt(nf * libm::log(nf))),
        SizingPolicy::Subexponential { .. } => libm::ceil(nf * libm::log(nf)),
    };
    if !(k < usize::MAX as f64) {
        return Err(EspcError::InvalidPolicyParams("interval count overflows"));
    }
    Ok((k as usize).max(1))
}
