//! Statistics behind the error analysis: partition probabilities, order-2
//! Rényi entropy, expected-error bounds, density estimates and the
//! Monte-Carlo estimator of `ρ_f = ∫ f²`.

mod bounds;
mod density;
mod partition;
mod rho;

use thiserror::Error;

pub use bounds::{
    error_bound_partition, error_bound_query_dist, error_bound_rho, log_error_entropy_bound,
};
pub use density::{
    fd_bin_width, histogram_density, kde_density, quantile_type7, silverman_bandwidth,
    DensityEstimate, GriddedDensity, Histogram, KernelDensity,
};
pub use partition::{partition_probabilities, renyi_entropy_2, LogBase, PartitionProfile};
pub use rho::{estimate_rho, RhoEstimate, RhoMethod};

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum StatsError {
    #[error("keys must lie inside the support [{a}, {b}]")]
    SupportViolation { a: f64, b: f64 },
    #[error("support bounds must satisfy a < b (got [{a}, {b}])")]
    EmptySupport { a: f64, b: f64 },
    #[error("interval count must be positive")]
    InvalidK,
    #[error("probabilities must be non-negative and sum to 1 (sum = {sum})")]
    InvalidProbabilities { sum: f64 },
    #[error("need at least {needed} keys, got {got}")]
    TooFewKeys { needed: usize, got: usize },
    #[error("interquartile range is zero; fallback width {fallback}")]
    DegenerateIQR { fallback: f64 },
    #[error("bin width or bandwidth must be positive and finite (got {0})")]
    InvalidWidth(f64),
    #[error("sample count J must be positive")]
    InvalidSampleCount,
}
