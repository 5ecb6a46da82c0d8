//! Closed-form bounds on the expected prediction error.

use super::{LogBase, PartitionProfile};

/// `E[ε] <= (3n/2) Σ p_k²`.
pub fn error_bound_partition(n: usize, profile: &PartitionProfile) -> f64 {
    1.5 * n as f64 * profile.collision_probability()
}

/// `E[ε] <= (3(b - a)/2) ρ_f n / K`.
pub fn error_bound_rho(n: usize, k: usize, a: f64, b: f64, rho: f64) -> f64 {
    1.5 * (b - a) * rho * n as f64 / k as f64
}

/// Bound when queries follow a density `g` different from the key density
/// `f`: `(3(b - a)/2) sqrt(ρ_f ρ_g) n / K`.
pub fn error_bound_query_dist(n: usize, k: usize, a: f64, b: f64, rho_f: f64, rho_g: f64) -> f64 {
    1.5 * (b - a) * libm::sqrt(rho_f * rho_g) * n as f64 / k as f64
}

/// `E[log ε] <= log(3n/2) - H₂(P)`, in the given base.
pub fn log_error_entropy_bound(n: usize, profile: &PartitionProfile, base: LogBase) -> f64 {
    base.log(1.5 * n as f64) - super::renyi_entropy_2(profile, base)
}
