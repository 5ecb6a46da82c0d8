use alloc::vec;
use alloc::vec::Vec;

use super::StatsError;
use crate::keys::{Key, KeyArray};

/// Logarithm base for entropies and log-error bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LogBase {
    #[default]
    Natural,
    Two,
}

impl LogBase {
    pub fn log(self, x: f64) -> f64 {
        match self {
            LogBase::Natural => libm::log(x),
            LogBase::Two => libm::log2(x),
        }
    }
}

/// Probabilities `p_1..p_K` of `K` equal-length cells `J_k` over `[a, b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionProfile {
    a: f64,
    b: f64,
    probs: Vec<f64>,
}

const SUM_TOLERANCE: f64 = 1e-9;

impl PartitionProfile {
    pub fn new(a: f64, b: f64, probs: Vec<f64>) -> Result<Self, StatsError> {
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(StatsError::EmptySupport { a, b });
        }
        if probs.is_empty() {
            return Err(StatsError::InvalidK);
        }
        let sum: f64 = probs.iter().sum();
        if probs.iter().any(|p| !(*p >= 0.0)) || (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(StatsError::InvalidProbabilities { sum });
        }
        Ok(PartitionProfile { a, b, probs })
    }

    /// Uniform profile `p_k = 1/K`.
    pub fn uniform(a: f64, b: f64, k: usize) -> Result<Self, StatsError> {
        if k == 0 {
            return Err(StatsError::InvalidK);
        }
        PartitionProfile::new(a, b, vec![1.0 / k as f64; k])
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn k(&self) -> usize {
        self.probs.len()
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    /// Collision probability `Σ p_k²`.
    pub fn collision_probability(&self) -> f64 {
        self.probs.iter().map(|p| p * p).sum()
    }
}

/// Empirical `p̂_k = m_k / n` over `K` equal cells of `[a, b]`, using the same
/// clamped-ceiling assignment as the index.
pub fn partition_probabilities<K: Key>(
    keys: &KeyArray<K>,
    a: f64,
    b: f64,
    k: usize,
) -> Result<PartitionProfile, StatsError> {
    if k == 0 {
        return Err(StatsError::InvalidK);
    }
    if !(a < b) {
        return Err(StatsError::EmptySupport { a, b });
    }
    if keys.first().to_f64() < a || keys.last().to_f64() > b {
        return Err(StatsError::SupportViolation { a, b });
    }
    let width = (b - a) / k as f64;
    let mut counts = vec![0usize; k];
    for key in keys.iter() {
        let raw = libm::ceil((key.to_f64() - a) / width);
        let cell = if raw >= 1.0 {
            (raw as usize).min(k) - 1
        } else {
            0
        };
        counts[cell] += 1;
    }
    let n = keys.len() as f64;
    let probs = counts.into_iter().map(|c| c as f64 / n).collect();
    PartitionProfile::new(a, b, probs)
}

/// `H₂(P) = -log Σ p_k²`.
pub fn renyi_entropy_2(profile: &PartitionProfile, base: LogBase) -> f64 {
    -base.log(profile.collision_probability())
}
