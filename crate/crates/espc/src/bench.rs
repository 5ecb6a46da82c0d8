//! Error-versus-K experiments.
//!
//! For every `K` in the grid the harness builds an index, answers `Q` queries,
//! and records the mean prediction error next to the expected-error bound
//! `(3(b - a)/2) ρ̂ n / K`. Comparisons are the cost metric; wall-clock fields
//! are informational only.

use std::io;
use std::path::{Path, PathBuf};
use std::time::Instant;

use espc_core::stats::{
    error_bound_query_dist, error_bound_rho, estimate_rho, RhoMethod, StatsError,
};
use espc_core::{EspcError, EspcIndex, HierIndex, Key, KeyArray};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{generate, DataError, Dataset, DatasetKind, DatasetSpec};
use crate::with_keys;

const QUERY_CHUNK: usize = 4096;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Index(#[from] EspcError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
}

/// Where queries come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum QueryDist {
    /// Keys sampled with replacement from the indexed array.
    #[default]
    Same,
    /// Fresh draws from another distribution on the rescaled `[0, 1]` range.
    Spec(DatasetSpec),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum RhoMethodName {
    #[default]
    Histogram,
    Kernel,
}

impl From<RhoMethodName> for RhoMethod {
    fn from(m: RhoMethodName) -> Self {
        match m {
            RhoMethodName::Histogram => RhoMethod::Histogram,
            RhoMethodName::Kernel => RhoMethod::Kernel,
        }
    }
}

/// One experiment. Every key is optional in the JSON form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchConfig {
    pub dataset: DatasetSpec,
    /// Subsample size; `None` keeps every key.
    pub n_sub: Option<usize>,
    pub k_grid: Vec<usize>,
    /// Query count `Q`.
    pub queries: usize,
    pub query_dist: QueryDist,
    /// One full sweep of the grid per seed.
    pub seeds: Vec<u64>,
    /// Map keys onto `[0, 1]` before indexing, so `b - a = 1`.
    pub rescale: bool,
    pub rho_method: RhoMethodName,
    /// Monte-Carlo draws `J` for `ρ̂`.
    pub rho_samples: usize,
    pub output: Option<PathBuf>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            dataset: DatasetSpec::synthetic(DatasetKind::Uniform, 1_000_000, 1),
            n_sub: Some(1_000_000),
            k_grid: vec![100, 1_000, 10_000, 100_000],
            queries: 100_000,
            query_dist: QueryDist::Same,
            seeds: vec![1],
            rescale: true,
            rho_method: RhoMethodName::Histogram,
            rho_samples: 100_000,
            output: None,
        }
    }
}

impl BenchConfig {
    pub const FULL_K_GRID: [usize; 6] = [1_000, 5_000, 10_000, 50_000, 100_000, 200_000];

    /// Full-size protocol: 10⁷ keys, 3·10⁷ queries, the six-point grid.
    pub fn full_scale(mut self) -> Self {
        self.n_sub = Some(10_000_000);
        if self.dataset.kind != DatasetKind::File {
            self.dataset.n = self.dataset.n.max(10_000_000);
        }
        self.queries = 30_000_000;
        self.k_grid = Self::FULL_K_GRID.to_vec();
        self
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        if self.k_grid.is_empty() {
            return Err(BenchError::Config("k_grid must not be empty".into()));
        }
        if self.k_grid.contains(&0) || !self.k_grid.windows(2).all(|w| w[0] < w[1]) {
            return Err(BenchError::Config(
                "k_grid must be positive and strictly ascending".into(),
            ));
        }
        if self.queries == 0 {
            return Err(BenchError::Config("queries must be at least 1".into()));
        }
        if self.seeds.is_empty() {
            return Err(BenchError::Config("at least one seed is required".into()));
        }
        if self.rho_samples == 0 {
            return Err(BenchError::Config("rho_samples must be at least 1".into()));
        }
        if matches!(self.query_dist, QueryDist::Spec(_)) && !self.rescale {
            return Err(BenchError::Config(
                "a separate query distribution needs rescale = true".into(),
            ));
        }
        Ok(())
    }
}

/// One row of the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub dataset: String,
    pub n: usize,
    pub k: usize,
    pub mean_eps: f64,
    pub bound: f64,
    pub mean_comparisons: f64,
    pub p50_comparisons: u32,
    pub p99_comparisons: u32,
    pub space_bytes: usize,
    pub build_ms: f64,
    pub query_ns: f64,
    /// `ρ̂` in the bound; `sqrt(ρ̂_f ρ̂_g)` when queries follow another density.
    pub rho: f64,
    pub seed: u64,
}

impl BenchRecord {
    pub const COLUMNS: [&'static str; 13] = [
        "dataset",
        "n",
        "k",
        "mean_eps",
        "bound",
        "mean_comparisons",
        "p50_comparisons",
        "p99_comparisons",
        "space_bytes",
        "build_ms",
        "query_ns",
        "rho",
        "seed",
    ];

    pub fn violates_bound(&self) -> bool {
        use std::cmp::Ordering::{Equal, Less};
        !matches!(self.mean_eps.partial_cmp(&self.bound), Some(Less | Equal))
    }
}

/// Serialized index size in bytes: header plus one slot per interval.
pub fn measure_space(index: &EspcIndex) -> usize {
    index.serialized_len()
}

/// Mean prediction error and comparison statistics of one index over a query
/// set.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryStats {
    pub mean_eps: f64,
    pub mean_comparisons: f64,
    pub p50_comparisons: u32,
    pub p99_comparisons: u32,
    pub elapsed_ns: f64,
}

/// Answers every query through `index`, in parallel chunks. Sums are reduced
/// in chunk order, so results do not depend on the thread count.
pub fn run_queries<K: Key>(
    index: &EspcIndex,
    keys: &KeyArray<K>,
    queries: &[K],
) -> Result<QueryStats, BenchError> {
    let started = Instant::now();
    let per_chunk: Vec<(f64, Vec<u32>)> = queries
        .par_chunks(QUERY_CHUNK)
        .map(|chunk| {
            let mut eps = 0.0;
            let mut comparisons = Vec::with_capacity(chunk.len());
            for &q in chunk {
                let out = index.evaluate_rank(keys, q)?;
                eps += index.prediction_error(out.rank, q);
                comparisons.push(out.comparisons);
            }
            Ok((eps, comparisons))
        })
        .collect::<Result<_, EspcError>>()?;
    Ok(summarize(per_chunk, queries.len(), started))
}

fn summarize(per_chunk: Vec<(f64, Vec<u32>)>, count: usize, started: Instant) -> QueryStats {
    let elapsed_ns = started.elapsed().as_nanos() as f64;
    let q = count as f64;
    let mean_eps = per_chunk.iter().map(|(e, _)| e).sum::<f64>() / q;
    let mut comparisons: Vec<u32> = per_chunk.into_iter().flat_map(|(_, c)| c).collect();
    let mean_comparisons = comparisons.iter().map(|&c| f64::from(c)).sum::<f64>() / q;
    comparisons.sort_unstable();
    QueryStats {
        mean_eps,
        mean_comparisons,
        p50_comparisons: percentile(&comparisons, 0.50),
        p99_comparisons: percentile(&comparisons, 0.99),
        elapsed_ns,
    }
}

/// Same as [`run_queries`] for the two-layer index. The error is measured
/// against the bottom-layer estimate.
pub fn run_hier_queries<K: Key>(
    index: &HierIndex<K>,
    keys: &KeyArray<K>,
    queries: &[K],
) -> Result<QueryStats, BenchError> {
    let started = Instant::now();
    let per_chunk: Vec<(f64, Vec<u32>)> = queries
        .par_chunks(QUERY_CHUNK)
        .map(|chunk| {
            let mut eps = 0.0;
            let mut comparisons = Vec::with_capacity(chunk.len());
            for &q in chunk {
                let out = index.evaluate_rank(keys, q)?;
                let (estimate, _) = index.predict(q);
                eps += (out.rank.get() as f64 - estimate).abs();
                comparisons.push(out.comparisons);
            }
            Ok((eps, comparisons))
        })
        .collect::<Result<_, EspcError>>()?;
    Ok(summarize(per_chunk, queries.len(), started))
}

fn percentile(sorted: &[u32], p: f64) -> u32 {
    let rank = ((p * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    sorted[rank - 1]
}

/// `count` keys drawn uniformly with replacement.
pub fn sample_queries<K: Key>(keys: &KeyArray<K>, count: usize, seed: u64) -> Vec<K> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| keys[rng.random_range(0..keys.len())])
        .collect()
}

/// Runs the configured sweep and returns one record per `(seed, K)`.
pub fn run_error_experiment(cfg: &BenchConfig) -> Result<Vec<BenchRecord>, BenchError> {
    cfg.validate()?;
    let label = cfg.dataset.label();
    let mut dataset = cfg.dataset.load()?;
    if let Some(m) = cfg.n_sub.filter(|&m| m < dataset.len()) {
        dataset = dataset.subsample(m, cfg.dataset.seed ^ 0x5eed)?;
    }
    let dataset = if cfg.rescale {
        Dataset::Float64(dataset.rescale_unit()?)
    } else {
        dataset
    };

    let mut records = Vec::new();
    for &seed in &cfg.seeds {
        let rows = match (&dataset, &cfg.query_dist) {
            (Dataset::Float64(keys), QueryDist::Spec(spec)) => {
                let spec = DatasetSpec {
                    n: cfg.queries,
                    seed: spec.seed ^ seed,
                    ..spec.clone()
                };
                let queries = generate(&spec)?;
                let rho_g = estimate_rho(&queries, cfg.rho_samples, cfg.rho_method.into(), seed)?;
                sweep(
                    cfg,
                    &label,
                    keys,
                    queries.as_slice(),
                    Some(rho_g.value),
                    seed,
                )?
            }
            (_, QueryDist::Spec(_)) => unreachable!("validated: query spec needs rescale"),
            (dataset, QueryDist::Same) => with_keys!(dataset, keys => {
                let queries = sample_queries(keys, cfg.queries, seed.wrapping_add(1));
                sweep(cfg, &label, keys, &queries, None, seed)?
            }),
        };
        records.extend(rows);
    }
    Ok(records)
}

fn sweep<K: Key>(
    cfg: &BenchConfig,
    label: &str,
    keys: &KeyArray<K>,
    queries: &[K],
    rho_query: Option<f64>,
    seed: u64,
) -> Result<Vec<BenchRecord>, BenchError> {
    let rho_f = estimate_rho(keys, cfg.rho_samples, cfg.rho_method.into(), seed)?.value;
    let (a, b) = (keys.first().to_f64(), keys.last().to_f64());
    let n = keys.len();
    cfg.k_grid
        .iter()
        .map(|&k| {
            let started = Instant::now();
            let index = EspcIndex::build(keys, k)?;
            let build_ms = started.elapsed().as_secs_f64() * 1e3;
            let stats = run_queries(&index, keys, queries)?;
            let (bound, rho) = match rho_query {
                None => (error_bound_rho(n, k, a, b, rho_f), rho_f),
                Some(rho_g) => (
                    error_bound_query_dist(n, k, a, b, rho_f, rho_g),
                    (rho_f * rho_g).sqrt(),
                ),
            };
            Ok(BenchRecord {
                dataset: label.to_owned(),
                n,
                k,
                mean_eps: stats.mean_eps,
                bound,
                mean_comparisons: stats.mean_comparisons,
                p50_comparisons: stats.p50_comparisons,
                p99_comparisons: stats.p99_comparisons,
                space_bytes: measure_space(&index),
                build_ms,
                query_ns: stats.elapsed_ns / queries.len() as f64,
                rho,
                seed,
            })
        })
        .collect()
}

/// Writes a header row and one row per record.
pub fn write_csv<W: io::Write>(records: &[BenchRecord], out: W) -> Result<(), BenchError> {
    let mut writer = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out);
    writer.write_record(BenchRecord::COLUMNS)?;
    for r in records {
        writer.serialize(r)?;
    }
    writer.flush()?;
    Ok(())
}

pub fn emit_csv(records: &[BenchRecord], path: &Path) -> Result<(), BenchError> {
    write_csv(records, std::fs::File::create(path)?)
}

pub fn read_csv(path: &Path) -> Result<Vec<BenchRecord>, BenchError> {
    let mut reader = csv::Reader::from_path(path)?;
    Ok(reader.deserialize().collect::<Result<_, _>>()?)
}
