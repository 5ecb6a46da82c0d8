//! Datasets: seeded synthetic generators, SOSD-layout files, rescaling and
//! subsampling.
//!
//! A data file is little-endian: an unsigned 64-bit count `n` followed by `n`
//! 8-byte keys. In [`KeyMode::UInt64`] the keys are unsigned integers (the
//! SOSD layout); in [`KeyMode::Float64`] the same words hold IEEE doubles.
//! Paths ending in `.gz` are gzip-compressed transparently.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use espc_core::{Key, KeyArray, KeyError, KeyMode};
use flate2::read::GzDecoder;
use flate2::write::GzEncoder;
use flate2::Compression;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, LogNormal, Normal, StandardUniform};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest integer grid used when writing generated doubles as `u64` keys.
pub const UINT_GRID: f64 = (1u64 << 53) as f64;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
    #[error("file is truncated: expected {expected} bytes, found {actual}")]
    TruncatedFile { expected: u64, actual: u64 },
    #[error("header claims {claimed} keys but the file holds {actual}")]
    CountMismatch { claimed: u64, actual: u64 },
    #[error("invalid dataset parameters: {0}")]
    InvalidParams(String),
    #[error("keys span a single value; cannot rescale")]
    DegenerateRange,
    #[error("subsample size {m} must lie in [1, {n}]")]
    InvalidM { m: usize, n: usize },
    #[error(transparent)]
    Key(#[from] KeyError),
}

impl DataError {
    /// Whether the failure came from the file system or a malformed file.
    pub fn is_io(&self) -> bool {
        matches!(
            self,
            DataError::Io(_) | DataError::TruncatedFile { .. } | DataError::CountMismatch { .. }
        )
    }
}

/// A key array in whichever mode it was loaded.
#[derive(Debug, Clone, PartialEq)]
pub enum Dataset {
    UInt64(KeyArray<u64>),
    Float64(KeyArray<f64>),
}

/// Runs `$body` with `$keys` bound to the typed key array.
#[macro_export]
macro_rules! with_keys {
    ($dataset:expr, $keys:ident => $body:expr) => {
        match $dataset {
            $crate::data::Dataset::UInt64($keys) => $body,
            $crate::data::Dataset::Float64($keys) => $body,
        }
    };
}

impl Dataset {
    pub fn mode(&self) -> KeyMode {
        match self {
            Dataset::UInt64(_) => KeyMode::UInt64,
            Dataset::Float64(_) => KeyMode::Float64,
        }
    }

    pub fn len(&self) -> usize {
        with_keys!(self, a => a.len())
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Rescaled copy on `[0, 1]`.
    pub fn rescale_unit(&self) -> Result<KeyArray<f64>, DataError> {
        with_keys!(self, a => rescale_unit(a))
    }

    pub fn subsample(&self, m: usize, seed: u64) -> Result<Dataset, DataError> {
        Ok(match self {
            Dataset::UInt64(a) => Dataset::UInt64(subsample(a, m, seed)?),
            Dataset::Float64(a) => Dataset::Float64(subsample(a, m, seed)?),
        })
    }

    pub fn write(&self, path: &Path) -> Result<(), DataError> {
        with_keys!(self, a => write_sosd(path, a))
    }
}

impl From<KeyArray<u64>> for Dataset {
    fn from(a: KeyArray<u64>) -> Self {
        Dataset::UInt64(a)
    }
}

impl From<KeyArray<f64>> for Dataset {
    fn from(a: KeyArray<f64>) -> Self {
        Dataset::Float64(a)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum DatasetKind {
    /// Uniform on [0, 1].
    Uniform,
    /// Normal(mu, sigma).
    Normal,
    /// Beta(2, 2) on [0, 1].
    Beta22,
    /// Lognormal(mu, sigma); heavy-tailed stand-in for map-like data.
    Lognormal,
    /// Keys read from `path`.
    File,
}

/// What to load or generate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetSpec {
    pub kind: DatasetKind,
    pub n: usize,
    pub mu: f64,
    pub sigma: f64,
    pub seed: u64,
    pub path: Option<PathBuf>,
    #[serde(with = "mode_serde")]
    pub mode: KeyMode,
}

impl Default for DatasetSpec {
    fn default() -> Self {
        DatasetSpec {
            kind: DatasetKind::Uniform,
            n: 1_000_000,
            mu: 0.0,
            sigma: 1.0,
            seed: 1,
            path: None,
            mode: KeyMode::UInt64,
        }
    }
}

impl DatasetSpec {
    pub fn synthetic(kind: DatasetKind, n: usize, seed: u64) -> Self {
        let (mu, sigma) = match kind {
            DatasetKind::Normal => (0.5, 0.1),
            DatasetKind::Lognormal => (0.0, 2.0),
            _ => (0.0, 1.0),
        };
        DatasetSpec {
            kind,
            n,
            mu,
            sigma,
            seed,
            ..DatasetSpec::default()
        }
    }

    /// Short label for reports.
    pub fn label(&self) -> String {
        match self.kind {
            DatasetKind::File => self
                .path
                .as_deref()
                .and_then(Path::file_name)
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "file".into()),
            kind => serde_json::to_value(kind)
                .ok()
                .and_then(|v| v.as_str().map(str::to_owned))
                .unwrap_or_default(),
        }
    }

    /// Generates synthetic keys, or reads `path` for [`DatasetKind::File`].
    pub fn load(&self) -> Result<Dataset, DataError> {
        match self.kind {
            DatasetKind::File => {
                let path = self
                    .path
                    .as_deref()
                    .ok_or_else(|| DataError::InvalidParams("file dataset needs a path".into()))?;
                read_sosd(path, self.mode)
            }
            _ => generate(self).map(Dataset::Float64),
        }
    }
}

pub(crate) mod mode_serde {
    use espc_core::KeyMode;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(mode: &KeyMode, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(super::mode_name(*mode))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<KeyMode, D::Error> {
        let name = String::deserialize(d)?;
        super::parse_mode(&name).map_err(serde::de::Error::custom)
    }
}

pub fn mode_name(mode: KeyMode) -> &'static str {
    match mode {
        KeyMode::UInt64 => "uint64",
        KeyMode::Float64 => "float64",
    }
}

pub fn parse_mode(name: &str) -> Result<KeyMode, String> {
    match name {
        "uint64" | "u64" | "int64" => Ok(KeyMode::UInt64),
        "float64" | "f64" | "double" => Ok(KeyMode::Float64),
        other => Err(format!(
            "unknown key mode `{other}` (expected uint64 or float64)"
        )),
    }
}

/// Sorted synthetic keys, deterministic per spec. Uses ChaCha8 seeded with
/// `spec.seed`.
pub fn generate(spec: &DatasetSpec) -> Result<KeyArray<f64>, DataError> {
    if spec.n == 0 {
        return Err(DataError::InvalidParams("n must be at least 1".into()));
    }
    let needs_sigma = matches!(spec.kind, DatasetKind::Normal | DatasetKind::Lognormal);
    if needs_sigma && !(spec.sigma > 0.0 && spec.sigma.is_finite()) {
        return Err(DataError::InvalidParams("sigma must be positive".into()));
    }
    if needs_sigma && !spec.mu.is_finite() {
        return Err(DataError::InvalidParams("mu must be finite".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.n;
    let raw: Vec<f64> = match spec.kind {
        DatasetKind::Uniform => StandardUniform.sample_iter(&mut rng).take(n).collect(),
        DatasetKind::Normal => Normal::new(spec.mu, spec.sigma)
            .map_err(|e| DataError::InvalidParams(e.to_string()))?
            .sample_iter(&mut rng)
            .take(n)
            .collect(),
        DatasetKind::Beta22 => Beta::new(2.0, 2.0)
            .map_err(|e| DataError::InvalidParams(e.to_string()))?
            .sample_iter(&mut rng)
            .take(n)
            .collect(),
        DatasetKind::Lognormal => LogNormal::new(spec.mu, spec.sigma)
            .map_err(|e| DataError::InvalidParams(e.to_string()))?
            .sample_iter(&mut rng)
            .take(n)
            .collect(),
        DatasetKind::File => {
            return Err(DataError::InvalidParams(
                "file datasets are read, not generated".into(),
            ))
        }
    };
    Ok(KeyArray::new(raw)?)
}

fn open_reader(path: &Path) -> io::Result<Box<dyn Read>> {
    let file = BufReader::new(File::open(path)?);
    Ok(if is_gzip(path) {
        Box::new(GzDecoder::new(file))
    } else {
        Box::new(file)
    })
}

fn is_gzip(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "gz")
}

fn read_all(path: &Path) -> io::Result<Vec<u8>> {
    let mut buf = Vec::new();
    open_reader(path)?.read_to_end(&mut buf)?;
    Ok(buf)
}

/// Decodes an in-memory data file.
pub fn decode_sosd<K: Key>(bytes: &[u8]) -> Result<KeyArray<K>, DataError> {
    let actual = bytes.len() as u64;
    if bytes.len() < 8 {
        return Err(DataError::TruncatedFile {
            expected: 8,
            actual,
        });
    }
    let claimed = u64::from_le_bytes(bytes[..8].try_into().expect("8 bytes"));
    let expected = claimed.checked_mul(8).and_then(|b| b.checked_add(8));
    match expected {
        Some(e) if e == actual => {}
        Some(e) if e > actual => {
            return Err(DataError::TruncatedFile {
                expected: e,
                actual,
            })
        }
        None => {
            return Err(DataError::TruncatedFile {
                expected: u64::MAX,
                actual,
            })
        }
        Some(_) => {
            return Err(DataError::CountMismatch {
                claimed,
                actual: (actual - 8) / 8,
            })
        }
    }
    let keys: Vec<K> = bytes[8..]
        .chunks_exact(8)
        .map(|w| K::from_bits(u64::from_le_bytes(w.try_into().expect("8 bytes"))))
        .collect();
    if !keys.windows(2).all(|w| w[0] <= w[1]) {
        log::warn!("keys are not sorted; sorting {} keys", keys.len());
    }
    Ok(KeyArray::new(keys)?)
}

/// Encodes keys in the file layout.
pub fn encode_sosd<K: Key>(keys: &KeyArray<K>) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + 8 * keys.len());
    out.extend_from_slice(&(keys.len() as u64).to_le_bytes());
    for k in keys.iter() {
        out.extend_from_slice(&k.to_bits().to_le_bytes());
    }
    out
}

/// Reads a data file, interpreting key words according to `mode`.
pub fn read_sosd(path: &Path, mode: KeyMode) -> Result<Dataset, DataError> {
    let bytes = read_all(path)?;
    Ok(match mode {
        KeyMode::UInt64 => Dataset::UInt64(decode_sosd(&bytes)?),
        KeyMode::Float64 => Dataset::Float64(decode_sosd(&bytes)?),
    })
}

pub fn write_sosd<K: Key>(path: &Path, keys: &KeyArray<K>) -> Result<(), DataError> {
    let bytes = encode_sosd(keys);
    let file = BufWriter::new(File::create(path)?);
    if is_gzip(path) {
        let mut gz = GzEncoder::new(file, Compression::default());
        gz.write_all(&bytes)?;
        gz.finish()?.flush()?;
    } else {
        let mut file = file;
        file.write_all(&bytes)?;
        file.flush()?;
    }
    Ok(())
}

/// `x -> (x - x(1)) / (x(n) - x(1))`.
pub fn rescale_unit<K: Key>(keys: &KeyArray<K>) -> Result<KeyArray<f64>, DataError> {
    let lo = keys.first().to_f64();
    let span = keys.last().to_f64() - lo;
    if span.is_nan() || span <= 0.0 {
        return Err(DataError::DegenerateRange);
    }
    let scaled = keys.iter().map(|k| (k.to_f64() - lo) / span).collect();
    Ok(KeyArray::new(scaled)?)
}

/// Maps keys onto the integer grid `[0, 2^53]` after rescaling, so generated
/// data can be stored as unsigned keys.
pub fn quantize_unit<K: Key>(keys: &KeyArray<K>) -> Result<KeyArray<u64>, DataError> {
    let unit = rescale_unit(keys)?;
    let grid = unit
        .iter()
        .map(|x| (x * UINT_GRID).round() as u64)
        .collect();
    Ok(KeyArray::new(grid)?)
}

/// `m` keys drawn without replacement, re-sorted.
pub fn subsample<K: Key>(
    keys: &KeyArray<K>,
    m: usize,
    seed: u64,
) -> Result<KeyArray<K>, DataError> {
    let n = keys.len();
    if m == 0 || m > n {
        return Err(DataError::InvalidM { m, n });
    }
    if m == n {
        return Ok(keys.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = rand::seq::index::sample(&mut rng, n, m).into_vec();
    picked.sort_unstable();
    Ok(KeyArray::new(
        picked.into_iter().map(|i| keys[i]).collect(),
    )?)
}
