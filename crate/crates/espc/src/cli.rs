//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage or invalid argument, 2 a bound check failed
//! (`bench --check`), 3 I/O or malformed file.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use espc_core::espc::{choose_k, SizingPolicy};
use espc_core::stats::{
    estimate_rho, log_error_entropy_bound, partition_probabilities, renyi_entropy_2, LogBase,
    StatsError,
};
use espc_core::{EspcError, EspcIndex, Key, KeyArray, KeyMode};

use crate::bench::{self, BenchConfig, BenchError, QueryDist, RhoMethodName};
use crate::data::{self, DataError, Dataset, DatasetKind, DatasetSpec};
use crate::with_keys;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_CHECK: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "espc",
    version,
    about = "Equal-split piecewise constant learned index"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic dataset and write it as a data file.
    Generate(GenerateArgs),
    /// Validate a data file, optionally subsample and rescale it.
    Ingest(IngestArgs),
    /// Build an index and write it to disk.
    Build(BuildArgs),
    /// Answer one rank query with a stored index.
    Query(QueryArgs),
    /// Estimate ρ = ∫f² of the key density.
    Rho(RhoArgs),
    /// Order-2 Rényi entropy of K equal cells and the log-error bound.
    Entropy(EntropyArgs),
    /// Run the error-versus-K experiment and write CSV.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Uint64,
    Float64,
}

impl From<ModeArg> for KeyMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Uint64 => KeyMode::UInt64,
            ModeArg::Float64 => KeyMode::Float64,
        }
    }
}

#[derive(Debug, Args)]
struct DataArgs {
    /// Data file (count + 8-byte keys, little-endian; `.gz` accepted).
    #[arg(long)]
    data: PathBuf,
    /// How to read the key words.
    #[arg(long, value_enum, default_value = "uint64")]
    mode: ModeArg,
}

impl DataArgs {
    fn load(&self) -> Result<Dataset, CliError> {
        Ok(data::read_sosd(&self.data, self.mode.into())?)
    }
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[arg(long, value_enum, default_value = "uniform")]
    kind: DatasetKind,
    #[arg(long, default_value_t = 1_000_000)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Location parameter (normal, lognormal); defaults 0.5 and 0.
    #[arg(long)]
    mu: Option<f64>,
    /// Scale parameter (normal, lognormal); defaults 0.1 and 2.
    #[arg(long)]
    sigma: Option<f64>,
    /// uint64 stores keys on the grid [0, 2^53] after rescaling to [0, 1];
    /// float64 stores the raw draws.
    #[arg(long, value_enum, default_value = "uint64")]
    mode: ModeArg,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct IngestArgs {
    #[command(flatten)]
    input: DataArgs,
    /// Keep `m` keys drawn without replacement.
    #[arg(long)]
    subsample: Option<usize>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Rescale to [0, 1]; the output is then a float64 file.
    #[arg(long)]
    rescale: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PolicyArg {
    Linear,
    Sublinear,
    Chebyshev,
    Subexponential,
}

#[derive(Debug, Args)]
struct BuildArgs {
    #[command(flatten)]
    input: DataArgs,
    /// Interval count.
    #[arg(long, conflicts_with = "policy", required_unless_present = "policy")]
    k: Option<usize>,
    /// Derive K from n.
    #[arg(long, value_enum)]
    policy: Option<PolicyArg>,
    /// Mean for the chebyshev policy.
    #[arg(long, default_value_t = 1.0)]
    mu: f64,
    /// Standard deviation for the chebyshev policy.
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    /// Tail rate for the subexponential policy.
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct QueryArgs {
    #[arg(long)]
    index: PathBuf,
    #[command(flatten)]
    input: DataArgs,
    /// Query key, parsed in the data's key mode.
    #[arg(long, allow_negative_numbers = true)]
    q: String,
}

#[derive(Debug, Args)]
struct RhoArgs {
    #[command(flatten)]
    input: DataArgs,
    #[arg(long, value_enum, default_value = "histogram")]
    method: RhoMethodName,
    /// Monte-Carlo draws J.
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Estimate on the raw key scale instead of [0, 1].
    #[arg(long)]
    no_rescale: bool,
}

#[derive(Debug, Args)]
struct EntropyArgs {
    #[command(flatten)]
    input: DataArgs,
    #[arg(long)]
    k: usize,
    /// Support lower bound; defaults to the smallest key.
    #[arg(long, allow_negative_numbers = true)]
    a: Option<f64>,
    /// Support upper bound; defaults to the largest key.
    #[arg(long, allow_negative_numbers = true)]
    b: Option<f64>,
    /// Report in bits instead of nats.
    #[arg(long)]
    base2: bool,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// JSON file with BenchConfig keys; explicit flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    kind: Option<DatasetKind>,
    /// Data file for `--kind file`.
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Keys to generate for synthetic kinds.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    n_sub: Option<usize>,
    /// Comma-separated ascending K values.
    #[arg(long, value_delimiter = ',')]
    k_grid: Option<Vec<usize>>,
    /// Query count Q.
    #[arg(long)]
    queries: Option<usize>,
    /// Draw queries from this distribution instead of from the keys.
    #[arg(long, value_enum)]
    query_kind: Option<DatasetKind>,
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    #[arg(long, value_enum)]
    rho_method: Option<RhoMethodName>,
    #[arg(long)]
    rho_samples: Option<usize>,
    /// Keep the raw key scale.
    #[arg(long)]
    no_rescale: bool,
    /// n = 10^7, Q = 3·10^7 and the six-point K grid.
    #[arg(long)]
    full_scale: bool,
    /// Exit with status 2 if any mean error exceeds its bound.
    #[arg(long)]
    check: bool,
    /// CSV destination; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Check(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Check(_) => EXIT_CHECK,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

impl From<DataError> for CliError {
    fn from(e: DataError) -> Self {
        if e.is_io() {
            CliError::Io(e.to_string())
        } else {
            CliError::Usage(e.to_string())
        }
    }
}

impl From<EspcError> for CliError {
    fn from(e: EspcError) -> Self {
        match e {
            EspcError::Corrupt(_) => CliError::Io(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<StatsError> for CliError {
    fn from(e: StatsError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<BenchError> for CliError {
    fn from(e: BenchError) -> Self {
        match e {
            BenchError::Data(d) => d.into(),
            BenchError::Index(i) => i.into(),
            BenchError::Io(_) | BenchError::Csv(_) => CliError::Io(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

/// Parses `argv` (including the program name), runs the verb, and returns the
/// exit code. Results go to `out`; diagnostics to `err`.
pub fn dispatch<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match run(cli.command, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if matches!(e, CliError::Usage(_)) {
                let _ = writeln!(err, "run `espc --help` for usage");
            }
            e.exit_code()
        }
    }
}

fn run(command: Command, out: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Generate(args) => generate(args, out),
        Command::Ingest(args) => ingest(args, out),
        Command::Build(args) => build(args, out),
        Command::Query(args) => query(args, out),
        Command::Rho(args) => rho(args, out),
        Command::Entropy(args) => entropy(args, out),
        Command::Bench(args) => run_bench(args, out),
    }
}

fn generate(args: GenerateArgs, out: &mut dyn Write) -> Result<(), CliError> {
    if args.kind == DatasetKind::File {
        return Err(CliError::Usage("`file` is not a generator".into()));
    }
    let mut spec = DatasetSpec::synthetic(args.kind, args.n, args.seed);
    spec.mu = args.mu.unwrap_or(spec.mu);
    spec.sigma = args.sigma.unwrap_or(spec.sigma);
    let keys = data::generate(&spec)?;
    let dataset = match args.mode {
        ModeArg::Float64 => Dataset::Float64(keys),
        ModeArg::Uint64 => Dataset::UInt64(data::quantize_unit(&keys)?),
    };
    dataset.write(&args.out)?;
    writeln!(
        out,
        "wrote {} {} keys ({}) to {}",
        dataset.len(),
        spec.label(),
        data::mode_name(dataset.mode()),
        args.out.display()
    )?;
    Ok(())
}

fn ingest(args: IngestArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let mut dataset = args.input.load()?;
    if let Some(m) = args.subsample {
        dataset = dataset.subsample(m, args.seed)?;
    }
    if args.rescale {
        dataset = Dataset::Float64(dataset.rescale_unit()?);
    }
    dataset.write(&args.out)?;
    writeln!(
        out,
        "wrote {} validated keys ({}) to {}",
        dataset.len(),
        data::mode_name(dataset.mode()),
        args.out.display()
    )?;
    Ok(())
}

fn build(args: BuildArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let dataset = args.input.load()?;
    let n = dataset.len();
    let k = match (args.k, args.policy) {
        (Some(k), _) => k,
        (None, Some(policy)) => {
            let policy = match policy {
                PolicyArg::Linear => SizingPolicy::Linear,
                PolicyArg::Sublinear => SizingPolicy::Sublinear,
                PolicyArg::Chebyshev => SizingPolicy::Chebyshev {
                    mean: args.mu,
                    std_dev: args.sigma,
                },
                PolicyArg::Subexponential => SizingPolicy::Subexponential { c: args.c },
            };
            choose_k(policy, n)?
        }
        (None, None) => return Err(CliError::Usage("either --k or --policy is required".into())),
    };
    let index = with_keys!(&dataset, keys => EspcIndex::build(keys, k))?;
    std::fs::write(&args.out, index.to_bytes())?;
    writeln!(out, "n\t{n}")?;
    writeln!(out, "k\t{}", index.k())?;
    writeln!(out, "delta\t{}", index.delta())?;
    writeln!(out, "space_bytes\t{}", bench::measure_space(&index))?;
    Ok(())
}

fn parse_key<K: Key + std::str::FromStr>(raw: &str) -> Result<K, CliError> {
    let q: K = raw
        .parse()
        .map_err(|_| CliError::Usage(format!("cannot parse query `{raw}` as a key")))?;
    if !q.is_finite() {
        return Err(CliError::Usage("query must be finite".into()));
    }
    Ok(q)
}

fn answer<K: Key + std::str::FromStr>(
    index: &EspcIndex,
    keys: &KeyArray<K>,
    raw: &str,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let q = parse_key::<K>(raw)?;
    let outcome = index.evaluate_rank(keys, q)?;
    writeln!(out, "rank\t{}", outcome.rank.get())?;
    writeln!(out, "estimate\t{}", index.predict(q))?;
    writeln!(out, "eps\t{}", index.prediction_error(outcome.rank, q))?;
    writeln!(out, "comparisons\t{}", outcome.comparisons)?;
    Ok(())
}

fn query(args: QueryArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let bytes = std::fs::read(&args.index)?;
    let index = EspcIndex::from_bytes(&bytes)?;
    let dataset = args.input.load()?;
    match &dataset {
        Dataset::UInt64(keys) => answer(&index, keys, &args.q, out),
        Dataset::Float64(keys) => answer(&index, keys, &args.q, out),
    }
}

fn rho(args: RhoArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let dataset = args.input.load()?;
    let method = args.method.into();
    let (estimate, unit_span) = if args.no_rescale {
        with_keys!(&dataset, keys => {
            let unit = keys.first().to_f64() == 0.0 && keys.last().to_f64() == 1.0;
            (estimate_rho(keys, args.samples, method, args.seed)?, unit)
        })
    } else {
        let unit = dataset.rescale_unit()?;
        (estimate_rho(&unit, args.samples, method, args.seed)?, true)
    };
    writeln!(out, "rho\t{}", estimate.value)?;
    writeln!(out, "samples\t{}", estimate.samples)?;
    writeln!(out, "smoothing\t{}", estimate.smoothing)?;
    if estimate.fallback_width {
        writeln!(
            out,
            "note\tinterquartile range is zero; used fallback bin width"
        )?;
    }
    if unit_span {
        // differential order-2 Rényi entropy on [0, 1]
        writeln!(out, "h2\t{}", -estimate.value.ln())?;
    }
    Ok(())
}

fn entropy(args: EntropyArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let dataset = args.input.load()?;
    let base = if args.base2 {
        LogBase::Two
    } else {
        LogBase::Natural
    };
    let (profile, n) = with_keys!(&dataset, keys => {
        let a = args.a.unwrap_or(keys.first().to_f64());
        let b = args.b.unwrap_or(keys.last().to_f64());
        (partition_probabilities(keys, a, b, args.k)?, keys.len())
    });
    writeln!(out, "h2\t{}", renyi_entropy_2(&profile, base))?;
    writeln!(out, "h2_max\t{}", base.log(profile.k() as f64))?;
    writeln!(
        out,
        "log_eps_bound\t{}",
        log_error_entropy_bound(n, &profile, base)
    )?;
    writeln!(out, "unit\t{}", if args.base2 { "bits" } else { "nats" })?;
    Ok(())
}

fn load_config(path: &Path) -> Result<BenchConfig, CliError> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("bad config {}: {e}", path.display())))
}

fn bench_config(args: &BenchArgs) -> Result<BenchConfig, CliError> {
    let mut cfg = match &args.config {
        Some(path) => load_config(path)?,
        None => BenchConfig::default(),
    };
    if let Some(kind) = args.kind {
        cfg.dataset.kind = kind;
        if kind != DatasetKind::File {
            let fresh = DatasetSpec::synthetic(kind, cfg.dataset.n, cfg.dataset.seed);
            cfg.dataset.mu = fresh.mu;
            cfg.dataset.sigma = fresh.sigma;
        }
    }
    if let Some(path) = &args.data {
        cfg.dataset.path = Some(path.clone());
        if args.kind.is_none() {
            cfg.dataset.kind = DatasetKind::File;
        }
    }
    if let Some(mode) = args.mode {
        cfg.dataset.mode = mode.into();
    }
    if let Some(n) = args.n {
        cfg.dataset.n = n;
    }
    if args.full_scale {
        cfg = cfg.full_scale();
    }
    if let Some(n_sub) = args.n_sub {
        cfg.n_sub = Some(n_sub);
    }
    if let Some(grid) = &args.k_grid {
        cfg.k_grid = grid.clone();
    }
    if let Some(q) = args.queries {
        cfg.queries = q;
    }
    if let Some(kind) = args.query_kind {
        cfg.query_dist = QueryDist::Spec(DatasetSpec::synthetic(kind, cfg.queries, 7));
    }
    if let Some(seeds) = &args.seeds {
        cfg.seeds = seeds.clone();
    }
    if let Some(m) = args.rho_method {
        cfg.rho_method = m;
    }
    if let Some(j) = args.rho_samples {
        cfg.rho_samples = j;
    }
    if args.no_rescale {
        cfg.rescale = false;
    }
    if let Some(path) = &args.out {
        cfg.output = Some(path.clone());
    }
    Ok(cfg)
}

fn run_bench(args: BenchArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let cfg = bench_config(&args)?;
    let records = bench::run_error_experiment(&cfg)?;
    match &cfg.output {
        Some(path) => bench::emit_csv(&records, path)?,
        None => bench::write_csv(&records, &mut *out)?,
    }
    let violations: Vec<_> = records.iter().filter(|r| r.violates_bound()).collect();
    if args.check && !violations.is_empty() {
        let detail: Vec<String> = violations
            .iter()
            .map(|r| format!("K={} mean_eps={} bound={}", r.k, r.mean_eps, r.bound))
            .collect();
        return Err(CliError::Check(format!(
            "{} record(s) exceed the bound: {}",
            violations.len(),
            detail.join("; ")
        )));
    }
    Ok(())
}
