//! Command-line driver for `epl-core`.

pub mod io;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use epl_core::diagnostics::{compute_statistic, ChiSquareOptions, StatisticId};
use epl_core::inference::{fit_epl_mle, heuristic_rho, FitStrategy, HeuristicMethod, MleOptions, MmOptions};
use epl_core::models::{
    epl_sample, mallows_sample, thurstone_sample, EplParams, MallowsParams, ThurstoneParams,
};
use epl_core::study::{bootstrap_pvalues, rejection_rate_study, recovery_study, with_threads, Artifact, BootstrapOptions, StudyConfig};
use epl_core::{Dataset, EplError, Metric, Permutation};
use serde::Serialize;

pub use io::{export, ingest, ingest_reader, IngestError, Orientation};

/// Environment variable holding the default worker count.
pub const THREADS_ENV: &str = "EPL_THREADS";

#[derive(Parser, Debug, Serialize)]
#[command(name = "epl", version, about = "Extended Plackett-Luce ranking models: sampling, fitting, diagnostics, studies")]
pub struct Cli {
    /// Worker threads for parallel sections; defaults to all cores.
    #[arg(long, global = true, env = THREADS_ENV, value_parser = positive_usize)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(tag = "subcommand", rename_all = "kebab-case")]
pub enum Command {
    /// Draw a dataset from an EPL, Mallows or Thurstone model.
    Sample(SampleArgs),
    /// Maximum-likelihood EPL fit.
    Fit(FitArgs),
    /// PCA/MDS reference-order estimate with the T and D matrices.
    Heuristic(HeuristicArgs),
    /// Goodness-of-fit statistics at a given or fitted EPL.
    Diagnose(DiagnoseArgs),
    /// Parametric-bootstrap p-values.
    Gof(GofArgs),
    /// Rejection-rate study from a config file.
    StudyGof(StudyArgs),
    /// Reference-order recovery study from a config file.
    StudyRecovery(StudyArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct InputArgs {
    /// Dataset CSV: one permutation per row, optional header.
    #[arg(short, long)]
    pub input: PathBuf,
    /// Whether rows list items by position (ordering) or positions by item (ranking).
    #[arg(long, value_enum)]
    pub orientation: Orientation,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Epl,
    Mallows,
    Thurstone,
}

#[derive(Args, Debug, Serialize)]
pub struct SampleArgs {
    #[arg(long, value_enum)]
    pub model: ModelKind,
    /// EPL reference order, e.g. 1,5,2,4,3 (default: identity).
    #[arg(long, value_parser = parse_perm)]
    pub rho: Option<Permutation>,
    /// EPL support weights, comma-separated.
    #[arg(long, value_delimiter = ',')]
    pub weights: Option<Vec<f64>>,
    /// Mallows modal ordering.
    #[arg(long, value_parser = parse_perm)]
    pub center: Option<Permutation>,
    /// Mallows concentration.
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long, value_parser = parse_metric, default_value = "kendall")]
    pub metric: Metric,
    /// Thurstone latent means, comma-separated.
    #[arg(long, value_delimiter = ',')]
    pub means: Option<Vec<f64>>,
    /// Number of units.
    #[arg(short, long, value_parser = positive_usize)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Row format of the written CSV.
    #[arg(long, value_enum, default_value_t = Orientation::Ordering)]
    pub orientation: Orientation,
    /// Write a header row.
    #[arg(long)]
    pub header: bool,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct SearchArgs {
    /// exhaustive, local_search or heuristic_seeded.
    #[arg(long, value_parser = parse_strategy, default_value = "heuristic_seeded")]
    pub strategy: FitStrategy,
    /// Random starts for local search (extra starts for heuristic_seeded).
    #[arg(long, default_value_t = 1, value_parser = positive_usize)]
    pub starts: usize,
}

impl SearchArgs {
    fn options(&self, seed: u64) -> MleOptions {
        MleOptions {
            strategy: self.strategy,
            n_starts: self.starts,
            seed,
            mm: MmOptions::default(),
        }
    }
}

#[derive(Args, Debug, Serialize)]
pub struct FitArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub search: SearchArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct HeuristicArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub input: InputArgs,
    /// pca or mds.
    #[arg(long, value_parser = parse_method, default_value = "pca")]
    pub method: HeuristicMethod,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct ChiArgs {
    /// Statistics to compute, comma-separated (T_m, X2_IIA, X2_TOP, X2_PC, X2_M).
    #[arg(long, value_delimiter = ',', value_parser = parse_stat, default_value = "T_m,X2_IIA,X2_TOP,X2_PC,X2_M")]
    pub statistics: Vec<StatisticId>,
    /// Cells with expected count below this are skipped.
    #[arg(long, default_value_t = 0.0)]
    pub min_expected: f64,
    /// Monte Carlo size for expected marginals when K exceeds the exact limit.
    #[arg(long, default_value_t = 100_000, value_parser = positive_usize)]
    pub mc_size: usize,
}

#[derive(Args, Debug, Serialize)]
pub struct DiagnoseArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub chi: ChiArgs,
    /// JSON with EPL parameters: a `fit` artifact or `{"rho": [...], "weights": [...]}`.
    #[arg(long, conflicts_with_all = ["rho", "weights"])]
    pub fit: Option<PathBuf>,
    #[arg(long, value_parser = parse_perm, requires = "weights")]
    pub rho: Option<Permutation>,
    #[arg(long, value_delimiter = ',', requires = "rho")]
    pub weights: Option<Vec<f64>>,
    #[command(flatten)]
    pub search: SearchArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct GofArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub chi: ChiArgs,
    #[command(flatten)]
    pub search: SearchArgs,
    /// Bootstrap datasets.
    #[arg(short = 'B', long = "bootstrap", default_value_t = 200, value_parser = positive_usize)]
    pub b: usize,
    /// Reuse the observed-data fit for every bootstrap dataset.
    #[arg(long)]
    pub no_refit: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct StudyArgs {
    /// Key-value config file; unset keys keep their defaults.
    #[arg(short, long)]
    pub config: Option<PathBuf>,
    /// Override a config key, e.g. --set N=200 (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Per-replicate CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// JSON summary (default: stdout).
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

/// Failure surfaced to the user as JSON on stderr.
#[derive(Debug, Serialize)]
pub struct CliError {
    pub kind: &'static str,
    pub message: String,
}

impl CliError {
    pub fn new(kind: &'static str, message: impl Into<String>) -> Self {
        CliError {
            kind,
            message: message.into(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::json!({ "error": self }).to_string()
    }
}

impl From<EplError> for CliError {
    fn from(e: EplError) -> Self {
        let kind = match e {
            EplError::InvalidPermutation { .. } | EplError::DimensionMismatch { .. } | EplError::Empty(_) => "data",
            EplError::EnumerationLimit { .. } | EplError::InvalidParameter(_) | EplError::Unknown { .. } => "parameter",
            EplError::Config(_) => "config",
            EplError::Fit(_) => "fit",
        };
        CliError::new(kind, e.to_string())
    }
}

impl From<IngestError> for CliError {
    fn from(e: IngestError) -> Self {
        let kind = match e {
            IngestError::Io(_) => "io",
            _ => "data",
        };
        CliError::new(kind, e.to_string())
    }
}

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::new("io", format!("{}: {e}", path.display()))
}

fn parse_perm(s: &str) -> Result<Permutation, String> {
    s.parse().map_err(|e: EplError| e.to_string())
}

fn parse_metric(s: &str) -> Result<Metric, String> {
    s.parse().map_err(|e: EplError| e.to_string())
}

fn parse_strategy(s: &str) -> Result<FitStrategy, String> {
    s.parse().map_err(|e: EplError| e.to_string())
}

fn parse_method(s: &str) -> Result<HeuristicMethod, String> {
    s.parse().map_err(|e: EplError| e.to_string())
}

fn parse_stat(s: &str) -> Result<StatisticId, String> {
    s.trim().parse().map_err(|e: EplError| e.to_string())
}

fn positive_usize(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be positive".into()),
        Ok(v) => Ok(v),
        Err(e) => Err(e.to_string()),
    }
}

fn write_output(path: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, bytes).map_err(|e| io_error(p, e)),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes).and_then(|_| out.flush()).map_err(|e| CliError::new("io", e.to_string()))
        }
    }
}

fn emit<C: Serialize, R: Serialize>(command: &str, seed: u64, config: &C, result: R, output: Option<&Path>) -> Result<(), CliError> {
    let mut json = Artifact::new(command, seed, config, result).to_json()?;
    json.push('\n');
    write_output(output, json.as_bytes())
}

fn load(input: &InputArgs) -> Result<Dataset, CliError> {
    Ok(ingest(&input.input, input.orientation)?)
}

fn sample(args: &SampleArgs) -> Result<(), CliError> {
    let missing = |what: &str| CliError::new("usage", format!("--model {:?} needs --{what}", args.model).to_lowercase());
    let data = match args.model {
        ModelKind::Epl => {
            let weights = args.weights.clone().ok_or_else(|| missing("weights"))?;
            let rho = args.rho.clone().unwrap_or_else(|| Permutation::identity(weights.len()));
            epl_sample(&EplParams::new(rho, weights)?, args.n, args.seed)?
        }
        ModelKind::Mallows => {
            let center = args.center.clone().ok_or_else(|| missing("center"))?;
            let theta = args.theta.ok_or_else(|| missing("theta"))?;
            mallows_sample(&MallowsParams::new(center, theta, args.metric)?, args.n, args.seed)?
        }
        ModelKind::Thurstone => {
            let means = args.means.clone().ok_or_else(|| missing("means"))?;
            thurstone_sample(&ThurstoneParams::new(means)?, args.n, args.seed)?
        }
    };
    let mut buf = Vec::new();
    export(&data, args.orientation, args.header, &mut buf).map_err(|e| CliError::new("io", e.to_string()))?;
    write_output(args.output.as_deref(), &buf)
}

/// EPL parameters from a `fit` artifact, a bare FitResult, or `{rho, weights}`.
fn read_params(path: &Path) -> Result<EplParams, CliError> {
    let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| CliError::new("data", format!("{}: {e}", path.display())))?;
    let node = value
        .pointer("/result/params")
        .or_else(|| value.get("params"))
        .unwrap_or(&value);
    serde_json::from_value(node.clone()).map_err(|e| CliError::new("data", format!("{}: {e}", path.display())))
}

#[derive(Serialize)]
struct DiagnoseReport {
    params: EplParams,
    /// Whether `params` were fitted here rather than supplied.
    fitted: bool,
    values: Vec<epl_core::diagnostics::DiagnosticValue>,
}

fn diagnose(args: &DiagnoseArgs) -> Result<(), CliError> {
    let data = load(&args.input)?;
    let (params, fitted) = match (&args.fit, &args.rho, &args.weights) {
        (Some(path), _, _) => (read_params(path)?, false),
        (None, Some(rho), Some(w)) => (EplParams::new(rho.clone(), w.clone())?, false),
        _ => (fit_epl_mle(&data, &args.search.options(args.seed))?.params, true),
    };
    if params.k() != data.k() {
        return Err(EplError::DimensionMismatch {
            expected: data.k(),
            found: params.k(),
        }
        .into());
    }
    let chi = ChiSquareOptions {
        min_expected: args.chi.min_expected,
        mc_size: args.chi.mc_size,
        mc_seed: args.seed,
    };
    let values = args
        .chi
        .statistics
        .iter()
        .map(|&s| compute_statistic(s, &data, &params, &chi))
        .collect::<Result<Vec<_>, _>>()?;
    emit("diagnose", args.seed, args, DiagnoseReport { params, fitted, values }, args.output.as_deref())
}

fn gof(args: &GofArgs) -> Result<(), CliError> {
    let data = load(&args.input)?;
    let opts = BootstrapOptions {
        b: args.b,
        refit: !args.no_refit,
        seed: args.seed,
        fit: args.search.options(0),
        chi: ChiSquareOptions {
            min_expected: args.chi.min_expected,
            mc_size: args.chi.mc_size,
            mc_seed: 0,
        },
    };
    let reports = bootstrap_pvalues(&data, &args.chi.statistics, &opts)?;
    emit("gof", args.seed, args, reports, args.output.as_deref())
}

fn study_config(args: &StudyArgs) -> Result<StudyConfig, CliError> {
    let mut cfg = match &args.config {
        Some(path) => StudyConfig::parse(&fs::read_to_string(path).map_err(|e| io_error(path, e))?)?,
        None => StudyConfig::default(),
    };
    for kv in &args.overrides {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| CliError::new("usage", format!("--set expects KEY=VALUE, got '{kv}'")))?;
        cfg.set(k.trim(), v.trim())?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write_csv_file(path: &Path, f: impl FnOnce(fs::File) -> epl_core::Result<()>) -> Result<(), CliError> {
    let file = fs::File::create(path).map_err(|e| io_error(path, e))?;
    Ok(f(file)?)
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    with_threads(cli.threads, || match &cli.command {
        Command::Sample(a) => sample(a),
        Command::Fit(a) => {
            let data = load(&a.input)?;
            let fit = fit_epl_mle(&data, &a.search.options(a.seed))?;
            emit("fit", a.seed, a, fit, a.output.as_deref())
        }
        Command::Heuristic(a) => {
            let data = load(&a.input)?;
            let h = heuristic_rho(&data, a.method, &MmOptions::default())?;
            emit("heuristic", 0, a, h, a.output.as_deref())
        }
        Command::Diagnose(a) => diagnose(a),
        Command::Gof(a) => gof(a),
        Command::StudyGof(a) => {
            let cfg = study_config(a)?;
            let res = rejection_rate_study(&cfg)?;
            if let Some(path) = &a.csv {
                write_csv_file(path, |f| res.write_csv(f))?;
            }
            let mut json = res.summary_json()?;
            json.push('\n');
            write_output(a.summary.as_deref(), json.as_bytes())
        }
        Command::StudyRecovery(a) => {
            let cfg = study_config(a)?;
            let res = recovery_study(&cfg)?;
            if let Some(path) = &a.csv {
                write_csv_file(path, |f| res.write_csv(f))?;
            }
            let mut json = res.summary_json()?;
            json.push('\n');
            write_output(a.summary.as_deref(), json.as_bytes())
        }
    })?
}
