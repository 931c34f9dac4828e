//! Parametric bootstrap and the two simulation studies.
//!
//! Every unit of work (replicate, bootstrap draw, refit) receives a seed
//! derived from `(master_seed, index, tag)`, so results are identical for any
//! worker count.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::diagnostics::{compute_statistic, ChiSquareOptions, StatisticId};
use crate::error::{EplError, Result};
use crate::inference::{fit_epl_mle, heuristic_rho, FitStrategy, HeuristicMethod, MleOptions, MmOptions, EXHAUSTIVE_MAX_K};
use crate::models::{
    draw_uniform_epl_with, epl_sample, epl_sample_with, mallows_sample_with, thurstone_sample_with, EplParams,
    MallowsParams, ThurstoneParams,
};
use crate::perm::{spearman, Metric, Permutation};
use crate::rng::{derive_seed, rng_from_seed};

/// Maps `f` over `0..n`, in parallel when enabled; output order is by index.
fn map_indexed<T: Send, F: Fn(usize) -> T + Sync + Send>(n: usize, f: F) -> Vec<T> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Runs `f` on a pool capped at `threads` workers (`None` = library default).
pub fn with_threads<T: Send, F: FnOnce() -> T + Send>(threads: Option<usize>, f: F) -> Result<T> {
    #[cfg(feature = "parallel")]
    {
        match threads {
            None => Ok(f()),
            Some(n) => {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(n.max(1))
                    .build()
                    .map_err(|e| EplError::Config(format!("thread pool: {e}")))?;
                Ok(pool.install(f))
            }
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        Ok(f())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BootstrapOptions {
    /// Number of bootstrap datasets.
    pub b: usize,
    /// Refit the EPL on every bootstrap dataset before recomputing the statistic.
    pub refit: bool,
    pub seed: u64,
    pub fit: MleOptions,
    pub chi: ChiSquareOptions,
}

impl Default for BootstrapOptions {
    fn default() -> Self {
        BootstrapOptions {
            b: 200,
            refit: true,
            seed: 0,
            fit: MleOptions::default(),
            chi: ChiSquareOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BootstrapReport {
    pub statistic: StatisticId,
    pub observed: f64,
    pub replicates: Vec<f64>,
    pub p_value: f64,
    #[serde(rename = "B")]
    pub b: usize,
    pub refit: bool,
    pub fit_used: EplParams,
    pub seed: u64,
}

/// `(1 + #{replicate >= observed}) / (B + 1)`.
pub fn bootstrap_p_value(observed: f64, replicates: &[f64]) -> f64 {
    let exceed = replicates.iter().filter(|&&r| r >= observed).count();
    (1 + exceed) as f64 / (replicates.len() + 1) as f64
}

fn stat_values(
    data: &Dataset,
    params: &EplParams,
    stats: &[StatisticId],
    chi: &ChiSquareOptions,
    mc_seed: u64,
) -> Result<Vec<f64>> {
    let chi = ChiSquareOptions { mc_seed, ..chi.clone() };
    stats
        .iter()
        .map(|&s| compute_statistic(s, data, params, &chi).map(|v| v.value))
        .collect()
}

/// Bootstrap p-values for several statistics sharing the same fit and the
/// same bootstrap datasets.
pub fn bootstrap_pvalues(data: &Dataset, stats: &[StatisticId], opts: &BootstrapOptions) -> Result<Vec<BootstrapReport>> {
    if opts.b == 0 {
        return Err(EplError::InvalidParameter("B must be >= 1".into()));
    }
    if stats.is_empty() {
        return Err(EplError::Empty("statistic list"));
    }
    let fit_opts = |tag: u64| MleOptions {
        seed: derive_seed(opts.seed, tag, "fit"),
        ..opts.fit.clone()
    };
    let fit = fit_epl_mle(data, &fit_opts(0))
        .map_err(|e| EplError::Fit(format!("fitting the observed data: {e}")))?;
    let observed = stat_values(data, &fit.params, stats, &opts.chi, derive_seed(opts.seed, 0, "mc"))?;
    let n = data.n();
    let reps: Vec<Result<Vec<f64>>> = map_indexed(opts.b, |b| {
        let idx = b as u64 + 1;
        let sample = epl_sample(&fit.params, n, derive_seed(opts.seed, idx, "boot-data"))?;
        let params = if opts.refit && stats.iter().any(|s| s.needs_fit()) {
            fit_epl_mle(&sample, &fit_opts(idx))?.params
        } else {
            fit.params.clone()
        };
        stat_values(&sample, &params, stats, &opts.chi, derive_seed(opts.seed, idx, "mc"))
    });
    let reps = reps.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(stats
        .iter()
        .enumerate()
        .map(|(si, &statistic)| {
            let replicates: Vec<f64> = reps.iter().map(|r| r[si]).collect();
            BootstrapReport {
                statistic,
                observed: observed[si],
                p_value: bootstrap_p_value(observed[si], &replicates),
                replicates,
                b: opts.b,
                refit: opts.refit,
                fit_used: fit.params.clone(),
                seed: opts.seed,
            }
        })
        .collect())
}

pub fn bootstrap_pvalue(data: &Dataset, statistic: StatisticId, opts: &BootstrapOptions) -> Result<BootstrapReport> {
    Ok(bootstrap_pvalues(data, &[statistic], opts)?.remove(0))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Epl,
    DbKend,
    DbCay,
    DbHam,
    ThNorm,
}

impl FromStr for Scenario {
    type Err = EplError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "epl" => Ok(Scenario::Epl),
            "db_kend" | "db_kendall" => Ok(Scenario::DbKend),
            "db_cay" | "db_cayley" => Ok(Scenario::DbCay),
            "db_ham" | "db_hamming" => Ok(Scenario::DbHam),
            "th_norm" | "thurstone" => Ok(Scenario::ThNorm),
            other => Err(EplError::Unknown {
                kind: "scenario",
                name: other.to_string(),
            }),
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scenario::Epl => "epl",
            Scenario::DbKend => "db_kend",
            Scenario::DbCay => "db_cay",
            Scenario::DbHam => "db_ham",
            Scenario::ThNorm => "th_norm",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RecoveryMethod {
    Pca,
    Mds,
    Mle,
}

impl FromStr for RecoveryMethod {
    type Err = EplError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "pca" => Ok(RecoveryMethod::Pca),
            "mds" => Ok(RecoveryMethod::Mds),
            "mle" => Ok(RecoveryMethod::Mle),
            other => Err(EplError::Unknown {
                kind: "recovery method",
                name: other.to_string(),
            }),
        }
    }
}

impl fmt::Display for RecoveryMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RecoveryMethod::Pca => "pca",
            RecoveryMethod::Mds => "mds",
            RecoveryMethod::Mle => "mle",
        })
    }
}

/// Settings for both studies. Unused fields are ignored by the other study.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub scenario: Scenario,
    pub k: usize,
    pub n: usize,
    pub replicates: usize,
    #[serde(rename = "B")]
    pub b: usize,
    pub alpha: f64,
    pub statistics: Vec<StatisticId>,
    pub master_seed: u64,
    pub refit: bool,
    pub fit_strategy: FitStrategy,
    pub n_starts: usize,
    pub theta_min: f64,
    pub theta_max: f64,
    pub mean_min: f64,
    pub mean_max: f64,
    pub mc_size: usize,
    pub min_expected: f64,
    pub methods: Vec<RecoveryMethod>,
    /// Allow the `mle` recovery method above the exhaustive limit, using local search.
    pub mle_local_search: bool,
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig {
            scenario: Scenario::Epl,
            k: 5,
            n: 300,
            replicates: 50,
            b: 200,
            alpha: 0.05,
            statistics: StatisticId::ALL.to_vec(),
            master_seed: 1,
            refit: true,
            fit_strategy: FitStrategy::HeuristicSeeded,
            n_starts: 1,
            theta_min: 0.1,
            theta_max: 1.0,
            mean_min: 0.0,
            mean_max: 1.0,
            mc_size: 100_000,
            min_expected: 0.0,
            methods: vec![RecoveryMethod::Pca, RecoveryMethod::Mds, RecoveryMethod::Mle],
            mle_local_search: false,
        }
    }
}

fn parse_list<T: FromStr<Err = EplError>>(v: &str) -> Result<Vec<T>> {
    v.split(',').filter(|s| !s.trim().is_empty()).map(|s| s.trim().parse()).collect()
}

fn parse_num<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| EplError::Config(format!("bad value for {key}: '{v}'")))
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(EplError::Config(format!("bad value for {key}: '{v}'"))),
    }
}

impl StudyConfig {
    /// Parses `key = value` lines; `#` starts a comment. Unset keys keep defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = StudyConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .or_else(|| line.split_once(':'))
                .ok_or_else(|| EplError::Config(format!("line {}: expected key = value", lineno + 1)))?;
            cfg.set(key.trim(), value.trim())
                .map_err(|e| EplError::Config(format!("line {}: {e}", lineno + 1)))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        match key.to_ascii_lowercase().as_str() {
            "scenario" => self.scenario = v.parse()?,
            "k" => self.k = parse_num(key, v)?,
            "n" => self.n = parse_num(key, v)?,
            "replicates" | "r" => self.replicates = parse_num(key, v)?,
            "b" | "bootstrap" => self.b = parse_num(key, v)?,
            "alpha" => self.alpha = parse_num(key, v)?,
            "statistics" => self.statistics = parse_list(v)?,
            "master_seed" | "seed" => self.master_seed = parse_num(key, v)?,
            "refit" => self.refit = parse_bool(key, v)?,
            "fit_strategy" => self.fit_strategy = v.parse()?,
            "n_starts" => self.n_starts = parse_num(key, v)?,
            "theta_min" => self.theta_min = parse_num(key, v)?,
            "theta_max" => self.theta_max = parse_num(key, v)?,
            "mean_min" => self.mean_min = parse_num(key, v)?,
            "mean_max" => self.mean_max = parse_num(key, v)?,
            "mc_size" => self.mc_size = parse_num(key, v)?,
            "min_expected" => self.min_expected = parse_num(key, v)?,
            "methods" => self.methods = parse_list(v)?,
            "mle_local_search" => self.mle_local_search = parse_bool(key, v)?,
            other => return Err(EplError::Config(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(EplError::Config(m.to_string()));
        if self.k < 2 {
            return bad("k must be >= 2");
        }
        if self.n == 0 || self.replicates == 0 || self.b == 0 {
            return bad("n, replicates and B must be positive");
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad("alpha must lie in (0, 1)");
        }
        if !(self.theta_min >= 0.0 && self.theta_min <= self.theta_max) {
            return bad("need 0 <= theta_min <= theta_max");
        }
        if self.mean_min > self.mean_max {
            return bad("need mean_min <= mean_max");
        }
        if self.statistics.is_empty() || self.methods.is_empty() {
            return bad("statistics and methods must be non-empty");
        }
        Ok(())
    }

    fn bootstrap_options(&self, seed: u64) -> BootstrapOptions {
        BootstrapOptions {
            b: self.b,
            refit: self.refit,
            seed,
            fit: MleOptions {
                strategy: self.fit_strategy,
                n_starts: self.n_starts,
                seed: 0,
                mm: MmOptions::default(),
            },
            chi: ChiSquareOptions {
                min_expected: self.min_expected,
                mc_size: self.mc_size,
                mc_seed: 0,
            },
        }
    }
}

/// True parameters drawn for one replicate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ScenarioParams {
    Epl(EplParams),
    Mallows(MallowsParams),
    Thurstone(ThurstoneParams),
}

impl ScenarioParams {
    pub fn sample(&self, n: usize, seed: u64) -> Result<Dataset> {
        let mut rng = rng_from_seed(seed);
        match self {
            ScenarioParams::Epl(p) => epl_sample_with(p, n, &mut rng),
            ScenarioParams::Mallows(p) => mallows_sample_with(p, n, &mut rng),
            ScenarioParams::Thurstone(p) => thurstone_sample_with(p, n, &mut rng),
        }
    }

    pub fn describe(&self) -> String {
        let join = |v: &[f64]| v.iter().map(|x| fmt_real(*x)).collect::<Vec<_>>().join(" ");
        match self {
            ScenarioParams::Epl(p) => format!("rho={} p=({})", p.rho(), join(p.weights())),
            ScenarioParams::Mallows(p) => {
                format!("center={} theta={} metric={}", p.center, fmt_real(p.theta), p.metric)
            }
            ScenarioParams::Thurstone(p) => format!("means=({})", join(&p.means)),
        }
    }
}

/// Draws scenario parameters: uniform reference order/center, Uniform(0,1)
/// support weights, theta and latent means uniform on the configured ranges.
pub fn draw_scenario_params(config: &StudyConfig, seed: u64) -> Result<ScenarioParams> {
    let mut rng = rng_from_seed(seed);
    let k = config.k;
    let mut center = || {
        let mut v: Vec<usize> = (0..k).collect();
        v.shuffle(&mut rng);
        v
    };
    let metric = match config.scenario {
        Scenario::Epl => return Ok(ScenarioParams::Epl(draw_uniform_epl_with(k, &mut rng)?)),
        Scenario::ThNorm => {
            let means = (0..k).map(|_| rng.random_range(config.mean_min..=config.mean_max)).collect();
            return Ok(ScenarioParams::Thurstone(ThurstoneParams::new(means)?));
        }
        Scenario::DbKend => Metric::Kendall,
        Scenario::DbCay => Metric::Cayley,
        Scenario::DbHam => Metric::Hamming,
    };
    let c = Permutation::from_zero_based(center())?;
    let theta = rng.random_range(config.theta_min..=config.theta_max);
    Ok(ScenarioParams::Mallows(MallowsParams::new(c, theta, metric)?))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatOutcome {
    pub observed: f64,
    pub p_value: f64,
    pub rejected: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RejectionRow {
    pub replicate: usize,
    pub truth: ScenarioParams,
    pub fit_used: EplParams,
    pub outcomes: BTreeMap<StatisticId, StatOutcome>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RejectionStudyResult {
    pub config: StudyConfig,
    pub rejection_rates: BTreeMap<StatisticId, f64>,
    pub rows: Vec<RejectionRow>,
}

/// Rejection rates of the EPL hypothesis across replicates of one scenario.
pub fn rejection_rate_study(config: &StudyConfig) -> Result<RejectionStudyResult> {
    config.validate()?;
    let rows: Vec<Result<RejectionRow>> = map_indexed(config.replicates, |r| {
        let idx = r as u64;
        let truth = draw_scenario_params(config, derive_seed(config.master_seed, idx, "params"))?;
        let data = truth.sample(config.n, derive_seed(config.master_seed, idx, "data"))?;
        let reports = bootstrap_pvalues(
            &data,
            &config.statistics,
            &config.bootstrap_options(derive_seed(config.master_seed, idx, "bootstrap")),
        )?;
        let fit_used = reports[0].fit_used.clone();
        let outcomes = reports
            .into_iter()
            .map(|rep| {
                (
                    rep.statistic,
                    StatOutcome {
                        observed: rep.observed,
                        p_value: rep.p_value,
                        rejected: rep.p_value <= config.alpha,
                    },
                )
            })
            .collect();
        Ok(RejectionRow {
            replicate: r,
            truth,
            fit_used,
            outcomes,
        })
    });
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let rejection_rates = config
        .statistics
        .iter()
        .map(|&s| {
            let rejected = rows.iter().filter(|row| row.outcomes[&s].rejected).count();
            (s, rejected as f64 / rows.len() as f64)
        })
        .collect();
    Ok(RejectionStudyResult {
        config: config.clone(),
        rejection_rates,
        rows,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodEstimate {
    pub rho_hat: Permutation,
    pub recovered: bool,
    pub spearman: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecoveryRow {
    pub replicate: usize,
    pub truth: EplParams,
    pub estimates: BTreeMap<RecoveryMethod, MethodEstimate>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub recovery_pct: f64,
    pub mean_spearman: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecoveryStudyResult {
    pub config: StudyConfig,
    pub summary: BTreeMap<RecoveryMethod, MethodSummary>,
    pub rows: Vec<RecoveryRow>,
}

fn estimate_rho(data: &Dataset, method: RecoveryMethod, config: &StudyConfig, seed: u64) -> Result<Permutation> {
    let mm = MmOptions::default();
    Ok(match method {
        RecoveryMethod::Pca => heuristic_rho(data, HeuristicMethod::Pca, &mm)?.rho_hat,
        RecoveryMethod::Mds => heuristic_rho(data, HeuristicMethod::Mds, &mm)?.rho_hat,
        RecoveryMethod::Mle => {
            let strategy = if data.k() <= EXHAUSTIVE_MAX_K {
                FitStrategy::Exhaustive
            } else if config.mle_local_search {
                FitStrategy::LocalSearch
            } else {
                return Err(EplError::Config(format!(
                    "mle recovery needs K <= {EXHAUSTIVE_MAX_K} or mle_local_search = true"
                )));
            };
            let opts = MleOptions {
                strategy,
                n_starts: config.n_starts,
                seed,
                mm,
            };
            fit_epl_mle(data, &opts)?.params.rho().clone()
        }
    })
}

/// Recovery of the reference order from EPL samples with uniformly drawn parameters.
pub fn recovery_study(config: &StudyConfig) -> Result<RecoveryStudyResult> {
    config.validate()?;
    if config.methods.contains(&RecoveryMethod::Mle) && config.k > EXHAUSTIVE_MAX_K && !config.mle_local_search {
        return Err(EplError::Config(format!(
            "mle recovery needs K <= {EXHAUSTIVE_MAX_K} or mle_local_search = true"
        )));
    }
    let rows: Vec<Result<RecoveryRow>> = map_indexed(config.replicates, |r| {
        let idx = r as u64;
        let truth = draw_uniform_epl_with(config.k, &mut rng_from_seed(derive_seed(config.master_seed, idx, "params")))?;
        let data = epl_sample(&truth, config.n, derive_seed(config.master_seed, idx, "data"))?;
        let mut estimates = BTreeMap::new();
        for &m in &config.methods {
            let rho_hat = estimate_rho(&data, m, config, derive_seed(config.master_seed, idx, "fit"))?;
            let est = MethodEstimate {
                recovered: &rho_hat == truth.rho(),
                spearman: spearman(truth.rho(), &rho_hat)?,
                rho_hat,
            };
            estimates.insert(m, est);
        }
        Ok(RecoveryRow {
            replicate: r,
            truth,
            estimates,
        })
    });
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let summary = config
        .methods
        .iter()
        .map(|&m| {
            let hits = rows.iter().filter(|row| row.estimates[&m].recovered).count();
            let mean_sp = rows.iter().map(|row| row.estimates[&m].spearman).sum::<f64>() / rows.len() as f64;
            (
                m,
                MethodSummary {
                    recovery_pct: 100.0 * hits as f64 / rows.len() as f64,
                    mean_spearman: mean_sp,
                },
            )
        })
        .collect();
    Ok(RecoveryStudyResult {
        config: config.clone(),
        summary,
        rows,
    })
}

/// Real number with 12 significant digits, trailing zeros trimmed.
pub fn fmt_real(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..15).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        format!("{x:.11e}")
    }
}

/// Rounds to 12 significant digits (for JSON reports).
pub fn round_sig(x: f64) -> f64 {
    fmt_real(x).parse().unwrap_or(x)
}

/// Envelope shared by every JSON artifact: tool version, resolved config, seed.
#[derive(Clone, Debug, Serialize)]
pub struct Artifact<C: Serialize, R: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub master_seed: u64,
    pub config: C,
    pub result: R,
}

impl<C: Serialize, R: Serialize> Artifact<C, R> {
    pub fn new(command: &str, master_seed: u64, config: C, result: R) -> Self {
        Artifact {
            tool: "epl",
            version: crate::VERSION,
            command: command.to_string(),
            master_seed,
            config,
            result,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| EplError::Config(format!("serialize: {e}")))
    }
}

fn io_err(e: impl fmt::Display) -> EplError {
    EplError::Config(format!("write: {e}"))
}

impl RejectionStudyResult {
    /// One row per replicate: truth, fitted parameters, and observed value,
    /// p-value and decision per statistic.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["replicate".to_string(), "truth".into(), "fit_rho".into(), "fit_weights".into()];
        for s in &self.config.statistics {
            header.push(format!("{s}_observed"));
            header.push(format!("{s}_p_value"));
            header.push(format!("{s}_rejected"));
        }
        w.write_record(&header).map_err(io_err)?;
        for row in &self.rows {
            let mut rec = vec![
                row.replicate.to_string(),
                row.truth.describe(),
                row.fit_used.rho().to_string(),
                row.fit_used.weights().iter().map(|x| fmt_real(*x)).collect::<Vec<_>>().join(" "),
            ];
            for s in &self.config.statistics {
                let o = &row.outcomes[s];
                rec.push(fmt_real(o.observed));
                rec.push(fmt_real(o.p_value));
                rec.push(u8::from(o.rejected).to_string());
            }
            w.write_record(&rec).map_err(io_err)?;
        }
        w.flush().map_err(io_err)
    }

    pub fn summary_json(&self) -> Result<String> {
        let rates: BTreeMap<String, f64> = self
            .rejection_rates
            .iter()
            .map(|(s, r)| (s.to_string(), round_sig(*r)))
            .collect();
        Artifact::new("study-gof", self.config.master_seed, &self.config, serde_json::json!({
            "replicates": self.rows.len(),
            "rejection_rates": rates,
        }))
        .to_json()
    }
}

impl RecoveryStudyResult {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["replicate".to_string(), "true_rho".into(), "true_weights".into()];
        for m in &self.config.methods {
            header.push(format!("{m}_rho_hat"));
            header.push(format!("{m}_recovered"));
            header.push(format!("{m}_spearman"));
        }
        w.write_record(&header).map_err(io_err)?;
        for row in &self.rows {
            let mut rec = vec![
                row.replicate.to_string(),
                row.truth.rho().to_string(),
                row.truth.weights().iter().map(|x| fmt_real(*x)).collect::<Vec<_>>().join(" "),
            ];
            for m in &self.config.methods {
                let e = &row.estimates[m];
                rec.push(e.rho_hat.to_string());
                rec.push(u8::from(e.recovered).to_string());
                rec.push(fmt_real(e.spearman));
            }
            w.write_record(&rec).map_err(io_err)?;
        }
        w.flush().map_err(io_err)
    }

    pub fn summary_json(&self) -> Result<String> {
        let summary: BTreeMap<String, serde_json::Value> = self
            .summary
            .iter()
            .map(|(m, s)| {
                (
                    m.to_string(),
                    serde_json::json!({
                        "recovery_pct": round_sig(s.recovery_pct),
                        "mean_spearman": round_sig(s.mean_spearman),
                    }),
                )
            })
            .collect();
        Artifact::new("study-recovery", self.config.master_seed, &self.config, serde_json::json!({
            "replicates": self.rows.len(),
            "methods": summary,
        }))
        .to_json()
    }
}
