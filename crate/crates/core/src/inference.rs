//! Reference-order estimation and support-weight fitting.
//!
//! Support weights for a fixed reference order are fitted by MM ascent on the
//! composed (stage-sequence) data, which is ordinary Plackett-Luce data. The
//! reference order itself is found either by the likelihood-free PCA/MDS
//! heuristic on the `D` matrix or by a discrete search over `S_K` scored by
//! the profile log-likelihood.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::diagnostics::{t_matrix, TMatrix};
use crate::error::{EplError, Result};
use crate::models::{pl_sequence_log_prob, EplParams};
use crate::perm::{enumerate_permutations_up_to, factorial, Permutation};
use crate::rng::rng_from_seed;

/// Relative weight between consecutive dominance classes when the MLE lies
/// on the boundary (some items always beaten by others).
pub const BOUNDARY_FLOOR: f64 = 1e-8;

/// Largest K allowed for exhaustive search over reference orders.
pub const EXHAUSTIVE_MAX_K: usize = 6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MmOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for MmOptions {
    fn default() -> Self {
        MmOptions {
            tol: 1e-8,
            max_iter: 500,
        }
    }
}

/// Orderings collapsed to distinct rows with multiplicities.
#[derive(Clone, Debug)]
pub struct CompressedData {
    k: usize,
    rows: Vec<(Vec<usize>, f64)>,
}

impl CompressedData {
    pub fn new(data: &Dataset) -> Self {
        let mut counts: HashMap<&[usize], f64> = HashMap::new();
        for o in data.orderings() {
            *counts.entry(o.as_slice()).or_default() += 1.0;
        }
        let mut rows: Vec<(Vec<usize>, f64)> = counts.into_iter().map(|(r, c)| (r.to_vec(), c)).collect();
        rows.sort_by(|a, b| a.0.cmp(&b.0));
        CompressedData { k: data.k(), rows }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn distinct(&self) -> usize {
        self.rows.len()
    }

    fn stage_sequences(&self, rho: &Permutation) -> Vec<(Vec<usize>, f64)> {
        self.rows
            .iter()
            .map(|(o, c)| (rho.as_slice().iter().map(|&pos| o[pos]).collect(), *c))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightFit {
    /// Normalized to sum to one.
    pub weights: Vec<f64>,
    pub loglik: f64,
    pub iterations: usize,
    pub converged: bool,
    /// True when some items are always beaten by others, so the likelihood
    /// supremum is only approached as their weights vanish.
    pub boundary: bool,
    /// Log-likelihood before each MM update, then the final value.
    #[serde(skip)]
    pub trace: Vec<f64>,
}

/// Strongly connected classes of the "selected before" relation, best class first.
fn dominance_classes(k: usize, seqs: &[(Vec<usize>, f64)]) -> Vec<Vec<usize>> {
    let mut reach = vec![vec![false; k]; k];
    for (i, row) in reach.iter_mut().enumerate() {
        row[i] = true;
    }
    for (s, _) in seqs {
        for a in 0..k {
            for b in (a + 1)..k {
                reach[s[a]][s[b]] = true;
            }
        }
    }
    #[allow(clippy::needless_range_loop)]
    for m in 0..k {
        for i in 0..k {
            if reach[i][m] {
                for j in 0..k {
                    if reach[m][j] {
                        reach[i][j] = true;
                    }
                }
            }
        }
    }
    let mut assigned = vec![false; k];
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for i in 0..k {
        if assigned[i] {
            continue;
        }
        let class: Vec<usize> = (0..k).filter(|&j| reach[i][j] && reach[j][i]).collect();
        for &j in &class {
            assigned[j] = true;
        }
        classes.push(class);
    }
    // every pair is compared in every unit, so classes are totally ordered and
    // a better class reaches strictly more items
    let reach_count = |c: &Vec<usize>| reach[c[0]].iter().filter(|&&r| r).count();
    classes.sort_by_key(|c| std::cmp::Reverse(reach_count(c)));
    classes
}

struct MmRun {
    weights: Vec<f64>,
    iterations: usize,
    converged: bool,
    trace: Vec<f64>,
}

/// MM ascent for Plackett-Luce on local item indices `0..m`.
fn mm_plackett_luce(m: usize, seqs: &[(Vec<usize>, f64)], opts: &MmOptions) -> MmRun {
    let mut wins = vec![0.0; m];
    for (s, c) in seqs {
        for &item in &s[..s.len() - 1] {
            wins[item] += c;
        }
    }
    let mut p = vec![1.0 / m as f64; m];
    let mut trace = Vec::new();
    let mut suffix = vec![0.0; m];
    let mut denom = vec![0.0; m];
    let mut prev = f64::NEG_INFINITY;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iter {
        denom.iter_mut().for_each(|d| *d = 0.0);
        let mut ll = 0.0;
        for (s, c) in seqs {
            let len = s.len();
            let mut acc = 0.0;
            for t in (0..len).rev() {
                acc += p[s[t]];
                suffix[t] = acc;
            }
            let mut cum = 0.0;
            for t in 0..len {
                if t + 1 < len {
                    cum += c / suffix[t];
                    ll += c * (p[s[t]].ln() - suffix[t].ln());
                }
                denom[s[t]] += cum;
            }
        }
        trace.push(ll);
        if (ll - prev).abs() <= opts.tol * ll.abs().max(1e-12) {
            converged = true;
            break;
        }
        prev = ll;
        let mut total = 0.0;
        for i in 0..m {
            p[i] = wins[i] / denom[i];
            total += p[i];
        }
        p.iter_mut().for_each(|w| *w /= total);
        iterations += 1;
    }
    if !converged {
        trace.push(loglik_local(seqs, &p));
    }
    MmRun {
        weights: p,
        iterations,
        converged,
        trace,
    }
}

fn loglik_local(seqs: &[(Vec<usize>, f64)], p: &[f64]) -> f64 {
    seqs.iter().map(|(s, c)| c * pl_sequence_log_prob(s, p)).sum()
}

fn fit_stage_sequences(k: usize, seqs: &[(Vec<usize>, f64)], opts: &MmOptions) -> WeightFit {
    let classes = dominance_classes(k, seqs);
    let n_classes = classes.len();
    let step = if n_classes <= 30 {
        BOUNDARY_FLOOR
    } else {
        10f64.powf(-280.0 / (n_classes - 1) as f64)
    };
    let mut weights = vec![0.0; k];
    let mut iterations = 0;
    let mut converged = true;
    let mut trace: Vec<f64> = Vec::new();
    let mut scale = 1.0;
    for class in &classes {
        if class.len() == 1 {
            weights[class[0]] = scale;
        } else {
            let mut local = vec![usize::MAX; k];
            for (li, &item) in class.iter().enumerate() {
                local[item] = li;
            }
            let sub: Vec<(Vec<usize>, f64)> = seqs
                .iter()
                .map(|(s, c)| (s.iter().filter_map(|&i| (local[i] != usize::MAX).then_some(local[i])).collect(), *c))
                .collect();
            let run = mm_plackett_luce(class.len(), &sub, opts);
            for (li, &item) in class.iter().enumerate() {
                weights[item] = scale * run.weights[li];
            }
            iterations = iterations.max(run.iterations);
            converged &= run.converged;
            // classes are fitted independently, so their traces add
            let last_existing = trace.last().copied();
            let offset_len = trace.len().max(run.trace.len());
            let mut merged = Vec::with_capacity(offset_len);
            for idx in 0..offset_len {
                let a = trace.get(idx).copied().or(last_existing).unwrap_or(0.0);
                let b = run.trace.get(idx).copied().or(run.trace.last().copied()).unwrap_or(0.0);
                merged.push(a + b);
            }
            trace = merged;
        }
        scale *= step;
    }
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    let loglik = loglik_local(seqs, &weights);
    WeightFit {
        weights,
        loglik,
        iterations,
        converged,
        boundary: n_classes > 1,
        trace,
    }
}

/// Support weights maximizing the likelihood for a fixed reference order.
pub fn fit_weights_given_rho(data: &Dataset, rho: &Permutation, opts: &MmOptions) -> Result<WeightFit> {
    if rho.len() != data.k() {
        return Err(EplError::DimensionMismatch {
            expected: data.k(),
            found: rho.len(),
        });
    }
    Ok(fit_compressed(&CompressedData::new(data), rho, opts))
}

pub fn fit_compressed(data: &CompressedData, rho: &Permutation, opts: &MmOptions) -> WeightFit {
    fit_stage_sequences(data.k(), &data.stage_sequences(rho), opts)
}

/// Log-likelihood of the full dataset under `params`.
pub fn epl_loglik(data: &Dataset, params: &EplParams) -> Result<f64> {
    let mut ll = 0.0;
    for o in data.orderings() {
        ll += crate::models::epl_log_pmf(o, params)?;
    }
    Ok(ll)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HeuristicMethod {
    Pca,
    Mds,
}

impl FromStr for HeuristicMethod {
    type Err = EplError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "pca" => Ok(HeuristicMethod::Pca),
            "mds" => Ok(HeuristicMethod::Mds),
            other => Err(EplError::Unknown {
                kind: "heuristic method",
                name: other.to_string(),
            }),
        }
    }
}

impl fmt::Display for HeuristicMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HeuristicMethod::Pca => "pca",
            HeuristicMethod::Mds => "mds",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeuristicResult {
    pub rho_hat: Permutation,
    /// First-axis score of each position, oriented so that `rho_hat` lists
    /// positions by non-decreasing score.
    pub scores: Vec<f64>,
    pub method: HeuristicMethod,
    /// Best profile log-likelihood among orders consistent with the scores,
    /// and among orders consistent with the negated scores.
    pub orientation_loglik: [f64; 2],
    /// Number of candidate orders scored (both orientations).
    pub candidates_evaluated: usize,
    /// No usable information about the reference order (single distinct
    /// ordering, or `D` identically zero); `rho_hat` is then the identity.
    pub degenerate: bool,
    pub t_matrix: TMatrix,
}

fn top_eigenvector(m: DMatrix<f64>) -> (f64, Vec<f64>) {
    let eig = SymmetricEigen::new(m);
    let mut best = 0;
    for i in 1..eig.eigenvalues.len() {
        if eig.eigenvalues[i] > eig.eigenvalues[best] {
            best = i;
        }
    }
    (eig.eigenvalues[best], eig.eigenvectors.column(best).iter().copied().collect())
}

/// First principal-component scores of the rows of `d` (columns centered).
pub fn pca_scores(d: &[Vec<f64>]) -> Vec<f64> {
    let k = d.len();
    let mut x = DMatrix::from_fn(k, k, |i, j| d[i][j]);
    for j in 0..k {
        let mean = x.column(j).mean();
        x.column_mut(j).add_scalar_mut(-mean);
    }
    let cov = x.transpose() * &x / (k.max(2) - 1) as f64;
    let (_, axis) = top_eigenvector(cov);
    let axis = nalgebra::DVector::from_vec(axis);
    (x * axis).iter().copied().collect()
}

/// First coordinate of classical (Torgerson) multidimensional scaling.
pub fn mds_scores(d: &[Vec<f64>]) -> Vec<f64> {
    let k = d.len();
    let sq = DMatrix::from_fn(k, k, |i, j| d[i][j] * d[i][j]);
    let center = DMatrix::<f64>::identity(k, k) - DMatrix::from_element(k, k, 1.0 / k as f64);
    let b = -0.5 * &center * sq * &center;
    let (lambda, v) = top_eigenvector(b);
    let s = lambda.max(0.0).sqrt();
    v.into_iter().map(|x| x * s).collect()
}

/// Scores snapped to a grid relative to their largest magnitude, so that
/// positions with identical rows of `D` tie exactly despite rounding noise.
fn snap_scores(scores: &[f64]) -> Vec<f64> {
    let scale = scores.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    if scale == 0.0 {
        return scores.to_vec();
    }
    let grid = scale * 1e-9;
    scores.iter().map(|s| (s / grid).round() * grid).collect()
}

/// Positions sorted by non-decreasing score, ties by position index.
pub fn order_by_scores(scores: &[f64]) -> Permutation {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]).then(a.cmp(&b)));
    Permutation::from_zero_based_unchecked(idx)
}

/// Most within-tie arrangements scored per orientation; beyond this, tied
/// positions keep index order.
pub const TIE_ARRANGEMENT_LIMIT: usize = 720;

/// Every order listing positions by non-decreasing score: positions with equal
/// scores may appear in any order. Index order comes first.
fn score_consistent_orders(scores: &[f64]) -> Vec<Permutation> {
    let base = order_by_scores(scores);
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for &pos in base.as_slice() {
        match groups.last_mut() {
            Some(g) if scores[g[0]] == scores[pos] => g.push(pos),
            _ => groups.push(vec![pos]),
        }
    }
    let mut count = 1usize;
    for g in &groups {
        count = count.saturating_mul(if g.len() > 6 { usize::MAX } else { factorial(g.len()) as usize });
    }
    if count > TIE_ARRANGEMENT_LIMIT {
        return vec![base];
    }
    let mut orders: Vec<Vec<usize>> = vec![Vec::with_capacity(scores.len())];
    for g in &groups {
        let arrangements: Vec<Vec<usize>> = enumerate_permutations_up_to(g.len(), 6)
            .expect("group size checked above")
            .map(|a| a.as_slice().iter().map(|&i| g[i]).collect())
            .collect();
        orders = orders
            .into_iter()
            .flat_map(|prefix| {
                arrangements.iter().map(move |a| {
                    let mut next = prefix.clone();
                    next.extend_from_slice(a);
                    next
                })
            })
            .collect();
    }
    orders.into_iter().map(Permutation::from_zero_based_unchecked).collect()
}

/// Likelihood-free estimate of the reference order from the `D` matrix.
///
/// Positions are embedded on one axis (PCA or MDS of `D`) and read off in
/// non-decreasing score order. Two things are left open by the scores: the
/// sign of the axis, and the order of positions with exactly equal scores
/// (frequent, since `D` only sees rank vectors and adjacent stages often
/// share one). Both are resolved by profile log-likelihood over the orders
/// consistent with the scores or the negated scores; exact ties go to the
/// score orientation, then to the lexicographically smaller order.
pub fn heuristic_rho(data: &Dataset, method: HeuristicMethod, mm: &MmOptions) -> Result<HeuristicResult> {
    let k = data.k();
    if k < 2 {
        return Err(EplError::InvalidParameter("heuristic needs K >= 2".into()));
    }
    let compressed = CompressedData::new(data);
    let tm = t_matrix(data);
    let zero_d = tm.d.iter().flatten().all(|&v| v == 0);
    if zero_d || compressed.distinct() == 1 {
        let id = Permutation::identity(k);
        let fwd = fit_compressed(&compressed, &id, mm).loglik;
        let rev = fit_compressed(&compressed, &id.reversed(), mm).loglik;
        return Ok(HeuristicResult {
            rho_hat: id,
            scores: vec![0.0; k],
            method,
            orientation_loglik: [fwd, rev],
            candidates_evaluated: 2,
            degenerate: true,
            t_matrix: tm,
        });
    }
    let d: Vec<Vec<f64>> = tm.d.iter().map(|r| r.iter().map(|&v| v as f64).collect()).collect();
    let scores = snap_scores(&match method {
        HeuristicMethod::Pca => pca_scores(&d),
        HeuristicMethod::Mds => mds_scores(&d),
    });
    let negated: Vec<f64> = scores.iter().map(|s| -s).collect();
    let fwd_orders = score_consistent_orders(&scores);
    let rev_orders = score_consistent_orders(&negated);
    let evaluated = fwd_orders.len() + rev_orders.len();
    let fwd = pick_best(score_all(&compressed, fwd_orders, mm)).expect("at least one order");
    let rev = pick_best(score_all(&compressed, rev_orders, mm)).expect("at least one order");
    let orientation_loglik = [fwd.fit.loglik, rev.fit.loglik];
    let (rho_hat, scores) = if rev.fit.loglik > fwd.fit.loglik {
        (rev.rho, negated)
    } else {
        (fwd.rho, scores)
    };
    Ok(HeuristicResult {
        rho_hat,
        scores,
        method,
        orientation_loglik,
        candidates_evaluated: evaluated,
        degenerate: false,
        t_matrix: tm,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitStrategy {
    Exhaustive,
    LocalSearch,
    HeuristicSeeded,
}

impl FromStr for FitStrategy {
    type Err = EplError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "exhaustive" => Ok(FitStrategy::Exhaustive),
            "local_search" | "local" => Ok(FitStrategy::LocalSearch),
            "heuristic_seeded" | "heuristic" => Ok(FitStrategy::HeuristicSeeded),
            other => Err(EplError::Unknown {
                kind: "fit strategy",
                name: other.to_string(),
            }),
        }
    }
}

impl fmt::Display for FitStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FitStrategy::Exhaustive => "exhaustive",
            FitStrategy::LocalSearch => "local_search",
            FitStrategy::HeuristicSeeded => "heuristic_seeded",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MleOptions {
    pub strategy: FitStrategy,
    /// Random starts for local search. Heuristic-seeded search climbs from the
    /// PCA order and its reversal plus `n_starts - 1` random starts.
    pub n_starts: usize,
    pub seed: u64,
    pub mm: MmOptions,
}

impl Default for MleOptions {
    fn default() -> Self {
        MleOptions {
            strategy: FitStrategy::HeuristicSeeded,
            n_starts: 1,
            seed: 0,
            mm: MmOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub params: EplParams,
    pub loglik: f64,
    pub strategy: FitStrategy,
    /// MM iterations of the winning fit.
    pub iterations: usize,
    pub converged: bool,
    pub boundary: bool,
    /// Number of distinct reference orders scored.
    pub candidates_evaluated: usize,
}

struct Scored {
    rho: Permutation,
    fit: WeightFit,
}

/// Deterministic preference: higher log-likelihood, then lexicographically smaller rho.
fn better(a: &Scored, b: &Scored) -> bool {
    a.fit.loglik > b.fit.loglik || (a.fit.loglik == b.fit.loglik && a.rho < b.rho)
}

fn score_all(data: &CompressedData, candidates: Vec<Permutation>, mm: &MmOptions) -> Vec<Scored> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        candidates
            .into_par_iter()
            .map(|rho| Scored { fit: fit_compressed(data, &rho, mm), rho })
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        candidates
            .into_iter()
            .map(|rho| Scored { fit: fit_compressed(data, &rho, mm), rho })
            .collect()
    }
}

fn pick_best(scored: Vec<Scored>) -> Option<Scored> {
    scored.into_iter().reduce(|a, b| if better(&b, &a) { b } else { a })
}

/// Steepest-ascent hill climbing over pair swaps of `rho`.
fn hill_climb(
    data: &CompressedData,
    start: Permutation,
    mm: &MmOptions,
    cache: &mut HashMap<Permutation, WeightFit>,
) -> Scored {
    let k = data.k();
    let fit = cache
        .entry(start.clone())
        .or_insert_with(|| fit_compressed(data, &start, mm))
        .clone();
    let mut current = Scored { rho: start, fit };
    loop {
        let neighbours: Vec<Permutation> = (0..k)
            .flat_map(|a| ((a + 1)..k).map(move |b| (a, b)))
            .map(|(a, b)| current.rho.swapped(a, b))
            .collect();
        let fresh: Vec<Permutation> = neighbours.iter().filter(|r| !cache.contains_key(*r)).cloned().collect();
        for s in score_all(data, fresh, mm) {
            cache.insert(s.rho, s.fit);
        }
        let best = pick_best(
            neighbours
                .into_iter()
                .map(|rho| Scored { fit: cache[&rho].clone(), rho })
                .collect(),
        );
        match best {
            Some(b) if b.fit.loglik > current.fit.loglik + 1e-10 * current.fit.loglik.abs() => current = b,
            _ => return current,
        }
    }
}

/// Maximum-likelihood EPL fit: profile MM for the weights, discrete search for rho.
pub fn fit_epl_mle(data: &Dataset, opts: &MleOptions) -> Result<FitResult> {
    let k = data.k();
    let compressed = CompressedData::new(data);
    let (best, evaluated) = match opts.strategy {
        FitStrategy::Exhaustive => {
            if k > EXHAUSTIVE_MAX_K {
                return Err(EplError::EnumerationLimit {
                    k,
                    limit: EXHAUSTIVE_MAX_K,
                });
            }
            let all: Vec<Permutation> = enumerate_permutations_up_to(k, EXHAUSTIVE_MAX_K)?.collect();
            let n = all.len();
            (pick_best(score_all(&compressed, all, &opts.mm)), n)
        }
        FitStrategy::LocalSearch | FitStrategy::HeuristicSeeded => {
            let mut rng = rng_from_seed(opts.seed);
            let mut starts = Vec::new();
            let random_starts = if opts.strategy == FitStrategy::HeuristicSeeded {
                let h = heuristic_rho(data, HeuristicMethod::Pca, &opts.mm)?;
                // the axis sign is the heuristic's usual failure, so climb from both orientations
                starts.push(h.rho_hat.reversed());
                starts.push(h.rho_hat);
                opts.n_starts.saturating_sub(1)
            } else {
                opts.n_starts.max(1)
            };
            for _ in 0..random_starts {
                let mut v: Vec<usize> = (0..k).collect();
                v.shuffle(&mut rng);
                starts.push(Permutation::from_zero_based_unchecked(v));
            }
            let mut cache = HashMap::new();
            let results: Vec<Scored> = starts
                .into_iter()
                .map(|s| hill_climb(&compressed, s, &opts.mm, &mut cache))
                .collect();
            (pick_best(results), cache.len())
        }
    };
    let best = best.ok_or_else(|| EplError::Fit("no candidate reference order".into()))?;
    Ok(FitResult {
        params: EplParams::new(best.rho, best.fit.weights)?,
        loglik: best.fit.loglik,
        strategy: opts.strategy,
        iterations: best.fit.iterations,
        converged: best.fit.converged,
        boundary: best.fit.boundary,
        candidates_evaluated: evaluated,
    })
}
