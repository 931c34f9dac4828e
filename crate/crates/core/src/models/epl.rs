//! Extended Plackett-Luce model.
//!
//! At stage `t` an item is drawn from those still unplaced with probability
//! proportional to its support weight and put in position `rho(t)`. With
//! `rho` the identity this is the ordinary Plackett-Luce model, and in general
//! `P_EPL(o | rho, p) = P_PL(o ∘ rho | p)`.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{EplError, Result};
use crate::perm::{enumerate_permutations, Permutation};
use crate::rng::{rng_from_seed, EplRng};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawEplParams")]
pub struct EplParams {
    rho: Permutation,
    weights: Vec<f64>,
}

#[derive(Deserialize)]
struct RawEplParams {
    rho: Permutation,
    weights: Vec<f64>,
}

impl TryFrom<RawEplParams> for EplParams {
    type Error = EplError;

    fn try_from(raw: RawEplParams) -> Result<Self> {
        EplParams::new(raw.rho, raw.weights)
    }
}

impl EplParams {
    pub fn new(rho: Permutation, weights: Vec<f64>) -> Result<Self> {
        if rho.len() != weights.len() {
            return Err(EplError::DimensionMismatch {
                expected: rho.len(),
                found: weights.len(),
            });
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(EplError::InvalidParameter(format!(
                "support weights must be positive and finite, got {w}"
            )));
        }
        Ok(EplParams { rho, weights })
    }

    /// Forward-order (ordinary Plackett-Luce) parameters.
    pub fn plackett_luce(weights: Vec<f64>) -> Result<Self> {
        Self::new(Permutation::identity(weights.len()), weights)
    }

    pub fn rho(&self) -> &Permutation {
        &self.rho
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn k(&self) -> usize {
        self.weights.len()
    }

    /// Weights rescaled to sum to one.
    pub fn normalized_weights(&self) -> Vec<f64> {
        let total: f64 = self.weights.iter().sum();
        self.weights.iter().map(|w| w / total).collect()
    }
}

/// Plackett-Luce probability of a stage sequence (items in order of selection).
pub fn pl_sequence_prob(sequence: &[usize], weights: &[f64]) -> f64 {
    let mut remaining: f64 = sequence.iter().map(|&i| weights[i]).sum();
    let mut prob = 1.0;
    for &item in &sequence[..sequence.len().saturating_sub(1)] {
        prob *= weights[item] / remaining;
        remaining -= weights[item];
    }
    prob
}

/// Log of [`pl_sequence_prob`], computed with exact suffix sums.
pub fn pl_sequence_log_prob(sequence: &[usize], weights: &[f64]) -> f64 {
    let k = sequence.len();
    let mut suffix = 0.0;
    let mut ll = 0.0;
    for t in (0..k).rev() {
        let w = weights[sequence[t]];
        suffix += w;
        if t + 1 < k {
            ll += w.ln() - suffix.ln();
        }
    }
    ll
}

pub fn epl_pmf(ordering: &Permutation, params: &EplParams) -> Result<f64> {
    let seq = ordering.compose(params.rho())?;
    Ok(pl_sequence_prob(seq.as_slice(), params.weights()))
}

pub fn epl_log_pmf(ordering: &Permutation, params: &EplParams) -> Result<f64> {
    let seq = ordering.compose(params.rho())?;
    Ok(pl_sequence_log_prob(seq.as_slice(), params.weights()))
}

pub(crate) fn sample_pl_sequence<R: Rng + ?Sized>(
    weights: &[f64],
    rng: &mut R,
    scratch: &mut Vec<usize>,
) -> Vec<usize> {
    scratch.clear();
    scratch.extend(0..weights.len());
    let mut total: f64 = weights.iter().sum();
    let mut seq = Vec::with_capacity(weights.len());
    while scratch.len() > 1 {
        let u = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut pick = scratch.len() - 1;
        for (slot, &item) in scratch.iter().enumerate() {
            acc += weights[item];
            if u < acc {
                pick = slot;
                break;
            }
        }
        let item = scratch.remove(pick);
        total -= weights[item];
        seq.push(item);
    }
    seq.push(scratch[0]);
    seq
}

/// One ordering drawn from EPL(rho, p).
pub fn epl_draw<R: Rng + ?Sized>(params: &EplParams, rng: &mut R) -> Permutation {
    let mut scratch = Vec::with_capacity(params.k());
    draw_with_scratch(params, rng, &mut scratch)
}

fn draw_with_scratch<R: Rng + ?Sized>(
    params: &EplParams,
    rng: &mut R,
    scratch: &mut Vec<usize>,
) -> Permutation {
    let seq = sample_pl_sequence(params.weights(), rng, scratch);
    let mut ordering = vec![0; params.k()];
    for (stage, item) in seq.into_iter().enumerate() {
        ordering[params.rho()[stage]] = item;
    }
    Permutation::from_zero_based_unchecked(ordering)
}

pub fn epl_sample_with<R: Rng + ?Sized>(params: &EplParams, n: usize, rng: &mut R) -> Result<Dataset> {
    if n == 0 {
        return Err(EplError::InvalidParameter("sample size must be >= 1".into()));
    }
    let mut scratch = Vec::with_capacity(params.k());
    let rows = (0..n)
        .map(|_| draw_with_scratch(params, rng, &mut scratch))
        .collect();
    Dataset::new(rows)
}

pub fn epl_sample(params: &EplParams, n: usize, seed: u64) -> Result<Dataset> {
    epl_sample_with(params, n, &mut rng_from_seed(seed))
}

/// Exact probability of each item being selected at every stage, by
/// enumeration of `S_K`. Row `t` holds `q^[t+1]`.
pub fn epl_exact_marginal_table(params: &EplParams) -> Result<Vec<Vec<f64>>> {
    let k = params.k();
    let mut table = vec![vec![0.0; k]; k];
    // stage marginals do not depend on rho: enumerate stage sequences directly
    for seq in enumerate_permutations(k)? {
        let prob = pl_sequence_prob(seq.as_slice(), params.weights());
        for (stage, &item) in seq.as_slice().iter().enumerate() {
            table[stage][item] += prob;
        }
    }
    Ok(table)
}

/// `q^[stage]_i` for one-based `stage`.
pub fn epl_exact_stage_marginals(params: &EplParams, stage: usize) -> Result<Vec<f64>> {
    if stage == 0 || stage > params.k() {
        return Err(EplError::InvalidParameter(format!(
            "stage {stage} outside 1..{}",
            params.k()
        )));
    }
    Ok(epl_exact_marginal_table(params)?.swap_remove(stage - 1))
}

/// Uniform reference order and iid Uniform(0,1) support weights.
pub fn draw_uniform_epl_with(k: usize, rng: &mut EplRng) -> Result<EplParams> {
    if k < 2 {
        return Err(EplError::InvalidParameter("K must be >= 2".into()));
    }
    let mut rho: Vec<usize> = (0..k).collect();
    rho.shuffle(rng);
    let weights = (0..k)
        .map(|_| loop {
            let w = rng.random::<f64>();
            if w > 0.0 {
                break w;
            }
        })
        .collect();
    EplParams::new(Permutation::from_zero_based_unchecked(rho), weights)
}

pub fn draw_uniform_epl(k: usize, seed: u64) -> Result<EplParams> {
    draw_uniform_epl_with(k, &mut rng_from_seed(seed))
}
