//! Distance-based (Mallows) models, `P(o) ∝ exp(-theta * d(o, center))`.
//!
//! All three metrics are invariant under relabeling items, so a draw is
//! `center ∘ x` where `x` is sampled around the identity:
//! - Kendall: repeated insertion, the insertion offsets are independent
//!   truncated geometrics.
//! - Cayley: sequential cycle construction; each item either opens a new cycle
//!   or joins after one of the earlier items, one join per unit of distance.
//! - Hamming: the distance `d` is drawn from its exact law
//!   `∝ C(K, d) D_d e^{-theta d}` (D_d = derangements), then a uniform
//!   derangement of a uniform `d`-subset of positions.

use rand::seq::{index, SliceRandom};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{EplError, Result};
use crate::perm::{perm_distance, Metric, Permutation};
use crate::rng::rng_from_seed;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MallowsParams {
    pub center: Permutation,
    pub theta: f64,
    pub metric: Metric,
}

impl MallowsParams {
    pub fn new(center: Permutation, theta: f64, metric: Metric) -> Result<Self> {
        if !(theta.is_finite() && theta >= 0.0) {
            return Err(EplError::InvalidParameter(format!(
                "theta must be finite and non-negative, got {theta}"
            )));
        }
        Ok(MallowsParams {
            center,
            theta,
            metric,
        })
    }

    pub fn k(&self) -> usize {
        self.center.len()
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn derangements(n: usize) -> Vec<f64> {
    let mut d = vec![1.0, 0.0];
    for m in 2..=n {
        let next = (m - 1) as f64 * (d[m - 1] + d[m - 2]);
        d.push(next);
    }
    d.truncate(n + 1);
    d
}

/// Unnormalized weight of each distance value `0..=K` (Hamming only).
fn hamming_distance_weights(k: usize, theta: f64) -> Vec<f64> {
    let der = derangements(k);
    (0..=k)
        .map(|d| binomial(k, d) * der[d] * (-theta * d as f64).exp())
        .collect()
}

/// Closed-form normalizing constant `Σ_{S_K} exp(-theta d(., center))`.
pub fn mallows_partition(k: usize, theta: f64, metric: Metric) -> f64 {
    let q = (-theta).exp();
    match metric {
        Metric::Kendall => (1..=k)
            .map(|j| (0..j).map(|v| q.powi(v as i32)).sum::<f64>())
            .product(),
        Metric::Cayley => (0..k).map(|j| 1.0 + j as f64 * q).product(),
        Metric::Hamming => hamming_distance_weights(k, theta).iter().sum(),
    }
}

pub fn mallows_pmf(ordering: &Permutation, params: &MallowsParams) -> Result<f64> {
    let d = perm_distance(ordering, &params.center, params.metric)?;
    Ok((-params.theta * d as f64).exp() / mallows_partition(params.k(), params.theta, params.metric))
}

fn draw_categorical<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    let u = rng.random::<f64>() * total;
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return i;
        }
    }
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
}

fn draw_kendall_around_identity<R: Rng + ?Sized>(k: usize, theta: f64, rng: &mut R) -> Vec<usize> {
    let q = (-theta).exp();
    let mut x: Vec<usize> = Vec::with_capacity(k);
    let mut offsets = Vec::with_capacity(k);
    for item in 0..k {
        // `offset` earlier (smaller) items end up after the new largest item
        offsets.clear();
        offsets.extend((0..=item).map(|v| q.powi(v as i32)));
        let offset = draw_categorical(&offsets, rng);
        x.insert(item - offset, item);
    }
    x
}

fn draw_cayley_around_identity<R: Rng + ?Sized>(k: usize, theta: f64, rng: &mut R) -> Vec<usize> {
    let q = (-theta).exp();
    let mut succ: Vec<usize> = Vec::with_capacity(k);
    for item in 0..k {
        let p_new = 1.0 / (1.0 + item as f64 * q);
        if item == 0 || rng.random::<f64>() < p_new {
            succ.push(item);
        } else {
            let after = rng.random_range(0..item);
            succ.push(succ[after]);
            succ[after] = item;
        }
    }
    succ
}

fn draw_hamming_around_identity<R: Rng + ?Sized>(k: usize, theta: f64, rng: &mut R) -> Vec<usize> {
    let d = draw_categorical(&hamming_distance_weights(k, theta), rng);
    let mut x: Vec<usize> = (0..k).collect();
    if d == 0 {
        return x;
    }
    let moved = index::sample(rng, k, d).into_vec();
    let mut targets = moved.clone();
    loop {
        targets.shuffle(rng);
        if moved.iter().zip(&targets).all(|(a, b)| a != b) {
            break;
        }
    }
    for (&pos, &val) in moved.iter().zip(&targets) {
        x[pos] = val;
    }
    x
}

pub fn mallows_draw<R: Rng + ?Sized>(params: &MallowsParams, rng: &mut R) -> Permutation {
    let k = params.k();
    let x = match params.metric {
        Metric::Kendall => draw_kendall_around_identity(k, params.theta, rng),
        Metric::Cayley => draw_cayley_around_identity(k, params.theta, rng),
        Metric::Hamming => draw_hamming_around_identity(k, params.theta, rng),
    };
    let shifted = x.as_slice().iter().map(|&i| params.center[i]).collect();
    Permutation::from_zero_based_unchecked(shifted)
}

pub fn mallows_sample_with<R: Rng + ?Sized>(
    params: &MallowsParams,
    n: usize,
    rng: &mut R,
) -> Result<Dataset> {
    if n == 0 {
        return Err(EplError::InvalidParameter("sample size must be >= 1".into()));
    }
    Dataset::new((0..n).map(|_| mallows_draw(params, rng)).collect())
}

pub fn mallows_sample(params: &MallowsParams, n: usize, seed: u64) -> Result<Dataset> {
    mallows_sample_with(params, n, &mut rng_from_seed(seed))
}
