//! Thurstone order-statistics model with independent unit-variance normal scores.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{EplError, Result};
use crate::perm::Permutation;
use crate::rng::rng_from_seed;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThurstoneParams {
    pub means: Vec<f64>,
}

impl ThurstoneParams {
    pub fn new(means: Vec<f64>) -> Result<Self> {
        if means.is_empty() {
            return Err(EplError::Empty("thurstone means"));
        }
        if means.iter().any(|m| !m.is_finite()) {
            return Err(EplError::InvalidParameter("thurstone means must be finite".into()));
        }
        Ok(ThurstoneParams { means })
    }
}

pub fn thurstone_draw<R: Rng + ?Sized>(params: &ThurstoneParams, rng: &mut R) -> Permutation {
    let scores: Vec<f64> = params
        .means
        .iter()
        .map(|m| m + rng.sample::<f64, _>(StandardNormal))
        .collect();
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    Permutation::from_zero_based_unchecked(order)
}

pub fn thurstone_sample_with<R: Rng + ?Sized>(
    params: &ThurstoneParams,
    n: usize,
    rng: &mut R,
) -> Result<Dataset> {
    if n == 0 {
        return Err(EplError::InvalidParameter("sample size must be >= 1".into()));
    }
    Dataset::new((0..n).map(|_| thurstone_draw(params, rng)).collect())
}

pub fn thurstone_sample(params: &ThurstoneParams, n: usize, seed: u64) -> Result<Dataset> {
    thurstone_sample_with(params, n, &mut rng_from_seed(seed))
}
