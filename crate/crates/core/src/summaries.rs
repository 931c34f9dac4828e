//! Frequency summaries of a ranking sample. All counts are exact integers.

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{EplError, Result};
use crate::perm::Permutation;

/// `counts[j][i]`: number of units placing item `i` in position `j`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarginalMatrix {
    pub counts: Vec<Vec<u64>>,
}

impl MarginalMatrix {
    pub fn row(&self, position: usize) -> &[u64] {
        &self.counts[position]
    }
}

/// `tau[i][i']`: number of units ranking item `i` ahead of item `i'`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairwiseCounts {
    pub tau: Vec<Vec<u64>>,
}

/// Pairwise selections restricted to stage choice sets under a reference order.
///
/// `tau[t][i][i']` counts units where both items are still available at stage
/// `t` and `i` is selected before `i'`; `n_pairs[t][i][i']` counts units where
/// both are available at stage `t`. Stage index `t` is zero-based and runs
/// over `0..K-1` (the final stage has a single item and no pairs).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StagewisePairwise {
    pub tau: Vec<Vec<Vec<u64>>>,
    pub n_pairs: Vec<Vec<Vec<u64>>>,
}

pub fn first_order_marginals(data: &Dataset) -> MarginalMatrix {
    let k = data.k();
    let mut counts = vec![vec![0u64; k]; k];
    for o in data.orderings() {
        for (pos, &item) in o.as_slice().iter().enumerate() {
            counts[pos][item] += 1;
        }
    }
    MarginalMatrix { counts }
}

pub fn top_frequencies(data: &Dataset) -> Vec<u64> {
    let mut top = vec![0u64; data.k()];
    for o in data.orderings() {
        top[o[0]] += 1;
    }
    top
}

pub fn pairwise_counts(data: &Dataset) -> PairwiseCounts {
    let k = data.k();
    let mut tau = vec![vec![0u64; k]; k];
    for o in data.orderings() {
        let s = o.as_slice();
        for a in 0..k {
            for b in (a + 1)..k {
                tau[s[a]][s[b]] += 1;
            }
        }
    }
    PairwiseCounts { tau }
}

/// Stagewise counts for reference order `rho`.
///
/// The stage at which unit `s` selects item `i` is `rho⁻¹(π_s(i))`. Both
/// items of a pair are available at every stage up to the earlier of their
/// two selection stages, where the earlier one wins.
pub fn stagewise_pairwise(data: &Dataset, rho: &Permutation) -> Result<StagewisePairwise> {
    let k = data.k();
    if rho.len() != k {
        return Err(EplError::DimensionMismatch {
            expected: k,
            found: rho.len(),
        });
    }
    let stages = k.saturating_sub(1);
    let mut tau = vec![vec![vec![0u64; k]; k]; stages];
    let mut n_pairs = vec![vec![vec![0u64; k]; k]; stages];
    let composed = data.compose_with(rho)?;
    for seq in composed.orderings() {
        let s = seq.as_slice();
        // the pair (s[a], s[b]) with a < b is available at stages 0..=a
        for a in 0..k {
            for b in (a + 1)..k {
                let (win, lose) = (s[a], s[b]);
                for t in 0..=a.min(stages.saturating_sub(1)) {
                    tau[t][win][lose] += 1;
                    n_pairs[t][win][lose] += 1;
                    n_pairs[t][lose][win] += 1;
                }
            }
        }
    }
    Ok(StagewisePairwise { tau, n_pairs })
}
