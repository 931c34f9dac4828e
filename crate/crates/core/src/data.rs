use serde::{Deserialize, Serialize};

use crate::error::{EplError, Result};
use crate::perm::Permutation;

/// `N` complete orderings of `K` items. Row `s` maps position -> item.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Permutation>", into = "Vec<Permutation>")]
pub struct Dataset {
    k: usize,
    orderings: Vec<Permutation>,
}

impl Dataset {
    pub fn new(orderings: Vec<Permutation>) -> Result<Self> {
        let first = orderings.first().ok_or(EplError::Empty("dataset"))?;
        let k = first.len();
        if k == 0 {
            return Err(EplError::Empty("ordering"));
        }
        if let Some(bad) = orderings.iter().find(|o| o.len() != k) {
            return Err(EplError::DimensionMismatch {
                expected: k,
                found: bad.len(),
            });
        }
        Ok(Dataset { k, orderings })
    }

    /// Builds from rankings (item -> position) by inverting each row.
    pub fn from_rankings(rankings: Vec<Permutation>) -> Result<Self> {
        Self::new(rankings.iter().map(Permutation::invert).collect())
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.orderings.len()
    }

    pub fn orderings(&self) -> &[Permutation] {
        &self.orderings
    }

    pub fn rankings(&self) -> Vec<Permutation> {
        self.orderings.iter().map(Permutation::invert).collect()
    }

    /// Each ordering composed with `rho`: row `s` becomes the sequence of
    /// items chosen at stages `1..K`. Under EPL(rho, p) the result is PL(p).
    pub fn compose_with(&self, rho: &Permutation) -> Result<Dataset> {
        if rho.len() != self.k {
            return Err(EplError::DimensionMismatch {
                expected: self.k,
                found: rho.len(),
            });
        }
        let orderings = self
            .orderings
            .iter()
            .map(|o| o.compose(rho))
            .collect::<Result<Vec<_>>>()?;
        Ok(Dataset {
            k: self.k,
            orderings,
        })
    }

    /// Relabels items: item `i` becomes `sigma[i]` in every row.
    pub fn relabel_items(&self, sigma: &Permutation) -> Result<Dataset> {
        let orderings = self
            .orderings
            .iter()
            .map(|o| sigma.compose(o))
            .collect::<Result<Vec<_>>>()?;
        Ok(Dataset {
            k: self.k,
            orderings,
        })
    }

    pub fn distinct_orderings(&self) -> usize {
        let mut rows: Vec<&Permutation> = self.orderings.iter().collect();
        rows.sort();
        rows.dedup();
        rows.len()
    }
}

impl TryFrom<Vec<Permutation>> for Dataset {
    type Error = EplError;

    fn try_from(v: Vec<Permutation>) -> Result<Self> {
        Dataset::new(v)
    }
}

impl From<Dataset> for Vec<Permutation> {
    fn from(d: Dataset) -> Self {
        d.orderings
    }
}
