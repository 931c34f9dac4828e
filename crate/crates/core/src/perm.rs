//! Permutation algebra over `{1..K}`.
//!
//! One type serves as ranking (item -> position), ordering (position -> item)
//! and reference order (stage -> position). Entries are stored zero-based;
//! everything that crosses a public text boundary (Display, serde, the
//! `from_one_based` constructor) is one-based.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{EplError, Result};

/// Largest K for which exhaustive enumeration over `S_K` is allowed.
pub const ENUMERATION_LIMIT: usize = 8;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    /// Builds from zero-based entries, validating the bijection.
    pub fn from_zero_based(entries: Vec<usize>) -> Result<Self> {
        let k = entries.len();
        let mut seen = vec![false; k];
        for (pos, &v) in entries.iter().enumerate() {
            if v >= k {
                return Err(EplError::InvalidPermutation {
                    k,
                    detail: format!("entry {} at index {} out of range", v + 1, pos + 1),
                });
            }
            if std::mem::replace(&mut seen[v], true) {
                return Err(EplError::InvalidPermutation {
                    k,
                    detail: format!("entry {} repeated", v + 1),
                });
            }
        }
        Ok(Permutation(entries))
    }

    /// Builds from one-based entries, e.g. `(2, 3, 1)`.
    pub fn from_one_based(entries: &[usize]) -> Result<Self> {
        let k = entries.len();
        let zero = entries
            .iter()
            .enumerate()
            .map(|(pos, &v)| {
                v.checked_sub(1).ok_or_else(|| EplError::InvalidPermutation {
                    k,
                    detail: format!("entry 0 at index {}", pos + 1),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_zero_based(zero)
    }

    pub(crate) fn from_zero_based_unchecked(entries: Vec<usize>) -> Self {
        debug_assert!(Self::from_zero_based(entries.clone()).is_ok());
        Permutation(entries)
    }

    pub fn identity(k: usize) -> Self {
        Permutation((0..k).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Zero-based entries.
    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn to_one_based(&self) -> Vec<usize> {
        self.0.iter().map(|v| v + 1).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &v)| i == v)
    }

    pub fn invert(&self) -> Permutation {
        let mut inv = vec![0; self.0.len()];
        for (i, &v) in self.0.iter().enumerate() {
            inv[v] = i;
        }
        Permutation(inv)
    }

    /// `result[i] = self[other[i]]`.
    pub fn compose(&self, other: &Permutation) -> Result<Permutation> {
        check_same_len(self, other)?;
        Ok(Permutation(other.0.iter().map(|&i| self.0[i]).collect()))
    }

    pub fn reversed(&self) -> Permutation {
        Permutation(self.0.iter().rev().copied().collect())
    }

    /// Number of cycles in the cycle decomposition (fixed points count).
    pub fn cycle_count(&self) -> usize {
        let mut seen = vec![false; self.0.len()];
        let mut cycles = 0;
        for start in 0..self.0.len() {
            if seen[start] {
                continue;
            }
            cycles += 1;
            let mut cur = start;
            while !seen[cur] {
                seen[cur] = true;
                cur = self.0[cur];
            }
        }
        cycles
    }

    /// Swaps the entries at two zero-based indices.
    pub fn swapped(&self, a: usize, b: usize) -> Permutation {
        let mut v = self.0.clone();
        v.swap(a, b);
        Permutation(v)
    }
}

impl std::ops::Index<usize> for Permutation {
    type Output = usize;

    fn index(&self, i: usize) -> &usize {
        &self.0[i]
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Permutation{}", self)
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", v + 1)?;
        }
        write!(f, ")")
    }
}

/// Parses one-based comma or whitespace separated entries, with optional parentheses.
impl FromStr for Permutation {
    type Err = EplError;

    fn from_str(s: &str) -> Result<Self> {
        let trimmed = s.trim().trim_start_matches('(').trim_end_matches(')');
        let entries = trimmed
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<usize>().map_err(|_| EplError::InvalidPermutation {
                    k: 0,
                    detail: format!("cannot parse '{t}'"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if entries.is_empty() {
            return Err(EplError::Empty("permutation"));
        }
        Permutation::from_one_based(&entries)
    }
}

impl Serialize for Permutation {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_one_based().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Permutation {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<usize>::deserialize(deserializer)?;
        Permutation::from_one_based(&v).map_err(serde::de::Error::custom)
    }
}

fn check_same_len(a: &Permutation, b: &Permutation) -> Result<()> {
    if a.len() != b.len() {
        return Err(EplError::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    Ok(())
}

/// Ranks of a real vector. Rank 1 goes to the largest value when `descending`
/// (smallest otherwise); ties go to the smaller index first, so the result is
/// always a permutation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankVector {
    ranks: Permutation,
}

impl RankVector {
    /// Zero-based rank of each item (0 = best).
    pub fn ranks(&self) -> &Permutation {
        &self.ranks
    }

    pub fn to_one_based(&self) -> Vec<usize> {
        self.ranks.to_one_based()
    }

    pub fn into_permutation(self) -> Permutation {
        self.ranks
    }
}

pub fn rank_vector(values: &[f64], descending: bool) -> Result<RankVector> {
    if values.is_empty() {
        return Err(EplError::Empty("rank_vector input"));
    }
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| {
        let ord = if descending {
            values[b].total_cmp(&values[a])
        } else {
            values[a].total_cmp(&values[b])
        };
        ord.then(a.cmp(&b))
    });
    let mut ranks = vec![0; values.len()];
    for (r, &i) in idx.iter().enumerate() {
        ranks[i] = r;
    }
    Ok(RankVector {
        ranks: Permutation(ranks),
    })
}

/// Rank vector of integer counts, rank 1 = largest count.
pub(crate) fn rank_counts_desc(counts: &[u64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..counts.len()).collect();
    idx.sort_by(|&a, &b| counts[b].cmp(&counts[a]).then(a.cmp(&b)));
    let mut ranks = vec![0; counts.len()];
    for (r, &i) in idx.iter().enumerate() {
        ranks[i] = r;
    }
    ranks
}

/// Spearman rank correlation between two permutations treated as rank vectors.
pub fn spearman(a: &Permutation, b: &Permutation) -> Result<f64> {
    check_same_len(a, b)?;
    let k = a.len();
    if k < 2 {
        return Err(EplError::InvalidParameter(
            "spearman needs K >= 2".to_string(),
        ));
    }
    let ss: f64 = a
        .0
        .iter()
        .zip(&b.0)
        .map(|(&x, &y)| {
            let d = x as f64 - y as f64;
            d * d
        })
        .sum();
    let kf = k as f64;
    Ok(1.0 - 6.0 * ss / (kf * (kf * kf - 1.0)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Kendall,
    Cayley,
    Hamming,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::Kendall => "kendall",
            Metric::Cayley => "cayley",
            Metric::Hamming => "hamming",
        }
    }
}

impl FromStr for Metric {
    type Err = EplError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "kendall" => Ok(Metric::Kendall),
            "cayley" => Ok(Metric::Cayley),
            "hamming" => Ok(Metric::Hamming),
            other => Err(EplError::Unknown {
                kind: "metric",
                name: other.to_string(),
            }),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Distance between two permutations viewed as vectors.
///
/// Kendall counts discordant index pairs, Cayley is `K - cycles(a∘b⁻¹)`,
/// Hamming counts differing entries. All three are right-invariant:
/// `d(a∘c, b∘c) = d(a, b)`.
pub fn perm_distance(a: &Permutation, b: &Permutation, metric: Metric) -> Result<usize> {
    check_same_len(a, b)?;
    let k = a.len();
    Ok(match metric {
        Metric::Kendall => {
            // item pairs placed in opposite relative order
            let (ra, rb) = (a.invert(), b.invert());
            let mut disc = 0;
            for i in 0..k {
                for j in (i + 1)..k {
                    if (ra.0[i] < ra.0[j]) != (rb.0[i] < rb.0[j]) {
                        disc += 1;
                    }
                }
            }
            disc
        }
        Metric::Cayley => k - a.compose(&b.invert())?.cycle_count(),
        Metric::Hamming => a.0.iter().zip(&b.0).filter(|(x, y)| x != y).count(),
    })
}

/// Lexicographic iterator over `S_K`.
#[derive(Clone, Debug)]
pub struct Permutations {
    next: Option<Vec<usize>>,
}

impl Iterator for Permutations {
    type Item = Permutation;

    fn next(&mut self) -> Option<Permutation> {
        let cur = self.next.take()?;
        let mut succ = cur.clone();
        if next_lexicographic(&mut succ) {
            self.next = Some(succ);
        }
        Some(Permutation(cur))
    }
}

fn next_lexicographic(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// All `K!` permutations in lexicographic order, for `1 <= K <= ENUMERATION_LIMIT`.
pub fn enumerate_permutations(k: usize) -> Result<Permutations> {
    enumerate_permutations_up_to(k, ENUMERATION_LIMIT)
}

/// Same as [`enumerate_permutations`] with an explicit limit.
pub fn enumerate_permutations_up_to(k: usize, limit: usize) -> Result<Permutations> {
    if k > limit {
        return Err(EplError::EnumerationLimit { k, limit });
    }
    if k == 0 {
        return Err(EplError::Empty("permutation size"));
    }
    Ok(Permutations {
        next: Some((0..k).collect()),
    })
}

pub fn factorial(k: usize) -> u64 {
    (1..=k as u64).product()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::{HashSet, VecDeque};

    fn p(v: &[usize]) -> Permutation {
        Permutation::from_one_based(v).unwrap()
    }

    #[test]
    fn invert_examples() {
        assert_eq!(p(&[1, 2, 3]).invert(), p(&[1, 2, 3]));
        assert_eq!(p(&[2, 3, 1]).invert(), p(&[3, 1, 2]));
        assert_eq!(p(&[2, 1, 3, 4]).invert(), p(&[2, 1, 3, 4]));
    }

    #[test]
    fn compose_examples() {
        assert_eq!(p(&[1, 2, 3]).compose(&p(&[3, 1, 2])).unwrap(), p(&[3, 1, 2]));
        assert_eq!(p(&[2, 1, 3]).compose(&p(&[3, 1, 2])).unwrap(), p(&[3, 2, 1]));
        assert!(matches!(
            p(&[1, 2]).compose(&p(&[1, 2, 3])),
            Err(EplError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn construction_rejects_non_bijections() {
        assert!(Permutation::from_one_based(&[1, 1, 3]).is_err());
        assert!(Permutation::from_one_based(&[0, 1, 2]).is_err());
        assert!(Permutation::from_one_based(&[1, 2, 4]).is_err());
        assert_eq!("(2,3,1)".parse::<Permutation>().unwrap(), p(&[2, 3, 1]));
        assert_eq!("2 3 1".parse::<Permutation>().unwrap(), p(&[2, 3, 1]));
        assert!("2,x,1".parse::<Permutation>().is_err());
    }

    #[test]
    fn rank_vector_examples() {
        let r = rank_vector(&[0.15, 0.4, 0.12, 0.08, 0.25], true).unwrap();
        assert_eq!(r.to_one_based(), vec![3, 1, 4, 5, 2]);
        let r = rank_vector(&[5.0, 5.0, 1.0], true).unwrap();
        assert_eq!(r.to_one_based(), vec![1, 2, 3]);
        let r = rank_vector(&[1.0, 2.0, 3.0], true).unwrap();
        assert_eq!(r.to_one_based(), vec![3, 2, 1]);
        let r = rank_vector(&[1.0, 2.0, 3.0], false).unwrap();
        assert_eq!(r.to_one_based(), vec![1, 2, 3]);
        assert_eq!(rank_vector(&[], true), Err(EplError::Empty("rank_vector input")));
    }

    #[test]
    fn spearman_examples() {
        let a = p(&[1, 2, 3, 4]);
        assert_eq!(spearman(&a, &a).unwrap(), 1.0);
        assert_eq!(spearman(&p(&[1, 2, 3]), &p(&[3, 2, 1])).unwrap(), -1.0);
        // 1 - 6*2/(4*15)
        assert!((spearman(&a, &p(&[2, 1, 3, 4])).unwrap() - 0.8).abs() < 1e-15);
        assert!(spearman(&p(&[1]), &p(&[1])).is_err());
    }

    #[test]
    fn distance_examples() {
        let id = p(&[1, 2, 3]);
        let sw = p(&[2, 1, 3]);
        for m in [Metric::Kendall, Metric::Cayley, Metric::Hamming] {
            assert_eq!(perm_distance(&id, &id, m).unwrap(), 0);
        }
        assert_eq!(perm_distance(&id, &sw, Metric::Kendall).unwrap(), 1);
        assert_eq!(perm_distance(&id, &sw, Metric::Hamming).unwrap(), 2);
        assert_eq!(perm_distance(&id, &sw, Metric::Cayley).unwrap(), 1);
        assert_eq!(perm_distance(&id, &p(&[3, 2, 1]), Metric::Kendall).unwrap(), 3);
        assert!("manhattan".parse::<Metric>().is_err());
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate_permutations(1).unwrap().count(), 1);
        assert_eq!(enumerate_permutations(3).unwrap().count(), 6);
        let all: Vec<_> = enumerate_permutations(5).unwrap().collect();
        assert_eq!(all.len(), 120);
        assert_eq!(all.iter().collect::<HashSet<_>>().len(), 120);
        assert!(all.windows(2).all(|w| w[0] < w[1]));
        assert!(matches!(
            enumerate_permutations(9),
            Err(EplError::EnumerationLimit { k: 9, limit: 8 })
        ));
    }

    /// Minimum number of adjacent transpositions from `a` to `b`, by BFS.
    fn adjacent_swap_distance(a: &Permutation, b: &Permutation) -> usize {
        let mut seen = HashSet::new();
        let mut queue = VecDeque::new();
        queue.push_back((a.clone(), 0));
        seen.insert(a.clone());
        while let Some((cur, d)) = queue.pop_front() {
            if &cur == b {
                return d;
            }
            for i in 0..cur.len() - 1 {
                let nxt = cur.swapped(i, i + 1);
                if seen.insert(nxt.clone()) {
                    queue.push_back((nxt, d + 1));
                }
            }
        }
        unreachable!()
    }

    #[test]
    fn kendall_matches_bfs_oracle() {
        for k in 2..=5 {
            let all: Vec<_> = enumerate_permutations(k).unwrap().collect();
            let base = &all[all.len() / 3];
            for other in &all {
                assert_eq!(
                    perm_distance(base, other, Metric::Kendall).unwrap(),
                    adjacent_swap_distance(base, other)
                );
            }
        }
    }

    fn arb_perm(max_k: usize) -> impl Strategy<Value = Permutation> {
        (1..=max_k)
            .prop_flat_map(|k| Just((0..k).collect::<Vec<_>>()).prop_shuffle())
            .prop_map(|v| Permutation::from_zero_based(v).unwrap())
    }

    proptest! {
        #[test]
        fn compose_with_inverse_is_identity(x in arb_perm(12)) {
            prop_assert!(x.compose(&x.invert()).unwrap().is_identity());
            prop_assert_eq!(x.invert().invert(), x);
        }

        #[test]
        fn rank_vector_is_permutation(vals in proptest::collection::vec(-3i32..3, 1..15), desc: bool) {
            let v: Vec<f64> = vals.iter().map(|&x| x as f64 * 0.5).collect();
            let r = rank_vector(&v, desc).unwrap();
            prop_assert!(Permutation::from_zero_based(r.ranks().as_slice().to_vec()).is_ok());
        }

        #[test]
        fn spearman_symmetric((a, b) in (2usize..10).prop_flat_map(|k| {
            let s = Just((0..k).collect::<Vec<_>>());
            (s.clone().prop_shuffle(), s.prop_shuffle())
        })) {
            let a = Permutation::from_zero_based(a).unwrap();
            let b = Permutation::from_zero_based(b).unwrap();
            prop_assert_eq!(spearman(&a, &b).unwrap(), spearman(&b, &a).unwrap());
            prop_assert_eq!(spearman(&a, &a).unwrap(), 1.0);
        }

        #[test]
        fn serde_round_trip(x in arb_perm(9)) {
            let s = serde_json::to_string(&x).unwrap();
            prop_assert_eq!(serde_json::from_str::<Permutation>(&s).unwrap(), x);
        }
    }
}
