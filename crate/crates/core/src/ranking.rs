//! Ranking data types and the basic transformations on them: conversion
//! between ranking and ordering format, censoring, completion and
//! augmentation of partial rankings.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Maximum number of missing entries for which the compatible set is enumerated.
pub const AUGMENT_LIMIT: usize = 10;

/// A complete ranking: entry `i` is the rank (1 = best) given to item `i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Ranking(Vec<usize>);

impl Ranking {
    pub fn new(ranks: Vec<usize>) -> Result<Self> {
        check_permutation(&ranks)?;
        Ok(Ranking(ranks))
    }

    /// Builds a ranking without validation. Callers must guarantee a permutation of `1..=n`.
    pub(crate) fn from_vec_unchecked(ranks: Vec<usize>) -> Self {
        debug_assert!(check_permutation(&ranks).is_ok());
        Ranking(ranks)
    }

    pub fn identity(n: usize) -> Self {
        Ranking((1..=n).collect())
    }

    pub fn reversed(n: usize) -> Self {
        Ranking((1..=n).rev().collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn ranks(&self) -> &[usize] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<usize> {
        self.0
    }

    pub fn to_ordering(&self) -> Ordering {
        let mut items = vec![0; self.0.len()];
        for (item, &rank) in self.0.iter().enumerate() {
            items[rank - 1] = item + 1;
        }
        Ordering(items)
    }

    /// Uniformly random ranking of `n` items.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        use rand::seq::SliceRandom;
        let mut v: Vec<usize> = (1..=n).collect();
        v.shuffle(rng);
        Ranking(v)
    }
}

impl std::ops::Index<usize> for Ranking {
    type Output = usize;
    fn index(&self, i: usize) -> &usize {
        &self.0[i]
    }
}

/// An ordering: entry `j` is the item (1-based) placed at rank `j + 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Ordering(Vec<usize>);

impl Ordering {
    pub fn new(items: Vec<usize>) -> Result<Self> {
        check_permutation(&items)?;
        Ok(Ordering(items))
    }

    pub fn items(&self) -> &[usize] {
        &self.0
    }

    pub fn to_ranking(&self) -> Ranking {
        let mut ranks = vec![0; self.0.len()];
        for (pos, &item) in self.0.iter().enumerate() {
            ranks[item - 1] = pos + 1;
        }
        Ranking(ranks)
    }
}

fn check_permutation(v: &[usize]) -> Result<()> {
    let n = v.len();
    let mut seen = vec![false; n];
    for &x in v {
        if x == 0 || x > n {
            return Err(Error::InvalidRanking(format!("value {x} outside 1..={n}")));
        }
        if std::mem::replace(&mut seen[x - 1], true) {
            return Err(Error::InvalidRanking(format!("duplicate value {x}")));
        }
    }
    Ok(())
}

/// A possibly incomplete ranking; `None` marks a missing entry.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PartialRanking(Vec<Option<usize>>);

impl PartialRanking {
    pub fn new(ranks: Vec<Option<usize>>) -> Result<Self> {
        let n = ranks.len();
        let mut seen = vec![false; n];
        for &x in ranks.iter().flatten() {
            if x == 0 || x > n {
                return Err(Error::InvalidRanking(format!("value {x} outside 1..={n}")));
            }
            if std::mem::replace(&mut seen[x - 1], true) {
                return Err(Error::InvalidRanking(format!("duplicate value {x}")));
            }
        }
        Ok(PartialRanking(ranks))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entries(&self) -> &[Option<usize>] {
        &self.0
    }

    pub fn n_observed(&self) -> usize {
        self.0.iter().filter(|x| x.is_some()).count()
    }

    pub fn n_missing(&self) -> usize {
        self.0.len() - self.n_observed()
    }

    /// Items (0-based) with a missing rank, in item order.
    pub fn missing_items(&self) -> Vec<usize> {
        (0..self.0.len()).filter(|&i| self.0[i].is_none()).collect()
    }

    /// Ranks not used by any observed entry, ascending.
    pub fn unused_ranks(&self) -> Vec<usize> {
        let n = self.0.len();
        let mut used = vec![false; n + 1];
        for &r in self.0.iter().flatten() {
            used[r] = true;
        }
        (1..=n).filter(|&r| !used[r]).collect()
    }

    /// The full ranking, if at most one entry is missing (its rank is then forced).
    pub fn to_complete(&self) -> Option<Ranking> {
        match self.n_missing() {
            0 => Some(Ranking(self.0.iter().map(|x| x.unwrap()).collect())),
            1 => {
                let fill = self.unused_ranks()[0];
                Some(Ranking(self.0.iter().map(|x| x.unwrap_or(fill)).collect()))
            }
            _ => None,
        }
    }

    /// True when the observed values are exactly `{1..k}` for some `k >= 1`.
    pub fn is_top_k_shaped(&self) -> bool {
        let k = self.n_observed();
        k > 0 && self.0.iter().flatten().all(|&r| r <= k)
    }
}

impl From<Ranking> for PartialRanking {
    fn from(r: Ranking) -> Self {
        PartialRanking(r.0.into_iter().map(Some).collect())
    }
}

impl From<&Ranking> for PartialRanking {
    fn from(r: &Ranking) -> Self {
        PartialRanking(r.0.iter().copied().map(Some).collect())
    }
}

/// A sample of `N` (partial) rankings of `n` labelled items.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingDataset {
    rows: Vec<PartialRanking>,
    item_labels: Vec<String>,
}

/// Distinct rows with their frequencies, in canonical (sorted) order.
#[derive(Debug, Clone, PartialEq)]
pub struct Aggregated<T = PartialRanking> {
    pub rows: Vec<T>,
    pub counts: Vec<usize>,
    /// For each original row, the index of its distinct row.
    pub row_index: Vec<usize>,
}

impl<T: Clone> Aggregated<T> {
    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    /// Expands back to the multiset of rows (in canonical order).
    pub fn expand(&self) -> Vec<T> {
        self.rows
            .iter()
            .zip(&self.counts)
            .flat_map(|(r, &c)| std::iter::repeat_n(r.clone(), c))
            .collect()
    }
}

impl RankingDataset {
    pub fn new(rows: Vec<PartialRanking>, item_labels: Vec<String>) -> Result<Self> {
        let n = item_labels.len();
        for r in &rows {
            if r.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: r.len() });
            }
        }
        Ok(RankingDataset { rows, item_labels })
    }

    /// Dataset with default labels `Item1..Itemn`.
    pub fn from_partial(rows: Vec<PartialRanking>) -> Result<Self> {
        let n = rows.first().map_or(0, |r| r.len());
        Self::new(rows, default_labels(n))
    }

    pub fn from_rankings(rows: Vec<Ranking>) -> Result<Self> {
        Self::from_partial(rows.into_iter().map(PartialRanking::from).collect())
    }

    pub fn rows(&self) -> &[PartialRanking] {
        &self.rows
    }

    pub fn item_labels(&self) -> &[String] {
        &self.item_labels
    }

    pub fn n_items(&self) -> usize {
        self.item_labels.len()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// True when every row is (logically) complete.
    pub fn is_complete(&self) -> bool {
        self.rows.iter().all(|r| r.n_missing() <= 1)
    }

    /// Complete rankings, or the index of the first genuinely partial row.
    pub fn complete_rows(&self) -> Result<Vec<Ranking>> {
        self.rows
            .iter()
            .enumerate()
            .map(|(i, r)| r.to_complete().ok_or(Error::PartialData { row: i }))
            .collect()
    }

    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let rows = indices
            .iter()
            .map(|&i| {
                self.rows
                    .get(i)
                    .cloned()
                    .ok_or_else(|| Error::InvalidArgument(format!("row index {i} out of range")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(RankingDataset { rows, item_labels: self.item_labels.clone() })
    }

    pub fn aggregate(&self) -> Aggregated {
        aggregate_rows(&self.rows)
    }
}

pub(crate) fn default_labels(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("Item{i}")).collect()
}

/// Distinct rows with frequencies; sorting makes the result independent of row order.
pub fn aggregate_rows<T: Ord + Clone>(rows: &[T]) -> Aggregated<T> {
    let mut order: Vec<usize> = (0..rows.len()).collect();
    order.sort_by(|&a, &b| rows[a].cmp(&rows[b]));
    let mut distinct: Vec<T> = Vec::new();
    let mut counts = Vec::new();
    let mut row_index = vec![0; rows.len()];
    for &i in &order {
        if distinct.last() != Some(&rows[i]) {
            distinct.push(rows[i].clone());
            counts.push(0);
        }
        *counts.last_mut().unwrap() += 1;
        row_index[i] = distinct.len() - 1;
    }
    Aggregated { rows: distinct, counts, row_index }
}

/// Swaps between ranking and ordering format, row by row.
///
/// Observed `(item, rank)` pairs are transposed; positions with no
/// corresponding observed entry become missing. The map is an involution.
pub fn convert(rows: &[PartialRanking]) -> Vec<PartialRanking> {
    rows.iter()
        .map(|row| {
            let mut out = vec![None; row.len()];
            for (i, r) in row.0.iter().enumerate() {
                if let Some(r) = *r {
                    out[r - 1] = Some(i + 1);
                }
            }
            PartialRanking(out)
        })
        .collect()
}

/// Censoring scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CensorType {
    /// Keep the `k` best ranks.
    TopK,
    /// Keep a uniformly random subset of `k` entries.
    Mar,
}

/// How many positions each row keeps.
#[derive(Debug, Clone, PartialEq)]
pub enum CensorAmount {
    /// One count per row, each in `1..n`.
    Fixed(Vec<usize>),
    /// Probabilities (unnormalized allowed) of keeping `1, 2, ..., n-1` positions.
    Random(Vec<f64>),
}

/// Censors complete rankings; returns the partial rows and the visible counts.
pub fn censor<R: Rng + ?Sized>(
    rows: &[Ranking],
    kind: CensorType,
    amount: &CensorAmount,
    rng: &mut R,
) -> Result<(Vec<PartialRanking>, Vec<usize>)> {
    let n = rows.first().map_or(0, Ranking::len);
    let cdf = match amount {
        CensorAmount::Fixed(k) => {
            if k.len() != rows.len() {
                return Err(Error::DimensionMismatch { expected: rows.len(), found: k.len() });
            }
            if let Some(&bad) = k.iter().find(|&&k| k == 0 || k >= n) {
                return Err(Error::InvalidArgument(format!(
                    "nranked entry {bad} outside 1..{}",
                    n.saturating_sub(1)
                )));
            }
            None
        }
        CensorAmount::Random(p) => {
            if p.len() + 1 != n {
                return Err(Error::DimensionMismatch { expected: n.saturating_sub(1), found: p.len() });
            }
            if p.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
                return Err(Error::InvalidArgument("probs must be finite and nonnegative".into()));
            }
            let total: f64 = p.iter().sum();
            if !(total > 0.0) {
                return Err(Error::InvalidArgument("probs cannot be normalized".into()));
            }
            let mut acc = 0.0;
            Some(
                p.iter()
                    .map(|&x| {
                        acc += x / total;
                        acc
                    })
                    .collect::<Vec<f64>>(),
            )
        }
    };

    let mut out = Vec::with_capacity(rows.len());
    let mut nranked = Vec::with_capacity(rows.len());
    for (s, row) in rows.iter().enumerate() {
        if row.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: row.len() });
        }
        let k = match (&cdf, amount) {
            (Some(cdf), _) => {
                let u: f64 = rng.random();
                // inverse CDF; a strict jump is required so zero-probability counts never win
                let idx = cdf.iter().position(|&c| u < c).unwrap_or_else(|| {
                    // u beyond a rounded-down final cumulative value
                    let CensorAmount::Random(p) = amount else { unreachable!() };
                    p.iter().rposition(|&x| x > 0.0).unwrap()
                });
                idx + 1
            }
            (None, CensorAmount::Fixed(k)) => k[s],
            _ => unreachable!(),
        };
        let entries = match kind {
            CensorType::TopK => row.0.iter().map(|&r| (r <= k).then_some(r)).collect(),
            CensorType::Mar => {
                let keep = rand::seq::index::sample(rng, n, k);
                let mut entries = vec![None; n];
                for i in keep.iter() {
                    entries[i] = Some(row.0[i]);
                }
                entries
            }
        };
        out.push(PartialRanking(entries));
        nranked.push(k);
    }
    Ok((out, nranked))
}

/// Fills each partial row from the matching reference ranking: unranked items
/// receive the unused ranks in the relative order they have in the reference.
pub fn complete(rows: &[PartialRanking], reference: &[Ranking]) -> Result<Vec<Ranking>> {
    if rows.len() != reference.len() {
        return Err(Error::DimensionMismatch { expected: rows.len(), found: reference.len() });
    }
    rows.iter().zip(reference).map(|(r, rf)| complete_one(r, rf)).collect()
}

pub fn complete_one(row: &PartialRanking, reference: &Ranking) -> Result<Ranking> {
    if row.len() != reference.len() {
        return Err(Error::DimensionMismatch { expected: row.len(), found: reference.len() });
    }
    let mut missing = row.missing_items();
    missing.sort_by_key(|&i| reference.0[i]);
    let free = row.unused_ranks();
    let mut out: Vec<usize> = row.0.iter().map(|x| x.unwrap_or(0)).collect();
    for (&item, &rank) in missing.iter().zip(&free) {
        out[item] = rank;
    }
    Ok(Ranking(out))
}

/// Index permutations of `0..k`, generated by inserting the smallest element
/// at every position of each permutation of the remaining ones.
pub(crate) fn index_permutations(k: usize) -> Vec<Vec<usize>> {
    let mut perms: Vec<Vec<usize>> = vec![vec![]];
    for first in (0..k).rev() {
        let mut next = Vec::with_capacity(perms.len() * (k - first));
        for p in &perms {
            for pos in 0..=p.len() {
                let mut q = Vec::with_capacity(p.len() + 1);
                q.extend_from_slice(&p[..pos]);
                q.push(first);
                q.extend_from_slice(&p[pos..]);
                next.push(q);
            }
        }
        perms = next;
    }
    perms
}

/// All complete rankings compatible with a partial ranking.
pub fn augment(row: &PartialRanking) -> Result<Vec<Ranking>> {
    let missing = row.missing_items();
    if missing.len() > AUGMENT_LIMIT {
        return Err(Error::AugmentationCapacity { row: 0, missing: missing.len(), limit: AUGMENT_LIMIT });
    }
    let free = row.unused_ranks();
    let base: Vec<usize> = row.0.iter().map(|x| x.unwrap_or(0)).collect();
    Ok(index_permutations(missing.len())
        .into_iter()
        .map(|perm| {
            let mut r = base.clone();
            for (&item, &p) in missing.iter().zip(&perm) {
                r[item] = free[p];
            }
            Ranking(r)
        })
        .collect())
}

/// Augments every row; the error names the first row over capacity.
pub fn augment_all(rows: &[PartialRanking]) -> Result<Vec<Vec<Ranking>>> {
    rows.iter()
        .enumerate()
        .map(|(i, r)| {
            augment(r).map_err(|e| match e {
                Error::AugmentationCapacity { missing, limit, .. } => {
                    Error::AugmentationCapacity { row: i, missing, limit }
                }
                other => other,
            })
        })
        .collect()
}
