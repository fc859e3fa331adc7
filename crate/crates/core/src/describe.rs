//! Descriptive summaries of a ranking sample.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ranking::{Ordering, PartialRanking, RankingDataset};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataDescription {
    pub n_obs: usize,
    pub item_labels: Vec<String>,
    /// Entry `k - 1`: rows with exactly `k` ranked items.
    pub n_ranked_distribution: Vec<usize>,
    pub missing_per_item: Vec<usize>,
    /// Mean observed rank; `None` for items never ranked.
    pub mean_ranks: Vec<Option<f64>>,
    /// Items by ascending mean rank, never-ranked items last.
    pub borda_ordering: Ordering,
    /// `[j][i]`: times item `i` was ranked in position `j + 1`.
    pub first_order_marginals: Vec<Vec<usize>>,
    /// `[i][k]`: times item `i` was preferred to item `k`.
    pub pairwise_comparison: Vec<Vec<usize>>,
    /// Some pairwise counts were inferred from top-k rows (a ranked item
    /// precedes every unranked one).
    pub top_k_inference: bool,
}

/// Summarizes the whole sample or the rows listed in `subset`.
///
/// Rows with a single missing entry are treated as complete, the missing
/// rank being forced.
pub fn describe(data: &RankingDataset, subset: Option<&[usize]>) -> Result<DataDescription> {
    let owned;
    let data = match subset {
        Some(idx) => {
            owned = data.subset(idx)?;
            &owned
        }
        None => data,
    };
    if data.is_empty() {
        return Err(Error::EmptyData);
    }
    let n = data.n_items();
    let mut ranked = vec![0; n];
    let mut missing = vec![0; n];
    let mut sums = vec![0.0; n];
    let mut marg = vec![vec![0; n]; n];
    let mut pc = vec![vec![0; n]; n];
    let mut inferred = false;

    for row in data.rows() {
        let row: PartialRanking = row.to_complete().map(PartialRanking::from).unwrap_or_else(|| row.clone());
        let e = row.entries();
        let k = row.n_observed();
        if k > 0 {
            ranked[k - 1] += 1;
        }
        let top_k = row.is_top_k_shaped();
        for i in 0..n {
            match e[i] {
                Some(r) => {
                    sums[i] += r as f64;
                    marg[r - 1][i] += 1;
                }
                None => missing[i] += 1,
            }
            for j in 0..n {
                if i == j {
                    continue;
                }
                match (e[i], e[j]) {
                    (Some(a), Some(b)) if a < b => pc[i][j] += 1,
                    (Some(_), None) if top_k => {
                        pc[i][j] += 1;
                        inferred = true;
                    }
                    _ => {}
                }
            }
        }
    }

    let n_obs = data.len();
    let mean_ranks: Vec<Option<f64>> =
        (0..n).map(|i| (missing[i] < n_obs).then(|| sums[i] / (n_obs - missing[i]) as f64)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| match (mean_ranks[a], mean_ranks[b]) {
        (Some(x), Some(y)) => x.total_cmp(&y).then(a.cmp(&b)),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => a.cmp(&b),
    });
    let borda_ordering = Ordering::new(order.into_iter().map(|i| i + 1).collect())?;

    Ok(DataDescription {
        n_obs,
        item_labels: data.item_labels().to_vec(),
        n_ranked_distribution: ranked,
        missing_per_item: missing,
        mean_ranks,
        borda_ordering,
        first_order_marginals: marg,
        pairwise_comparison: pc,
        top_k_inference: inferred,
    })
}
