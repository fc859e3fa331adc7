//! The Spearman distance between rankings.

use crate::error::{Error, Result};
use crate::numeric::binomial;
use crate::ranking::Ranking;

/// Largest Spearman distance between two rankings of `n` items, `2·C(n+1, 3)`.
pub fn max_distance(n: usize) -> u64 {
    2 * binomial(n as u64 + 1, 3)
}

/// Sum of squared rank differences.
pub fn spear_dist(r: &Ranking, rho: &Ranking) -> Result<u64> {
    if r.len() != rho.len() {
        return Err(Error::DimensionMismatch { expected: rho.len(), found: r.len() });
    }
    Ok(spear_dist_slices(r.ranks(), rho.ranks()))
}

#[inline]
pub(crate) fn spear_dist_slices(a: &[usize], b: &[usize]) -> u64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            let d = x.abs_diff(y) as u64;
            d * d
        })
        .sum()
}

/// Distance scaled by its maximum, in `[0, 1]`.
pub fn relative_spear_dist(r: &Ranking, rho: &Ranking) -> Result<f64> {
    Ok(spear_dist(r, rho)? as f64 / max_distance(r.len()) as f64)
}

/// Symmetric matrix of pairwise distances between rows.
pub fn spear_dist_matrix(rows: &[Ranking]) -> Result<Vec<Vec<u64>>> {
    let n = rows.first().map_or(0, Ranking::len);
    if let Some(bad) = rows.iter().find(|r| r.len() != n) {
        return Err(Error::DimensionMismatch { expected: n, found: bad.len() });
    }
    let m = rows.len();
    let mut out = vec![vec![0u64; m]; m];
    for i in 0..m {
        for j in (i + 1)..m {
            let d = spear_dist_slices(rows[i].ranks(), rows[j].ranks());
            out[i][j] = d;
            out[j][i] = d;
        }
    }
    Ok(out)
}
