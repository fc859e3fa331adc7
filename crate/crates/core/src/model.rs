//! The single-component Mallows model with Spearman distance: likelihood,
//! the Borda consensus estimate and the concentration estimate.

use serde::{Deserialize, Serialize};

use crate::distance::max_distance;
use crate::distribution::{distance_distribution, uniform_mean, SpearmanDistribution};
use crate::error::{Error, Result};
use crate::mixture::{FitMethod, FitResult, MixtureParams, StartSummary};
use crate::ranking::{Ranking, RankingDataset};

/// Consensus ranking and concentration of one model component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MmsParams {
    pub rho: Ranking,
    pub theta: f64,
}

impl MmsParams {
    pub fn new(rho: Ranking, theta: f64) -> Result<Self> {
        if !(theta >= 0.0) || !theta.is_finite() {
            return Err(Error::InvalidArgument(format!("concentration must be finite and >= 0, got {theta}")));
        }
        Ok(MmsParams { rho, theta })
    }
}

/// `c_n = n(n+1)(2n+1)/6`, the squared norm of any ranking.
pub fn c_n(n: usize) -> f64 {
    let n = n as f64;
    n * (n + 1.0) * (2.0 * n + 1.0) / 6.0
}

/// Upper bound on the concentration estimate, reached when the sample
/// distance is (numerically) zero.
pub fn theta_cap(n: usize) -> f64 {
    (50.0 / n as f64).max(20.0)
}

/// Weighted sufficient statistics of a complete sample.
#[derive(Debug, Clone, PartialEq)]
pub struct SufficientStats {
    pub n_items: usize,
    pub total_weight: f64,
    pub mean_ranks: Vec<f64>,
}

impl SufficientStats {
    pub fn from_rankings(rows: &[Ranking], weights: &[f64]) -> Result<Self> {
        let n = rows.first().map(Ranking::len).ok_or(Error::EmptyData)?;
        let mut sums = vec![0.0; n];
        let mut total = 0.0;
        for (r, &w) in rows.iter().zip(weights) {
            if r.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: r.len() });
            }
            total += w;
            for (s, &x) in sums.iter_mut().zip(r.ranks()) {
                *s += w * x as f64;
            }
        }
        if !(total > 0.0) {
            return Err(Error::EmptyData);
        }
        Ok(SufficientStats { n_items: n, total_weight: total, mean_ranks: sums.into_iter().map(|s| s / total).collect() })
    }

    /// Sample mean distance from `rho`, `2(c_n − ρᵀr̄)`, clamped to the attainable range.
    pub fn mean_distance(&self, rho: &Ranking) -> f64 {
        let dot: f64 = rho.ranks().iter().zip(&self.mean_ranks).map(|(&r, &m)| r as f64 * m).sum();
        (2.0 * (c_n(self.n_items) - dot)).clamp(0.0, max_distance(self.n_items) as f64)
    }
}

/// Ranks the mean-rank vector ascending; ties go to the lower item index.
pub fn borda_mle(mean_ranks: &[f64]) -> Ranking {
    let mut order: Vec<usize> = (0..mean_ranks.len()).collect();
    order.sort_by(|&a, &b| mean_ranks[a].total_cmp(&mean_ranks[b]).then(a.cmp(&b)));
    let mut ranks = vec![0; mean_ranks.len()];
    for (pos, &item) in order.iter().enumerate() {
        ranks[item] = pos + 1;
    }
    Ranking::from_vec_unchecked(ranks)
}

/// True when some mean ranks coincide, so the Borda ranking is not unique.
pub fn borda_has_ties(mean_ranks: &[f64]) -> bool {
    let mut v = mean_ranks.to_vec();
    v.sort_by(f64::total_cmp);
    v.windows(2).any(|w| (w[1] - w[0]).abs() <= 1e-12 * w[1].abs().max(1.0))
}

/// Which side of the admissible range the concentration estimate landed on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThetaBoundary {
    /// Sample distance at or above the uniform mean: estimate is 0.
    Zero,
    /// Sample distance (numerically) zero: estimate is capped.
    Cap,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaEstimate {
    pub theta: f64,
    pub boundary: Option<ThetaBoundary>,
}

/// Solves `E_θ[D] = d_bar` for `θ >= 0`.
pub fn theta_mle(d_bar: f64, n: usize) -> Result<ThetaEstimate> {
    theta_mle_with(&distance_distribution(n), d_bar)
}

pub fn theta_mle_with(dist: &SpearmanDistribution, d_bar: f64) -> Result<ThetaEstimate> {
    let n = dist.n_items;
    let max = max_distance(n) as f64;
    if !(d_bar >= 0.0 && d_bar <= max) {
        return Err(Error::InvalidArgument(format!("mean distance {d_bar} outside [0, {max}]")));
    }
    if d_bar >= uniform_mean(n) {
        return Ok(ThetaEstimate { theta: 0.0, boundary: Some(ThetaBoundary::Zero) });
    }
    let cap = theta_cap(n);
    let f = |theta: f64| dist.expected(theta) - d_bar;
    if d_bar <= 0.0 || f(cap) >= 0.0 {
        return Ok(ThetaEstimate { theta: cap, boundary: Some(ThetaBoundary::Cap) });
    }
    let (mut lo, mut hi) = (0.0, 1.0f64.min(cap));
    while f(hi) > 0.0 {
        lo = hi;
        hi = (2.0 * hi).min(cap);
    }
    let theta = brent(f, lo, hi, 1e-12);
    Ok(ThetaEstimate { theta, boundary: None })
}

/// Brent's method on a sign-changing bracket.
fn brent<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, xtol: f64) -> f64 {
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return a;
    }
    if fb == 0.0 {
        return b;
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..200 {
        if (fb > 0.0) == (fc > 0.0) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return b;
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b);
    }
    b
}

/// Observed-data log-likelihood `−N(log Z(θ) + 2θ(c_n − ρᵀr̄))` of complete rankings.
pub fn loglik_mms(params: &MmsParams, rows: &[Ranking]) -> Result<f64> {
    let stats = SufficientStats::from_rankings(rows, &vec![1.0; rows.len()])?;
    Ok(loglik_from_stats(params, &stats))
}

pub(crate) fn loglik_from_stats(params: &MmsParams, stats: &SufficientStats) -> f64 {
    let log_z = distance_distribution(stats.n_items).log_partition(params.theta);
    let dot: f64 = params.rho.ranks().iter().zip(&stats.mean_ranks).map(|(&r, &m)| r as f64 * m).sum();
    -stats.total_weight * (log_z + 2.0 * params.theta * (c_n(stats.n_items) - dot))
}

/// One-step maximum-likelihood fit of a single model to complete rankings.
pub fn fit_mms(data: &RankingDataset) -> Result<FitResult> {
    if data.is_empty() {
        return Err(Error::EmptyData);
    }
    let rows = data.complete_rows()?;
    let n = data.n_items();
    if n < 2 {
        return Err(Error::InvalidArgument("at least two items are required".into()));
    }
    let agg = crate::ranking::aggregate_rows(&rows);
    let counts: Vec<f64> = agg.counts.iter().map(|&c| c as f64).collect();
    let stats = SufficientStats::from_rankings(&agg.rows, &counts)?;
    let rho = borda_mle(&stats.mean_ranks);
    let est = theta_mle(stats.mean_distance(&rho), n)?;
    let params = MmsParams { rho, theta: est.theta };
    let log_lik = loglik_from_stats(&params, &stats);

    let mut warnings = Vec::new();
    if let Some(b) = est.boundary {
        warnings.push(boundary_warning(0, b, n));
    }
    let ties = borda_has_ties(&stats.mean_ranks);
    let n_obs = rows.len();
    Ok(FitResult {
        params: MixtureParams { rho: vec![params.rho], theta: vec![params.theta], weights: vec![1.0] },
        z_hat: vec![vec![1.0]; agg.rows.len()],
        unit_counts: counts,
        row_index: agg.row_index,
        map_classification: vec![0; n_obs],
        log_lik: vec![log_lik],
        bic: crate::mixture::bic(log_lik, 1, n, n_obs),
        conv: true,
        n_iter: 1,
        method: FitMethod::Full,
        n_items: n,
        n_obs,
        starts: vec![StartSummary { seed: 0, log_lik, n_iter: 1, conv: true, degenerate: false }],
        best_start: 0,
        warnings,
        borda_ties: ties,
    })
}

pub(crate) fn boundary_warning(component: usize, b: ThetaBoundary, n: usize) -> String {
    match b {
        ThetaBoundary::Zero => format!("component {}: mean distance at or above the uniform mean; theta set to 0", component + 1),
        ThetaBoundary::Cap => format!(
            "component {}: zero mean distance; theta capped at {}",
            component + 1,
            theta_cap(n)
        ),
    }
}
