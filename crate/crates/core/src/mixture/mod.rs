//! Finite mixtures of Mallows models with Spearman distance: EM on
//! complete rankings, data-augmentation EM and Monte Carlo EM on partial
//! rankings, multi-start orchestration and BIC.

mod mcem;
mod partial;

pub use mcem::fit_mixture_mcem;
pub use partial::{augmented_posterior, fit_mixture_partial, AugmentedPosterior};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distance::spear_dist_slices;
use crate::distribution::distance_distribution;
use crate::error::{Error, Result};
use crate::model::{borda_has_ties, borda_mle, boundary_warning, MmsParams, ThetaBoundary};
use crate::numeric::logsumexp;
use crate::ranking::{aggregate_rows, Ranking, RankingDataset};
use crate::sampling::{dirichlet, random_theta};

/// Mixture parameters: one `(ρ_g, θ_g, ω_g)` triple per component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureParams {
    pub rho: Vec<Ranking>,
    pub theta: Vec<f64>,
    pub weights: Vec<f64>,
}

impl MixtureParams {
    pub fn new(rho: Vec<Ranking>, theta: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        let p = MixtureParams { rho, theta, weights };
        p.validate()?;
        Ok(p)
    }

    pub fn n_clust(&self) -> usize {
        self.rho.len()
    }

    pub fn n_items(&self) -> usize {
        self.rho.first().map_or(0, Ranking::len)
    }

    pub fn component(&self, g: usize) -> MmsParams {
        MmsParams { rho: self.rho[g].clone(), theta: self.theta[g] }
    }

    pub fn validate(&self) -> Result<()> {
        let g = self.rho.len();
        if g == 0 {
            return Err(Error::InvalidArgument("a mixture needs at least one component".into()));
        }
        for len in [self.theta.len(), self.weights.len()] {
            if len != g {
                return Err(Error::DimensionMismatch { expected: g, found: len });
            }
        }
        let n = self.n_items();
        if let Some(r) = self.rho.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch { expected: n, found: r.len() });
        }
        if self.theta.iter().any(|&t| !(t >= 0.0) || !t.is_finite()) {
            return Err(Error::InvalidArgument("concentrations must be finite and >= 0".into()));
        }
        let s: f64 = self.weights.iter().sum();
        if self.weights.iter().any(|&w| !(w >= 0.0)) || (s - 1.0).abs() > 1e-8 {
            return Err(Error::InvalidArgument("weights must be nonnegative and sum to 1".into()));
        }
        Ok(())
    }

    /// Random starting point: uniform consensus rankings, concentrations on
    /// `(1/n², 3/n^1.5)` and a uniform point of the simplex.
    pub fn random<R: Rng + ?Sized>(n: usize, g: usize, rng: &mut R) -> Self {
        let rho = (0..g).map(|_| Ranking::random(n, rng)).collect();
        let theta = (0..g).map(|_| random_theta(n, rng)).collect();
        let weights = dirichlet(g, 1.0, rng);
        MixtureParams { rho, theta, weights }
    }

    /// Component `g` of the result is component `perm[g]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        MixtureParams {
            rho: perm.iter().map(|&k| self.rho[k].clone()).collect(),
            theta: perm.iter().map(|&k| self.theta[k]).collect(),
            weights: perm.iter().map(|&k| self.weights[k]).collect(),
        }
    }

    pub(crate) fn log_partitions(&self) -> Vec<f64> {
        let dist = distance_distribution(self.n_items());
        self.theta.iter().map(|&t| dist.log_partition(t)).collect()
    }
}

/// Which algorithm produced a fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitMethod {
    /// EM on complete rankings.
    Full,
    /// EM over the enumerated completions of each partial ranking.
    Augmented,
    /// Monte Carlo EM on partial rankings.
    Mcem,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitOptions {
    pub n_clust: usize,
    pub n_start: usize,
    /// Starting points used in place of random ones, start `i` taking `init[i]`.
    pub init: Vec<MixtureParams>,
    pub tol: f64,
    pub max_iter: usize,
    pub parallel: bool,
    pub seed: u64,
    /// Route partial data to Monte Carlo EM instead of augmentation.
    pub mc_em: bool,
    /// Concentration multiplier used when simulating completions in Monte Carlo EM.
    pub kappa: f64,
    /// Overrides the BIC degrees of freedom.
    pub bic_df: Option<usize>,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            n_clust: 1,
            n_start: 10,
            init: Vec::new(),
            tol: 1e-6,
            max_iter: 200,
            parallel: false,
            seed: 0,
            mc_em: false,
            kappa: 1.0,
            bic_df: None,
        }
    }
}

impl FitOptions {
    pub fn new(n_clust: usize) -> Self {
        FitOptions { n_clust, ..Default::default() }
    }

    fn validate(&self, n: usize) -> Result<()> {
        if self.n_clust == 0 {
            return Err(Error::InvalidArgument("n_clust must be >= 1".into()));
        }
        if self.n_start == 0 {
            return Err(Error::InvalidArgument("n_start must be >= 1".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidArgument("tol must be positive".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidArgument("max_iter must be >= 1".into()));
        }
        if !(self.kappa > 0.0) || !self.kappa.is_finite() {
            return Err(Error::InvalidArgument(format!("kappa must be positive, got {}", self.kappa)));
        }
        if self.init.len() > self.n_start {
            return Err(Error::InvalidArgument("more initial values than starts".into()));
        }
        for p in &self.init {
            p.validate()?;
            if p.n_clust() != self.n_clust {
                return Err(Error::DimensionMismatch { expected: self.n_clust, found: p.n_clust() });
            }
            if p.n_items() != n {
                return Err(Error::DimensionMismatch { expected: n, found: p.n_items() });
            }
        }
        Ok(())
    }
}

/// Per-start diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartSummary {
    pub seed: u64,
    pub log_lik: f64,
    pub n_iter: usize,
    pub conv: bool,
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub params: MixtureParams,
    /// Posterior memberships, one row per fitting unit (distinct row, or
    /// observed row for Monte Carlo EM).
    pub z_hat: Vec<Vec<f64>>,
    /// Frequency of each `z_hat` row.
    pub unit_counts: Vec<f64>,
    /// For each original row, its `z_hat` row.
    pub row_index: Vec<usize>,
    /// 0-based MAP component of each original row.
    pub map_classification: Vec<usize>,
    /// Monitored log-likelihood after every iteration of the best start.
    pub log_lik: Vec<f64>,
    pub bic: f64,
    pub conv: bool,
    pub n_iter: usize,
    pub method: FitMethod,
    pub n_items: usize,
    pub n_obs: usize,
    pub starts: Vec<StartSummary>,
    pub best_start: usize,
    pub warnings: Vec<String>,
    /// Some consensus estimate had tied mean ranks.
    pub borda_ties: bool,
}

impl FitResult {
    pub fn final_log_lik(&self) -> f64 {
        *self.log_lik.last().expect("nonempty trace")
    }

    /// `N̂_g = Σ_l N_l ẑ_lg`.
    pub fn component_sizes(&self) -> Vec<f64> {
        let g = self.params.n_clust();
        let mut out = vec![0.0; g];
        for (z, &c) in self.z_hat.iter().zip(&self.unit_counts) {
            for k in 0..g {
                out[k] += c * z[k];
            }
        }
        out
    }

    /// Membership row of original observation `i`.
    pub fn z_row(&self, i: usize) -> &[f64] {
        &self.z_hat[self.row_index[i]]
    }
}

/// Index of the largest entry; ties go to the lowest index.
pub fn argmax(z: &[f64]) -> usize {
    let mut best = 0;
    for (k, &v) in z.iter().enumerate() {
        if v > z[best] {
            best = k;
        }
    }
    best
}

/// Degrees of freedom used by [`bic`]: `G − 1` weights, `G` concentrations
/// and `n` per consensus ranking, i.e. `G(n+2) − 1`.
pub fn bic_df(n_clust: usize, n_items: usize) -> usize {
    n_clust * (n_items + 2) - 1
}

/// `−2ℓ + df log N` with `df` from [`bic_df`].
pub fn bic(log_lik: f64, n_clust: usize, n_items: usize, n_obs: usize) -> f64 {
    bic_with_df(log_lik, bic_df(n_clust, n_items), n_obs)
}

pub fn bic_with_df(log_lik: f64, df: usize, n_obs: usize) -> f64 {
    -2.0 * log_lik + df as f64 * (n_obs as f64).ln()
}

/// Weighted rank sums per component, the sufficient statistics of the M-step.
#[derive(Debug, Clone)]
pub(crate) struct ComponentStats {
    pub weight: Vec<f64>,
    pub rank_sums: Vec<Vec<f64>>,
}

impl ComponentStats {
    pub fn zeros(g: usize, n: usize) -> Self {
        ComponentStats { weight: vec![0.0; g], rank_sums: vec![vec![0.0; n]; g] }
    }
}

/// Output of an M-step.
#[derive(Debug, Clone)]
pub struct MStep {
    pub params: MixtureParams,
    /// Components whose estimated size fell below `1e-10 N`.
    pub degenerate: Vec<bool>,
    pub boundaries: Vec<Option<ThetaBoundary>>,
    pub ties: bool,
}

pub(crate) fn m_step_from_stats(stats: &ComponentStats, total: f64) -> Result<MStep> {
    let g = stats.weight.len();
    let n = stats.rank_sums[0].len();
    let dist = distance_distribution(n);
    let c_n = crate::model::c_n(n);
    let max_d = crate::distance::max_distance(n) as f64;
    let mut out = MStep {
        params: MixtureParams { rho: Vec::with_capacity(g), theta: Vec::with_capacity(g), weights: Vec::with_capacity(g) },
        degenerate: vec![false; g],
        boundaries: vec![None; g],
        ties: false,
    };
    for k in 0..g {
        let w = stats.weight[k];
        out.params.weights.push(w / total);
        if !(w >= 1e-10 * total) {
            out.degenerate[k] = true;
            out.params.rho.push(Ranking::identity(n));
            out.params.theta.push(0.0);
            continue;
        }
        let mean: Vec<f64> = stats.rank_sums[k].iter().map(|s| s / w).collect();
        let rho = borda_mle(&mean);
        out.ties |= borda_has_ties(&mean);
        let dot: f64 = rho.ranks().iter().zip(&mean).map(|(&r, &m)| r as f64 * m).sum();
        let d_bar = (2.0 * (c_n - dot)).clamp(0.0, max_d);
        let est = crate::model::theta_mle_with(&dist, d_bar)?;
        out.boundaries[k] = est.boundary;
        out.params.rho.push(rho);
        out.params.theta.push(est.theta);
    }
    Ok(out)
}

/// Log of `ω_g P(r | ρ_g, θ_g)` for every component.
pub(crate) fn log_joint_into(params: &MixtureParams, log_z: &[f64], r: &[usize], out: &mut [f64]) {
    for k in 0..params.n_clust() {
        let d = spear_dist_slices(r, params.rho[k].ranks()) as f64;
        out[k] = params.weights[k].ln() - params.theta[k] * d - log_z[k];
    }
}

/// Posterior memberships of complete distinct rows and the observed-data
/// log-likelihood `Σ_l N_l log Σ_g ω_g P(r_l | ρ_g, θ_g)`.
pub fn e_step_full(params: &MixtureParams, rows: &[Ranking], counts: &[f64]) -> Result<(Vec<Vec<f64>>, f64)> {
    params.validate()?;
    let n = params.n_items();
    if let Some(r) = rows.iter().find(|r| r.len() != n) {
        return Err(Error::DimensionMismatch { expected: n, found: r.len() });
    }
    if counts.len() != rows.len() {
        return Err(Error::DimensionMismatch { expected: rows.len(), found: counts.len() });
    }
    Ok(e_step_unchecked(params, rows, counts))
}

pub(crate) fn e_step_unchecked(params: &MixtureParams, rows: &[Ranking], counts: &[f64]) -> (Vec<Vec<f64>>, f64) {
    let g = params.n_clust();
    let log_z = params.log_partitions();
    let mut ll = 0.0;
    let mut buf = vec![0.0; g];
    let z = rows
        .iter()
        .zip(counts)
        .map(|(r, &c)| {
            log_joint_into(params, &log_z, r.ranks(), &mut buf);
            let lse = logsumexp(&buf);
            ll += c * lse;
            buf.iter().map(|&x| (x - lse).exp()).collect()
        })
        .collect();
    (z, ll)
}

/// M-step on complete distinct rows with memberships `z`.
pub fn m_step_full(z: &[Vec<f64>], rows: &[Ranking], counts: &[f64]) -> Result<MStep> {
    let n = rows.first().map(Ranking::len).ok_or(Error::EmptyData)?;
    let g = z.first().map(Vec::len).ok_or(Error::EmptyData)?;
    if z.len() != rows.len() || counts.len() != rows.len() {
        return Err(Error::DimensionMismatch { expected: rows.len(), found: z.len().min(counts.len()) });
    }
    let mut stats = ComponentStats::zeros(g, n);
    for ((zr, r), &c) in z.iter().zip(rows).zip(counts) {
        for k in 0..g {
            let w = c * zr[k];
            stats.weight[k] += w;
            for (s, &x) in stats.rank_sums[k].iter_mut().zip(r.ranks()) {
                *s += w * x as f64;
            }
        }
    }
    m_step_from_stats(&stats, counts.iter().sum())
}

/// `|Δℓ| / (|ℓ| + 1) < tol`.
pub(crate) fn converged(prev: f64, cur: f64, tol: f64) -> bool {
    (cur - prev).abs() / (cur.abs() + 1.0) < tol
}

/// Outcome of one start, before the best one is chosen.
#[derive(Debug, Clone)]
pub(crate) struct StartRun {
    pub params: MixtureParams,
    pub z: Vec<Vec<f64>>,
    pub trace: Vec<f64>,
    pub conv: bool,
    pub n_iter: usize,
    pub degenerate: bool,
    pub boundaries: Vec<Option<ThetaBoundary>>,
    pub ties: bool,
}

/// EM on complete distinct rows from one starting point.
pub(crate) fn run_full(
    rows: &[Ranking],
    counts: &[f64],
    init: MixtureParams,
    tol: f64,
    max_iter: usize,
) -> Result<StartRun> {
    let mut params = init;
    let (mut z, ll) = e_step_unchecked(&params, rows, counts);
    let mut run = StartRun {
        params: params.clone(),
        z: Vec::new(),
        trace: vec![ll],
        conv: false,
        n_iter: 0,
        degenerate: false,
        boundaries: vec![None; params.n_clust()],
        ties: false,
    };
    while run.n_iter < max_iter {
        let m = m_step_full(&z, rows, counts)?;
        run.n_iter += 1;
        if m.degenerate.iter().any(|&d| d) {
            run.degenerate = true;
            break;
        }
        params = m.params;
        run.boundaries = m.boundaries;
        run.ties = m.ties;
        let (z_new, ll) = e_step_unchecked(&params, rows, counts);
        z = z_new;
        let prev = *run.trace.last().unwrap();
        run.trace.push(ll);
        if converged(prev, ll, tol) {
            run.conv = true;
            break;
        }
    }
    run.params = params;
    run.z = z;
    Ok(run)
}

pub(crate) fn start_seed(seed: u64, start: usize) -> u64 {
    seed ^ start as u64
}

/// Runs every start (optionally in parallel) and returns them in start order.
pub(crate) fn run_starts<F>(opts: &FitOptions, n: usize, run: F) -> Result<Vec<StartRun>>
where
    F: Fn(MixtureParams, &mut ChaCha8Rng) -> Result<StartRun> + Sync,
{
    let one = |i: usize| {
        let mut rng = ChaCha8Rng::seed_from_u64(start_seed(opts.seed, i));
        let init = match opts.init.get(i) {
            Some(p) => p.clone(),
            None => MixtureParams::random(n, opts.n_clust, &mut rng),
        };
        run(init, &mut rng)
    };
    if opts.parallel {
        (0..opts.n_start).into_par_iter().map(one).collect()
    } else {
        (0..opts.n_start).map(one).collect()
    }
}

/// Index of the non-degenerate start with the highest final log-likelihood.
pub(crate) fn best_start(runs: &[StartRun]) -> Result<usize> {
    let mut best: Option<usize> = None;
    for (i, r) in runs.iter().enumerate() {
        if r.degenerate {
            continue;
        }
        let ll = *r.trace.last().unwrap();
        if best.is_none_or(|b| ll > *runs[b].trace.last().unwrap()) {
            best = Some(i);
        }
    }
    best.ok_or(Error::AllStartsDegenerate)
}

/// Assembles a [`FitResult`] from the chosen start.
#[allow(clippy::too_many_arguments)]
pub(crate) fn assemble(
    runs: Vec<StartRun>,
    opts: &FitOptions,
    method: FitMethod,
    n: usize,
    unit_counts: Vec<f64>,
    row_index: Vec<usize>,
) -> Result<FitResult> {
    let best = best_start(&runs)?;
    let starts = runs
        .iter()
        .enumerate()
        .map(|(i, r)| StartSummary {
            seed: start_seed(opts.seed, i),
            log_lik: *r.trace.last().unwrap(),
            n_iter: r.n_iter,
            conv: r.conv,
            degenerate: r.degenerate,
        })
        .collect();
    let run = runs.into_iter().nth(best).unwrap();
    let n_obs = row_index.len();
    let map_classification = row_index.iter().map(|&l| argmax(&run.z[l])).collect();
    let mut warnings: Vec<String> = run
        .boundaries
        .iter()
        .enumerate()
        .filter_map(|(k, b)| b.map(|b| boundary_warning(k, b, n)))
        .collect();
    if !run.conv {
        warnings.push(format!("best start did not converge within {} iterations", opts.max_iter));
    }
    let ll = *run.trace.last().unwrap();
    let df = opts.bic_df.unwrap_or_else(|| bic_df(opts.n_clust, n));
    Ok(FitResult {
        params: run.params,
        z_hat: run.z,
        unit_counts,
        row_index,
        map_classification,
        log_lik: run.trace,
        bic: bic_with_df(ll, df, n_obs),
        conv: run.conv,
        n_iter: run.n_iter,
        method,
        n_items: n,
        n_obs,
        starts,
        best_start: best,
        warnings,
        borda_ties: run.ties,
    })
}

/// EM for a mixture fitted to complete rankings.
///
/// With one component and no user-supplied start this is the one-step
/// estimator of [`crate::model::fit_mms`].
pub fn fit_mixture(data: &RankingDataset, opts: &FitOptions) -> Result<FitResult> {
    if data.is_empty() {
        return Err(Error::EmptyData);
    }
    let n = data.n_items();
    opts.validate(n)?;
    let rows = data.complete_rows()?;
    if opts.n_clust == 1 && opts.init.is_empty() {
        let mut fit = crate::model::fit_mms(data)?;
        fit.starts[0].seed = start_seed(opts.seed, 0);
        if let Some(df) = opts.bic_df {
            fit.bic = bic_with_df(fit.final_log_lik(), df, fit.n_obs);
        }
        return Ok(fit);
    }
    let agg = aggregate_rows(&rows);
    let counts: Vec<f64> = agg.counts.iter().map(|&c| c as f64).collect();
    let runs = run_starts(opts, n, |init, _| run_full(&agg.rows, &counts, init, opts.tol, opts.max_iter))?;
    assemble(runs, opts, FitMethod::Full, n, counts, agg.row_index)
}

/// Fits complete data with [`fit_mixture`] and partial data with
/// augmentation EM, or Monte Carlo EM when `opts.mc_em` is set.
pub fn fit(data: &RankingDataset, opts: &FitOptions) -> Result<FitResult> {
    if data.is_complete() {
        fit_mixture(data, opts)
    } else if opts.mc_em {
        fit_mixture_mcem(data, opts)
    } else {
        fit_mixture_partial(data, opts)
    }
}

/// Relabeling `perm` (component `g` of the aligned fit is `perm[g]` of
/// `rho`) minimizing `Σ_g d(rho[perm[g]], reference[g])`, by exhaustive
/// search; ties keep the lexicographically first permutation.
pub fn align_labels(rho: &[Ranking], reference: &[Ranking]) -> Vec<usize> {
    let g = reference.len();
    let cost: Vec<Vec<u64>> = reference
        .iter()
        .map(|r| rho.iter().map(|x| spear_dist_slices(x.ranks(), r.ranks())).collect())
        .collect();
    let mut best = (u64::MAX, (0..g).collect::<Vec<_>>());
    let mut perm: Vec<usize> = (0..g).collect();
    loop {
        let c: u64 = (0..g).map(|k| cost[k][perm[k]]).sum();
        if c < best.0 {
            best = (c, perm.clone());
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    best.1
}

fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else {
        return false;
    };
    let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).unwrap();
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distribution::log_density;

    fn rk(v: &[usize]) -> Ranking {
        Ranking::new(v.to_vec()).unwrap()
    }

    #[test]
    fn e_step_single_component_is_certain() {
        let p = MixtureParams::new(vec![rk(&[1, 2, 3])], vec![0.3], vec![1.0]).unwrap();
        let rows = vec![rk(&[3, 1, 2]), rk(&[1, 2, 3])];
        let (z, _) = e_step_full(&p, &rows, &[1.0, 2.0]).unwrap();
        assert!(z.iter().all(|r| (r[0] - 1.0).abs() < 1e-15));
    }

    #[test]
    fn e_step_symmetric_case() {
        let p = MixtureParams::new(vec![rk(&[1, 2, 3]), rk(&[3, 2, 1])], vec![0.4, 0.4], vec![0.5, 0.5]).unwrap();
        let (z, _) = e_step_full(&p, &[rk(&[2, 1, 3])], &[1.0]).unwrap();
        // d = 2 to the identity, 6 to the reversal: not equidistant
        assert!(z[0][0] > 0.5);
        let p = MixtureParams::new(vec![rk(&[1, 2, 3, 4]), rk(&[4, 3, 2, 1])], vec![0.4, 0.4], vec![0.5, 0.5]).unwrap();
        // d = 12 to both
        let (z, _) = e_step_full(&p, &[rk(&[3, 1, 4, 2])], &[1.0]).unwrap();
        assert!((z[0][0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn e_step_matches_bayes_ratio() {
        let p = MixtureParams::new(vec![rk(&[1, 2, 3]), rk(&[2, 3, 1])], vec![0.2, 0.9], vec![0.3, 0.7]).unwrap();
        let r = rk(&[1, 3, 2]);
        let a = 0.3 * log_density(&r, &p.rho[0], 0.2).unwrap().exp();
        let b = 0.7 * log_density(&r, &p.rho[1], 0.9).unwrap().exp();
        let (z, ll) = e_step_full(&p, std::slice::from_ref(&r), &[3.0]).unwrap();
        assert!((z[0][0] - a / (a + b)).abs() < 1e-14);
        assert!((ll - 3.0 * (a + b).ln()).abs() < 1e-12);
    }

    #[test]
    fn m_step_with_hard_memberships_splits_into_single_fits() {
        let rows = vec![rk(&[1, 2, 3, 4]), rk(&[2, 1, 3, 4]), rk(&[4, 3, 2, 1]), rk(&[4, 3, 1, 2])];
        let counts = [1.0, 2.0, 3.0, 1.0];
        let z = vec![vec![1.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0, 1.0]];
        let m = m_step_full(&z, &rows, &counts).unwrap();
        let a = crate::model::fit_mms(
            &RankingDataset::from_rankings(vec![rows[0].clone(), rows[1].clone(), rows[1].clone()]).unwrap(),
        )
        .unwrap();
        assert_eq!(m.params.rho[0], a.params.rho[0]);
        assert!((m.params.theta[0] - a.params.theta[0]).abs() < 1e-12);
        assert!((m.params.weights[0] - 3.0 / 7.0).abs() < 1e-15);
    }

    #[test]
    fn m_step_weighted_mean_ranks_by_hand() {
        let rows = vec![rk(&[1, 2, 3]), rk(&[3, 1, 2])];
        let z = vec![vec![0.25, 0.75], vec![0.5, 0.5]];
        let m = m_step_full(&z, &rows, &[2.0, 1.0]).unwrap();
        // component 1: weights 0.5 and 0.5 → mean (2, 1.5, 2.5) → ρ (2,1,3)
        assert_eq!(m.params.rho[0], rk(&[2, 1, 3]));
        // component 2: weights 1.5 and 0.5 → mean (1.5, 1.75, 2.75) → ρ (1,2,3)
        assert_eq!(m.params.rho[1], rk(&[1, 2, 3]));
        assert!((m.params.weights[0] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn empty_component_is_degenerate() {
        let rows = vec![rk(&[1, 2, 3])];
        let m = m_step_full(&[vec![1.0, 0.0]], &rows, &[5.0]).unwrap();
        assert_eq!(m.degenerate, vec![false, true]);
    }

    #[test]
    fn bic_convention() {
        assert_eq!(bic_df(1, 7), 8);
        assert_eq!(bic_df(3, 7), 26);
        assert!((bic(-100.0, 1, 7, 50) - (200.0 + 8.0 * 50f64.ln())).abs() < 1e-12);
        assert!(bic(-100.0, 1, 7, 60) > bic(-100.0, 1, 7, 50));
    }

    #[test]
    fn argmax_ties_take_lowest() {
        assert_eq!(argmax(&[0.5, 0.5]), 0);
        assert_eq!(argmax(&[0.2, 0.4, 0.4]), 1);
    }

    #[test]
    fn label_alignment_recovers_permutation() {
        let reference = vec![rk(&[1, 2, 3, 4]), rk(&[4, 3, 2, 1]), rk(&[2, 1, 4, 3])];
        let shuffled = vec![reference[2].clone(), reference[0].clone(), reference[1].clone()];
        let perm = align_labels(&shuffled, &reference);
        assert_eq!(perm, vec![1, 2, 0]);
        for (g, &k) in perm.iter().enumerate() {
            assert_eq!(shuffled[k], reference[g]);
        }
    }

    #[test]
    fn options_are_validated() {
        let data = RankingDataset::from_rankings(vec![rk(&[1, 2, 3]), rk(&[2, 1, 3])]).unwrap();
        assert!(fit_mixture(&data, &FitOptions::new(0)).is_err());
        let mut o = FitOptions::new(2);
        o.init = vec![MixtureParams::new(vec![rk(&[1, 2, 3])], vec![0.1], vec![1.0]).unwrap()];
        assert!(fit_mixture(&data, &o).is_err());
        let mut o = FitOptions::new(1);
        o.kappa = 0.0;
        assert!(fit_mixture(&data, &o).is_err());
    }
}
