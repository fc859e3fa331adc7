//! Confidence intervals: asymptotic intervals for concentrations and
//! weights, and bootstrap intervals with itemwise rank sets for the
//! consensus rankings.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::distribution::var_dist;
use crate::error::{Error, Result};
use crate::mixture::{self, FitOptions, FitResult};
use crate::model::fit_mms;
use crate::numeric::{mix_seed, quantile_type7};
use crate::ranking::{Ranking, RankingDataset};
use crate::sampling::{categorical, default_burn_in, default_thin, sample_component, EXACT_SAMPLING_MAX_N};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CiMethod {
    Asymptotic,
    Nonparametric,
    Parametric,
    Separated,
    Soft,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CIResult {
    pub conf_level: f64,
    pub theta_ci: Vec<(f64, f64)>,
    pub weights_ci: Option<Vec<(f64, f64)>>,
    /// Per component and item, the plausible ranks (ascending).
    pub rho_itemwise: Option<Vec<Vec<Vec<usize>>>>,
    pub method: CiMethod,
}

fn check_level(conf_level: f64) -> Result<()> {
    if conf_level > 0.0 && conf_level < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("conf_level must lie in (0, 1), got {conf_level}")))
    }
}

fn z_quantile(conf_level: f64) -> f64 {
    Normal::standard().inverse_cdf(1.0 - (1.0 - conf_level) / 2.0)
}

/// `θ̂_g ± z / sqrt(N̂_g V_θ̂g[D])`, lower end clamped at 0.
pub fn ci_theta_asymptotic(fit: &FitResult, conf_level: f64) -> Result<CIResult> {
    check_level(conf_level)?;
    let z = z_quantile(conf_level);
    let sizes = fit.component_sizes();
    let theta_ci = fit
        .params
        .theta
        .iter()
        .zip(&sizes)
        .map(|(&t, &ng)| {
            if !(ng > 0.0) {
                return Err(Error::InvalidArgument("component with zero estimated size".into()));
            }
            let half = z / (ng * var_dist(t, fit.n_items)).sqrt();
            Ok(((t - half).max(0.0), t + half))
        })
        .collect::<Result<_>>()?;
    Ok(CIResult { conf_level, theta_ci, weights_ci: None, rho_itemwise: None, method: CiMethod::Asymptotic })
}

/// Standard errors and Wald intervals for the mixture weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightIntervals {
    pub conf_level: f64,
    /// `None` when the empirical information matrix is singular.
    pub se: Option<Vec<f64>>,
    pub ci: Option<Vec<(f64, f64)>>,
    pub singular: bool,
}

/// Weight intervals from the empirical information `Σ_l N_l s_l s_lᵀ` with
/// scores `s_lg = ẑ_lg/ω̂_g − ẑ_lG/ω̂_G`, `g < G`.
pub fn ci_weights_hessian(fit: &FitResult, conf_level: f64) -> Result<WeightIntervals> {
    check_level(conf_level)?;
    let g = fit.params.n_clust();
    if g < 2 {
        return Err(Error::InvalidArgument("weight intervals need at least two components".into()));
    }
    let w = &fit.params.weights;
    let k = g - 1;
    let mut info = vec![vec![0.0; k]; k];
    for (z, &c) in fit.z_hat.iter().zip(&fit.unit_counts) {
        let s: Vec<f64> = (0..k).map(|j| z[j] / w[j] - z[k] / w[k]).collect();
        for a in 0..k {
            for b in 0..k {
                info[a][b] += c * s[a] * s[b];
            }
        }
    }
    let Some(cov) = invert_spd(&info) else {
        return Ok(WeightIntervals { conf_level, se: None, ci: None, singular: true });
    };
    let mut se: Vec<f64> = (0..k).map(|j| cov[j][j].max(0.0).sqrt()).collect();
    let last: f64 = cov.iter().flatten().sum();
    se.push(last.max(0.0).sqrt());
    let z = z_quantile(conf_level);
    let ci = w.iter().zip(&se).map(|(&x, &s)| ((x - z * s).max(0.0), (x + z * s).min(1.0))).collect();
    Ok(WeightIntervals { conf_level, se: Some(se), ci: Some(ci), singular: false })
}

/// Inverse by Gauss–Jordan with partial pivoting; `None` if numerically singular.
fn invert_spd(m: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let k = m.len();
    let scale = (0..k).map(|i| m[i][i].abs()).fold(0.0, f64::max);
    if !(scale > 0.0) {
        return None;
    }
    let mut a: Vec<Vec<f64>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..k).map(|j| if i == j { 1.0 } else { 0.0 }));
            r
        })
        .collect();
    for col in 0..k {
        let piv = (col..k).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))?;
        if a[piv][col].abs() <= 1e-12 * scale {
            return None;
        }
        a.swap(col, piv);
        let p = a[col][col];
        for v in a[col].iter_mut() {
            *v /= p;
        }
        for r in 0..k {
            if r != col {
                let f = a[r][col];
                if f != 0.0 {
                    for c in 0..2 * k {
                        a[r][c] -= f * a[col][c];
                    }
                }
            }
        }
    }
    Some(a.into_iter().map(|r| r[k..].to_vec()).collect())
}

/// Itemwise highest-probability rank sets from bootstrap consensus rankings.
///
/// For each item, ranks are taken by decreasing bootstrap frequency (ties:
/// closer to the point estimate first, then lower rank) until the
/// cumulative frequency reaches `conf_level`. The rank of the point
/// estimate is always included.
pub fn itemwise_hpd(samples: &[Ranking], point: &Ranking, conf_level: f64) -> Result<Vec<Vec<usize>>> {
    check_level(conf_level)?;
    if samples.is_empty() {
        return Err(Error::EmptyData);
    }
    let n = point.len();
    let marg = marginal_counts(samples, n)?;
    let needed = ((conf_level * samples.len() as f64 - 1e-9).ceil() as usize).max(1);
    Ok((0..n)
        .map(|i| {
            let mut ranks: Vec<usize> = (1..=n).collect();
            ranks.sort_by(|&a, &b| {
                marg[b - 1][i]
                    .cmp(&marg[a - 1][i])
                    .then(a.abs_diff(point[i]).cmp(&b.abs_diff(point[i])))
                    .then(a.cmp(&b))
            });
            let mut set = Vec::new();
            let mut acc = 0;
            for r in ranks {
                if acc >= needed {
                    break;
                }
                acc += marg[r - 1][i];
                set.push(r);
            }
            if !set.contains(&point[i]) {
                set.push(point[i]);
            }
            set.sort_unstable();
            set
        })
        .collect())
}

/// `[j][i]`: number of samples ranking item `i` in position `j + 1`.
pub fn marginal_counts(samples: &[Ranking], n: usize) -> Result<Vec<Vec<usize>>> {
    let mut m = vec![vec![0; n]; n];
    for s in samples {
        if s.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: s.len() });
        }
        for (i, &r) in s.ranks().iter().enumerate() {
            m[r - 1][i] += 1;
        }
    }
    Ok(m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BootstrapType {
    /// Resample rows (single component).
    Nonparametric,
    /// Simulate from the fitted model (single component, complete data).
    Parametric,
    /// Resample within the MAP groups.
    Separated,
    /// Resample within groups drawn from the posterior memberships.
    Soft,
}

impl BootstrapType {
    /// Nonparametric for one component, soft otherwise.
    pub fn default_for(n_clust: usize) -> Self {
        if n_clust == 1 {
            BootstrapType::Nonparametric
        } else {
            BootstrapType::Soft
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BootstrapOptions {
    pub n_boot: usize,
    pub kind: BootstrapType,
    pub n_start: usize,
    pub conf_level: f64,
    /// Keep the per-replicate estimates in the result.
    pub all: bool,
    pub parallel: bool,
    pub seed: u64,
    pub mc_em: bool,
    pub kappa: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl BootstrapOptions {
    pub fn new(n_boot: usize, kind: BootstrapType) -> Self {
        BootstrapOptions {
            n_boot,
            kind,
            n_start: 1,
            conf_level: 0.95,
            all: false,
            parallel: false,
            seed: 0,
            mc_em: false,
            kappa: 1.0,
            tol: 1e-6,
            max_iter: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapResult {
    pub n_boot: usize,
    pub n_failed: usize,
    pub kind: BootstrapType,
    /// Replicate × component consensus rankings (when `all` was set).
    pub rho_samples: Option<Vec<Vec<Ranking>>>,
    pub theta_samples: Option<Vec<Vec<f64>>>,
    pub weights_samples: Option<Vec<Vec<f64>>>,
    /// Per component, `[j][i]` counts of item `i` at rank `j + 1` over the
    /// successful replicates.
    pub marginals: Vec<Vec<Vec<usize>>>,
    pub ci: CIResult,
}

struct Replicate {
    rho: Vec<Ranking>,
    theta: Vec<f64>,
    weights: Option<Vec<f64>>,
}

fn resample<R: Rng + ?Sized>(data: &RankingDataset, rows: &[usize], rng: &mut R) -> Result<RankingDataset> {
    let idx: Vec<usize> = (0..rows.len()).map(|_| rows[rng.random_range(0..rows.len())]).collect();
    data.subset(&idx)
}

fn refit_single(data: &RankingDataset, opts: &BootstrapOptions, seed: u64) -> Result<(Ranking, f64)> {
    let fit = if data.is_complete() {
        fit_mms(data)?
    } else {
        let fo = FitOptions {
            n_clust: 1,
            n_start: opts.n_start,
            seed,
            tol: opts.tol,
            max_iter: opts.max_iter,
            mc_em: opts.mc_em,
            kappa: opts.kappa,
            ..FitOptions::default()
        };
        mixture::fit(data, &fo)?
    };
    Ok((fit.params.rho[0].clone(), fit.params.theta[0]))
}

/// Groups of original row indices by component.
fn groups(labels: &[usize], g: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new(); g];
    for (i, &k) in labels.iter().enumerate() {
        out[k].push(i);
    }
    out
}

fn replicate(fit: &FitResult, data: &RankingDataset, opts: &BootstrapOptions, b: usize) -> Result<Replicate> {
    let seed = mix_seed(opts.seed, b as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = fit.params.n_clust();
    let all_rows: Vec<usize> = (0..data.len()).collect();
    match opts.kind {
        BootstrapType::Nonparametric => {
            let (rho, theta) = refit_single(&resample(data, &all_rows, &mut rng)?, opts, seed)?;
            Ok(Replicate { rho: vec![rho], theta: vec![theta], weights: None })
        }
        BootstrapType::Parametric => {
            let n = fit.n_items;
            let mh = (n > EXACT_SAMPLING_MAX_N).then(|| (default_burn_in(n), default_thin(n)));
            let sample = sample_component(data.len(), &fit.params.component(0), mh, &mut rng)?;
            let (rho, theta) = refit_single(&RankingDataset::from_rankings(sample)?, opts, seed)?;
            Ok(Replicate { rho: vec![rho], theta: vec![theta], weights: None })
        }
        BootstrapType::Separated | BootstrapType::Soft => {
            let labels: Vec<usize> = if opts.kind == BootstrapType::Separated {
                fit.map_classification.clone()
            } else {
                (0..data.len()).map(|i| categorical(fit.z_row(i), &mut rng)).collect()
            };
            let groups = groups(&labels, g);
            if let Some(k) = groups.iter().position(Vec::is_empty) {
                return Err(Error::InvalidArgument(format!("component {} has no allocated rows", k + 1)));
            }
            let mut rep = Replicate { rho: Vec::with_capacity(g), theta: Vec::with_capacity(g), weights: None };
            for rows in &groups {
                let (rho, theta) = refit_single(&resample(data, rows, &mut rng)?, opts, seed)?;
                rep.rho.push(rho);
                rep.theta.push(theta);
            }
            if opts.kind == BootstrapType::Soft {
                rep.weights = Some(groups.iter().map(|r| r.len() as f64 / data.len() as f64).collect());
            }
            Ok(align(rep, &fit.params.rho))
        }
    }
}

/// Relabels a replicate so that its components sit closest to `reference`.
fn align(rep: Replicate, reference: &[Ranking]) -> Replicate {
    let perm = mixture::align_labels(&rep.rho, reference);
    Replicate {
        rho: perm.iter().map(|&k| rep.rho[k].clone()).collect(),
        theta: perm.iter().map(|&k| rep.theta[k]).collect(),
        weights: rep.weights.map(|w| perm.iter().map(|&k| w[k]).collect()),
    }
}

/// Bootstrap intervals for a fitted model. Replicates that fail (for
/// instance a component left without rows) are counted and dropped.
pub fn bootstrap(fit: &FitResult, data: &RankingDataset, opts: &BootstrapOptions) -> Result<BootstrapResult> {
    check_level(opts.conf_level)?;
    if opts.n_boot == 0 || opts.n_start == 0 {
        return Err(Error::InvalidArgument("n_boot and n_start must be >= 1".into()));
    }
    if data.len() != fit.n_obs || data.n_items() != fit.n_items {
        return Err(Error::DimensionMismatch { expected: fit.n_obs, found: data.len() });
    }
    let g = fit.params.n_clust();
    match opts.kind {
        BootstrapType::Nonparametric | BootstrapType::Parametric if g > 1 => {
            return Err(Error::InvalidArgument(
                "nonparametric and parametric bootstrap need one component; use separated or soft".into(),
            ));
        }
        BootstrapType::Parametric if !data.is_complete() => {
            return Err(Error::InvalidArgument("parametric bootstrap needs complete rankings".into()));
        }
        BootstrapType::Separated | BootstrapType::Soft if g < 2 => {
            return Err(Error::InvalidArgument("separated and soft bootstrap need at least two components".into()));
        }
        _ => {}
    }
    if opts.kind == BootstrapType::Separated {
        let sizes = groups(&fit.map_classification, g);
        if let Some(k) = sizes.iter().position(Vec::is_empty) {
            return Err(Error::InvalidArgument(format!("component {} has no MAP-allocated rows", k + 1)));
        }
    }

    let run = |b: usize| replicate(fit, data, opts, b);
    let results: Vec<Result<Replicate>> =
        if opts.parallel { (0..opts.n_boot).into_par_iter().map(run).collect() } else { (0..opts.n_boot).map(run).collect() };
    let n_failed = results.iter().filter(|r| r.is_err()).count();
    let reps: Vec<Replicate> = results.into_iter().filter_map(|r| r.ok()).collect();
    if reps.is_empty() {
        return Err(Error::InvalidArgument("every bootstrap replicate failed".into()));
    }

    let alpha = 1.0 - opts.conf_level;
    let interval = |mut v: Vec<f64>| {
        v.sort_by(f64::total_cmp);
        (quantile_type7(&v, alpha / 2.0), quantile_type7(&v, 1.0 - alpha / 2.0))
    };
    let theta_ci = (0..g).map(|k| interval(reps.iter().map(|r| r.theta[k]).collect())).collect();
    let weights_ci = (opts.kind == BootstrapType::Soft)
        .then(|| (0..g).map(|k| interval(reps.iter().map(|r| r.weights.as_ref().unwrap()[k]).collect())).collect());
    let mut itemwise = Vec::with_capacity(g);
    let mut marginals = Vec::with_capacity(g);
    for k in 0..g {
        let samples: Vec<Ranking> = reps.iter().map(|r| r.rho[k].clone()).collect();
        itemwise.push(itemwise_hpd(&samples, &fit.params.rho[k], opts.conf_level)?);
        marginals.push(marginal_counts(&samples, fit.n_items)?);
    }
    let method = match opts.kind {
        BootstrapType::Nonparametric => CiMethod::Nonparametric,
        BootstrapType::Parametric => CiMethod::Parametric,
        BootstrapType::Separated => CiMethod::Separated,
        BootstrapType::Soft => CiMethod::Soft,
    };
    let ci = CIResult { conf_level: opts.conf_level, theta_ci, weights_ci, rho_itemwise: Some(itemwise), method };
    let (rho_samples, theta_samples, weights_samples) = if opts.all {
        (
            Some(reps.iter().map(|r| r.rho.clone()).collect()),
            Some(reps.iter().map(|r| r.theta.clone()).collect()),
            (opts.kind == BootstrapType::Soft).then(|| reps.iter().map(|r| r.weights.clone().unwrap()).collect()),
        )
    } else {
        (None, None, None)
    };
    Ok(BootstrapResult {
        n_boot: opts.n_boot,
        n_failed,
        kind: opts.kind,
        rho_samples,
        theta_samples,
        weights_samples,
        marginals,
        ci,
    })
}
