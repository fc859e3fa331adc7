//! EM over the enumerated completions of each partial ranking.

use crate::distance::spear_dist_slices;
use crate::error::{Error, Result};
use crate::numeric::logsumexp;
use crate::ranking::{aggregate_rows, augment, index_permutations, PartialRanking, Ranking, RankingDataset, AUGMENT_LIMIT};

use super::{
    assemble, converged, fit_mixture, m_step_from_stats, run_starts, ComponentStats, FitMethod, FitOptions,
    FitResult, MixtureParams, StartRun,
};

/// Posterior over the completions of one partial ranking.
#[derive(Debug, Clone)]
pub struct AugmentedPosterior {
    /// Compatible complete rankings, in augmentation order.
    pub completions: Vec<Ranking>,
    /// Probability of each completion given the observed entries.
    pub p: Vec<f64>,
    /// Component memberships of each completion.
    pub z: Vec<Vec<f64>>,
    /// `log Σ_{r*} Σ_g ω_g P(r* | ρ_g, θ_g)`.
    pub log_lik: f64,
}

/// Completion probabilities and memberships for a single row, by direct
/// evaluation of every compatible ranking.
pub fn augmented_posterior(params: &MixtureParams, row: &PartialRanking) -> Result<AugmentedPosterior> {
    params.validate()?;
    if row.len() != params.n_items() {
        return Err(Error::DimensionMismatch { expected: params.n_items(), found: row.len() });
    }
    let completions = augment(row)?;
    let log_z = params.log_partitions();
    let g = params.n_clust();
    let joint: Vec<Vec<f64>> = completions
        .iter()
        .map(|c| {
            (0..g)
                .map(|k| {
                    params.weights[k].ln()
                        - params.theta[k] * spear_dist_slices(c.ranks(), params.rho[k].ranks()) as f64
                        - log_z[k]
                })
                .collect()
        })
        .collect();
    let per_completion: Vec<f64> = joint.iter().map(|a| logsumexp(a)).collect();
    let log_lik = logsumexp(&per_completion);
    let p = per_completion.iter().map(|&x| (x - log_lik).exp()).collect();
    let z = joint
        .iter()
        .zip(&per_completion)
        .map(|(a, &s)| a.iter().map(|&x| (x - s).exp()).collect())
        .collect();
    Ok(AugmentedPosterior { completions, p, z, log_lik })
}

/// A distinct partial row prepared for repeated E-steps.
struct Row {
    observed: Vec<(usize, usize)>,
    missing: Vec<usize>,
    free: Vec<usize>,
    count: f64,
}

/// Flattened index permutations of `0..m`, for every `m` in use.
struct PermTables(Vec<Option<Vec<u8>>>);

impl PermTables {
    fn new(rows: &[Row]) -> Self {
        let mut t: Vec<Option<Vec<u8>>> = vec![None; AUGMENT_LIMIT + 1];
        for r in rows {
            let m = r.missing.len();
            if t[m].is_none() {
                t[m] = Some(index_permutations(m).into_iter().flatten().map(|x| x as u8).collect());
            }
        }
        PermTables(t)
    }

    fn get(&self, m: usize) -> &[u8] {
        self.0[m].as_deref().unwrap()
    }
}

struct EStep {
    stats: ComponentStats,
    z: Vec<Vec<f64>>,
    log_lik: f64,
}

fn e_step(params: &MixtureParams, rows: &[Row], perms: &PermTables) -> EStep {
    let g = params.n_clust();
    let n = params.n_items();
    let log_z = params.log_partitions();
    let log_w: Vec<f64> = params.weights.iter().map(|w| w.ln()).collect();
    let mut stats = ComponentStats::zeros(g, n);
    let mut z = Vec::with_capacity(rows.len());
    let mut log_lik = 0.0;
    let mut buf = Vec::new();
    for row in rows {
        let m = row.missing.len();
        let table = perms.get(m);
        let n_comp = if m == 0 { 1 } else { table.len() / m };
        // cost[k][m*i + j]: squared gap of giving missing item i the j-th free rank
        let mut base = vec![0.0; g];
        let mut cost = vec![vec![0u64; m * m]; g];
        for k in 0..g {
            let rho = params.rho[k].ranks();
            let d_obs: u64 = row.observed.iter().map(|&(i, r)| r.abs_diff(rho[i]).pow(2) as u64).sum();
            base[k] = log_w[k] - params.theta[k] * d_obs as f64 - log_z[k];
            for (i, &item) in row.missing.iter().enumerate() {
                for (j, &f) in row.free.iter().enumerate() {
                    cost[k][m * i + j] = f.abs_diff(rho[item]).pow(2) as u64;
                }
            }
        }
        buf.clear();
        buf.resize(n_comp * g, 0.0);
        let mut max = f64::NEG_INFINITY;
        for c in 0..n_comp {
            let perm = &table[c * m..(c + 1) * m];
            for k in 0..g {
                let d: u64 = perm.iter().enumerate().map(|(i, &j)| cost[k][m * i + j as usize]).sum();
                let a = base[k] - params.theta[k] * d as f64;
                buf[c * g + k] = a;
                max = max.max(a);
            }
        }
        let sum: f64 = buf.iter().map(|&a| (a - max).exp()).sum();
        let lse = max + sum.ln();
        log_lik += row.count * lse;

        let mut zrow = vec![0.0; g];
        // expected[k][m*i + j]: posterior mass of missing item i taking free rank j
        let mut expected = vec![vec![0.0; m * m]; g];
        for c in 0..n_comp {
            let perm = &table[c * m..(c + 1) * m];
            for k in 0..g {
                let post = (buf[c * g + k] - lse).exp();
                zrow[k] += post;
                for (i, &j) in perm.iter().enumerate() {
                    expected[k][m * i + j as usize] += post;
                }
            }
        }
        for k in 0..g {
            let w = row.count * zrow[k];
            stats.weight[k] += w;
            let sums = &mut stats.rank_sums[k];
            for &(i, r) in &row.observed {
                sums[i] += w * r as f64;
            }
            for (i, &item) in row.missing.iter().enumerate() {
                let e: f64 = row.free.iter().enumerate().map(|(j, &f)| expected[k][m * i + j] * f as f64).sum();
                sums[item] += row.count * e;
            }
        }
        z.push(zrow);
    }
    EStep { stats, z, log_lik }
}

fn run(rows: &[Row], perms: &PermTables, total: f64, init: MixtureParams, tol: f64, max_iter: usize) -> Result<StartRun> {
    let mut params = init;
    let mut e = e_step(&params, rows, perms);
    let mut run = StartRun {
        params: params.clone(),
        z: Vec::new(),
        trace: vec![e.log_lik],
        conv: false,
        n_iter: 0,
        degenerate: false,
        boundaries: vec![None; params.n_clust()],
        ties: false,
    };
    while run.n_iter < max_iter {
        let m = m_step_from_stats(&e.stats, total)?;
        run.n_iter += 1;
        if m.degenerate.iter().any(|&d| d) {
            run.degenerate = true;
            break;
        }
        params = m.params;
        run.boundaries = m.boundaries;
        run.ties = m.ties;
        e = e_step(&params, rows, perms);
        let prev = *run.trace.last().unwrap();
        run.trace.push(e.log_lik);
        if converged(prev, e.log_lik, tol) {
            run.conv = true;
            break;
        }
    }
    run.params = params;
    run.z = e.z;
    Ok(run)
}

/// Augmentation EM for partial rankings with at most ten missing entries
/// per row. Complete data is passed straight to [`fit_mixture`].
pub fn fit_mixture_partial(data: &RankingDataset, opts: &FitOptions) -> Result<FitResult> {
    if data.is_empty() {
        return Err(Error::EmptyData);
    }
    if data.is_complete() {
        return fit_mixture(data, opts);
    }
    let n = data.n_items();
    opts.validate(n)?;
    if let Some((i, r)) = data.rows().iter().enumerate().find(|(_, r)| r.n_missing() > AUGMENT_LIMIT) {
        return Err(Error::AugmentationCapacity { row: i, missing: r.n_missing(), limit: AUGMENT_LIMIT });
    }
    let agg = aggregate_rows(data.rows());
    let rows: Vec<Row> = agg
        .rows
        .iter()
        .zip(&agg.counts)
        .map(|(r, &c)| Row {
            observed: r.entries().iter().enumerate().filter_map(|(i, x)| x.map(|x| (i, x))).collect(),
            missing: r.missing_items(),
            free: r.unused_ranks(),
            count: c as f64,
        })
        .collect();
    let perms = PermTables::new(&rows);
    let total = data.len() as f64;
    let runs = run_starts(opts, n, |init, _| run(&rows, &perms, total, init, opts.tol, opts.max_iter))?;
    let counts = agg.counts.iter().map(|&c| c as f64).collect();
    assemble(runs, opts, FitMethod::Augmented, n, counts, agg.row_index)
}
