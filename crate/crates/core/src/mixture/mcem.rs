//! Monte Carlo EM for partial rankings with any missingness pattern.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::model::MmsParams;
use crate::ranking::{complete_one, PartialRanking, Ranking, RankingDataset};
use crate::sampling::{categorical, default_burn_in, default_thin, ExactSampler, MhChain};

use super::{
    assemble, e_step_unchecked, fit_mixture, m_step_full, run_starts, FitMethod, FitOptions, FitResult,
    MixtureParams, StartRun,
};

/// Largest `n` for which completions are simulated by enumeration; MH above.
const MCEM_EXACT_MAX_N: usize = 8;

/// Consecutive stable iterations required to stop.
const STABLE_ITERATIONS: usize = 5;

const THETA_REL_TOL: f64 = 1e-3;

fn random_completion<R: Rng + ?Sized>(row: &PartialRanking, rng: &mut R) -> Ranking {
    let mut free = row.unused_ranks();
    free.shuffle(rng);
    let mut free = free.into_iter();
    let ranks = row.entries().iter().map(|x| x.unwrap_or_else(|| free.next().unwrap())).collect();
    Ranking::new(ranks).expect("completion is a permutation")
}

/// Draws `size` rankings from one component, by enumeration for small `n`
/// and from a single thinned chain otherwise.
fn draw<R: Rng + ?Sized>(size: usize, params: &MmsParams, rng: &mut R) -> Vec<Ranking> {
    let n = params.rho.len();
    if n <= MCEM_EXACT_MAX_N {
        let s = ExactSampler::new(params).expect("small n");
        (0..size).map(|_| s.sample(rng)).collect()
    } else {
        let mut chain = MhChain::new(params).expect("n >= 2");
        for _ in 0..default_burn_in(n) {
            chain.step(rng);
        }
        (0..size)
            .map(|_| {
                for _ in 0..default_thin(n) {
                    chain.step(rng);
                }
                chain.state()
            })
            .collect()
    }
}

fn stable(prev: &MixtureParams, cur: &MixtureParams) -> bool {
    prev.rho == cur.rho
        && prev.theta.iter().zip(&cur.theta).all(|(&a, &b)| {
            let rel = if a == 0.0 { if b == 0.0 { 0.0 } else { f64::INFINITY } } else { (b - a).abs() / a };
            rel < THETA_REL_TOL
        })
}

fn run<R: Rng + ?Sized>(
    rows: &[PartialRanking],
    init: MixtureParams,
    kappa: f64,
    max_iter: usize,
    rng: &mut R,
) -> Result<StartRun> {
    let units = rows.len();
    let ones = vec![1.0; units];
    let latent: Vec<usize> = (0..units).filter(|&s| rows[s].n_missing() > 1).collect();
    let mut completed: Vec<Ranking> = rows
        .iter()
        .map(|r| r.to_complete().unwrap_or_else(|| random_completion(r, rng)))
        .collect();

    let g = init.n_clust();
    let mut params = init;
    let mut run = StartRun {
        params: params.clone(),
        z: Vec::new(),
        trace: Vec::new(),
        conv: false,
        n_iter: 0,
        degenerate: false,
        boundaries: vec![None; g],
        ties: false,
    };
    let mut streak = 0;
    while run.n_iter < max_iter {
        let (z, ll) = e_step_unchecked(&params, &completed, &ones);
        run.trace.push(ll);
        let m = m_step_full(&z, &completed, &ones)?;
        run.n_iter += 1;
        if m.degenerate.iter().any(|&d| d) {
            run.degenerate = true;
            run.params = params;
            run.z = z;
            return Ok(run);
        }
        streak = if stable(&params, &m.params) { streak + 1 } else { 0 };
        params = m.params;
        if streak >= STABLE_ITERATIONS {
            run.conv = true;
            break;
        }
        if run.n_iter == max_iter {
            break;
        }

        // MC-step: component labels, then one simulated ranking per latent unit
        let labels: Vec<usize> = latent.iter().map(|&s| categorical(&z[s], rng)).collect();
        let mut draws: Vec<std::vec::IntoIter<Ranking>> = Vec::with_capacity(g);
        for k in 0..g {
            let size = labels.iter().filter(|&&c| c == k).count();
            let comp = MmsParams { rho: params.rho[k].clone(), theta: kappa * params.theta[k] };
            draws.push(if size == 0 { Vec::new() } else { draw(size, &comp, rng) }.into_iter());
        }
        for (&s, &k) in latent.iter().zip(&labels) {
            let reference = draws[k].next().unwrap();
            completed[s] = complete_one(&rows[s], &reference)?;
        }
    }

    // final E and M on the last completions, then memberships at the reported estimates
    let (z, _) = e_step_unchecked(&params, &completed, &ones);
    let m = m_step_full(&z, &completed, &ones)?;
    if m.degenerate.iter().any(|&d| d) {
        run.degenerate = true;
    } else {
        params = m.params;
        run.boundaries = m.boundaries;
        run.ties = m.ties;
    }
    let (z, ll) = e_step_unchecked(&params, &completed, &ones);
    run.trace.push(ll);
    run.params = params;
    run.z = z;
    Ok(run)
}

/// Monte Carlo EM. Each unit is completed at random, then alternately
/// re-weighted and re-completed from its sampled component, simulated at
/// concentration `κθ_g`. Complete data is passed straight to [`fit_mixture`].
///
/// The reported log-likelihood is that of the final completed sample.
pub fn fit_mixture_mcem(data: &RankingDataset, opts: &FitOptions) -> Result<FitResult> {
    if data.is_empty() {
        return Err(Error::EmptyData);
    }
    let n = data.n_items();
    opts.validate(n)?;
    if data.is_complete() {
        return fit_mixture(data, opts);
    }
    if n < 2 {
        return Err(Error::InvalidArgument("at least two items are required".into()));
    }
    let rows = data.rows();
    let runs = run_starts(opts, n, |init, rng| run(rows, init, opts.kappa, opts.max_iter, rng))?;
    let units = rows.len();
    assemble(runs, opts, FitMethod::Mcem, n, vec![1.0; units], (0..units).collect())
}
