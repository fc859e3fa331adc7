//! Random generation from the Mallows model with Spearman distance and
//! from its finite mixtures.

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::distance::{max_distance, spear_dist_slices};
use crate::error::{Error, Result};
use crate::model::MmsParams;
use crate::ranking::Ranking;

/// Largest `n` for which sampling by full enumeration is offered.
pub const EXACT_SAMPLING_MAX_N: usize = 10;

/// Attempt budget for drawing well-separated consensus rankings.
pub const SEPARATION_BUDGET: usize = 100_000;

/// Categorical sampler over all `n!` rankings, built once and reused.
#[derive(Debug, Clone)]
pub struct ExactSampler {
    n: usize,
    perms: Vec<u8>,
    cumulative: Vec<f64>,
}

impl ExactSampler {
    pub fn new(params: &MmsParams) -> Result<Self> {
        let n = params.rho.len();
        if n > EXACT_SAMPLING_MAX_N {
            return Err(Error::ExactSamplingLimit { n, limit: EXACT_SAMPLING_MAX_N });
        }
        if n == 0 {
            return Err(Error::InvalidArgument("empty consensus ranking".into()));
        }
        let perms = all_permutations(n);
        let rho = params.rho.ranks();
        let mut cumulative = Vec::with_capacity(perms.len() / n);
        let mut acc = 0.0;
        for p in perms.chunks_exact(n) {
            let d: usize = p.iter().zip(rho).map(|(&a, &b)| (a as usize).abs_diff(b).pow(2)).sum();
            // unnormalized; d = 0 has weight 1 so the sum never underflows
            acc += (-params.theta * d as f64).exp();
            cumulative.push(acc);
        }
        Ok(ExactSampler { n, perms, cumulative })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Ranking {
        let total = *self.cumulative.last().unwrap();
        let u = rng.random::<f64>() * total;
        let k = self.cumulative.partition_point(|&c| c <= u).min(self.cumulative.len() - 1);
        let p = &self.perms[k * self.n..(k + 1) * self.n];
        Ranking::from_vec_unchecked(p.iter().map(|&x| x as usize).collect())
    }
}

/// All permutations of `1..=n`, flattened.
fn all_permutations(n: usize) -> Vec<u8> {
    let mut perm: Vec<u8> = (1..=n as u8).collect();
    let mut out = perm.clone();
    let mut c = vec![0usize; n];
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            out.extend_from_slice(&perm);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    out
}

/// `N` independent draws by enumeration of the ranking space (`n <= 10`).
pub fn sample_mms_exact<R: Rng + ?Sized>(size: usize, params: &MmsParams, rng: &mut R) -> Result<Vec<Ranking>> {
    let sampler = ExactSampler::new(params)?;
    Ok((0..size).map(|_| sampler.sample(rng)).collect())
}

/// Random-swap Metropolis–Hastings chain targeting a single model.
#[derive(Debug, Clone)]
pub struct MhChain {
    state: Vec<usize>,
    rho: Vec<usize>,
    theta: f64,
}

impl MhChain {
    /// Starts at the consensus ranking.
    pub fn new(params: &MmsParams) -> Result<Self> {
        if params.rho.len() < 2 {
            return Err(Error::InvalidArgument("Metropolis-Hastings sampling needs n >= 2".into()));
        }
        Ok(MhChain { state: params.rho.ranks().to_vec(), rho: params.rho.ranks().to_vec(), theta: params.theta })
    }

    /// One proposal: swap the ranks at two distinct positions.
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> bool {
        let n = self.state.len();
        let a = rng.random_range(0..n);
        let mut b = rng.random_range(0..n - 1);
        if b >= a {
            b += 1;
        }
        let (ra, rb) = (self.state[a] as i64, self.state[b] as i64);
        let (pa, pb) = (self.rho[a] as i64, self.rho[b] as i64);
        // (rb-pa)² + (ra-pb)² − (ra-pa)² − (rb-pb)²
        let delta = 2 * (ra - rb) * (pa - pb);
        let accept = delta <= 0 || rng.random::<f64>() < (-self.theta * delta as f64).exp();
        if accept {
            self.state.swap(a, b);
        }
        accept
    }

    pub fn state(&self) -> Ranking {
        Ranking::from_vec_unchecked(self.state.clone())
    }

    pub fn distance(&self) -> u64 {
        spear_dist_slices(&self.state, &self.rho)
    }
}

/// Default burn-in: `100 n` swaps.
pub fn default_burn_in(n: usize) -> usize {
    100 * n
}

/// Default thinning: `n` swaps.
pub fn default_thin(n: usize) -> usize {
    n
}

/// `N` draws from one chain: `burn_in` swaps, then every `thin`-th state.
pub fn sample_mms_mh<R: Rng + ?Sized>(
    size: usize,
    params: &MmsParams,
    burn_in: usize,
    thin: usize,
    rng: &mut R,
) -> Result<Vec<Ranking>> {
    if burn_in == 0 || thin == 0 {
        return Err(Error::InvalidArgument("burn_in and thin must be positive".into()));
    }
    let mut chain = MhChain::new(params)?;
    for _ in 0..burn_in {
        chain.step(rng);
    }
    let mut out = Vec::with_capacity(size);
    for _ in 0..size {
        for _ in 0..thin {
            chain.step(rng);
        }
        out.push(chain.state());
    }
    Ok(out)
}

/// Draws one model component's sample of `size` rankings, by enumeration or MH.
pub(crate) fn sample_component<R: Rng + ?Sized>(
    size: usize,
    params: &MmsParams,
    mh: Option<(usize, usize)>,
    rng: &mut R,
) -> Result<Vec<Ranking>> {
    match mh {
        None => sample_mms_exact(size, params, rng),
        Some((burn_in, thin)) => sample_mms_mh(size, params, burn_in, thin, rng),
    }
}

/// Settings for [`rmsmix`]; parameters left `None` are generated.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RmsmixOptions {
    pub sample_size: usize,
    pub n_items: usize,
    pub n_clust: usize,
    pub rho: Option<Vec<Ranking>>,
    pub theta: Option<Vec<f64>>,
    pub weights: Option<Vec<f64>>,
    /// Uniform consensus rankings and weights instead of the separated scheme.
    pub uniform: bool,
    pub mh: bool,
    pub burn_in: Option<usize>,
    pub thin: Option<usize>,
}

impl RmsmixOptions {
    pub fn new(sample_size: usize, n_items: usize, n_clust: usize) -> Self {
        RmsmixOptions {
            sample_size,
            n_items,
            n_clust,
            rho: None,
            theta: None,
            weights: None,
            uniform: false,
            mh: n_items > EXACT_SAMPLING_MAX_N,
            burn_in: None,
            thin: None,
        }
    }
}

/// A simulated mixture sample together with the parameters that produced it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampleResult {
    pub samples: Vec<Ranking>,
    pub rho: Vec<Ranking>,
    pub theta: Vec<f64>,
    pub weights: Vec<f64>,
    /// 0-based component of each sample.
    pub classification: Vec<usize>,
}

/// Concentrations uniform on `(1/n², 3/n^1.5)`.
pub(crate) fn random_theta<R: Rng + ?Sized>(n: usize, rng: &mut R) -> f64 {
    let n = n as f64;
    let (lo, hi) = (1.0 / (n * n), 3.0 / n.powf(1.5));
    lo + (hi - lo) * rng.random::<f64>()
}

/// Symmetric Dirichlet draw via normalized gamma variates.
pub fn dirichlet<R: Rng + ?Sized>(k: usize, alpha: f64, rng: &mut R) -> Vec<f64> {
    let gamma = Gamma::new(alpha, 1.0).expect("positive Dirichlet parameter");
    loop {
        let g: Vec<f64> = (0..k).map(|_| gamma.sample(rng)).collect();
        let s: f64 = g.iter().sum();
        if s > 0.0 {
            return g.into_iter().map(|x| x / s).collect();
        }
    }
}

/// Consensus rankings with all pairwise distances at least `(2/G) C(n+1,3)`.
pub fn separated_consensus<R: Rng + ?Sized>(n: usize, g: usize, rng: &mut R) -> Result<Vec<Ranking>> {
    let threshold = max_distance(n) as f64 / g as f64;
    for _ in 0..SEPARATION_BUDGET {
        let rho: Vec<Ranking> = (0..g).map(|_| Ranking::random(n, rng)).collect();
        let ok = (0..g).all(|a| {
            (a + 1..g).all(|b| spear_dist_slices(rho[a].ranks(), rho[b].ranks()) as f64 >= threshold)
        });
        if ok {
            return Ok(rho);
        }
    }
    Err(Error::SeparationBudget(SEPARATION_BUDGET))
}

/// Simulates a sample from a mixture, generating any parameters not supplied.
pub fn rmsmix<R: Rng + ?Sized>(opts: &RmsmixOptions, rng: &mut R) -> Result<SampleResult> {
    let (n, g) = (opts.n_items, opts.n_clust);
    if n < 2 || g == 0 {
        return Err(Error::InvalidArgument("need n_items >= 2 and n_clust >= 1".into()));
    }
    if !opts.mh && n > EXACT_SAMPLING_MAX_N {
        return Err(Error::ExactSamplingLimit { n, limit: EXACT_SAMPLING_MAX_N });
    }
    let check_len = |len: usize| {
        if len != g {
            Err(Error::DimensionMismatch { expected: g, found: len })
        } else {
            Ok(())
        }
    };
    let rho = match &opts.rho {
        Some(r) => {
            check_len(r.len())?;
            for x in r {
                if x.len() != n {
                    return Err(Error::DimensionMismatch { expected: n, found: x.len() });
                }
            }
            r.clone()
        }
        None if opts.uniform => (0..g).map(|_| Ranking::random(n, rng)).collect(),
        None => separated_consensus(n, g, rng)?,
    };
    let theta = match &opts.theta {
        Some(t) => {
            check_len(t.len())?;
            if t.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
                return Err(Error::InvalidArgument("concentrations must be finite and >= 0".into()));
            }
            t.clone()
        }
        None => (0..g).map(|_| random_theta(n, rng)).collect(),
    };
    let weights = match &opts.weights {
        Some(w) => {
            check_len(w.len())?;
            let s: f64 = w.iter().sum();
            if w.iter().any(|&x| !(x >= 0.0)) || (s - 1.0).abs() > 1e-8 {
                return Err(Error::InvalidArgument("weights must be nonnegative and sum to 1".into()));
            }
            w.clone()
        }
        None if opts.uniform => dirichlet(g, 1.0, rng),
        None => dirichlet(g, 2.0 * g as f64, rng),
    };

    let classification: Vec<usize> = (0..opts.sample_size).map(|_| categorical(&weights, rng)).collect();
    let mh = opts.mh.then(|| (opts.burn_in.unwrap_or(default_burn_in(n)), opts.thin.unwrap_or(default_thin(n))));
    let mut per_comp: Vec<std::vec::IntoIter<Ranking>> = Vec::with_capacity(g);
    for k in 0..g {
        let size = classification.iter().filter(|&&c| c == k).count();
        let params = MmsParams::new(rho[k].clone(), theta[k])?;
        per_comp.push(if size == 0 { Vec::new() } else { sample_component(size, &params, mh, rng)? }.into_iter());
    }
    let samples = classification.iter().map(|&c| per_comp[c].next().unwrap()).collect();
    Ok(SampleResult { samples, rho, theta, weights, classification })
}

/// Index drawn with probability proportional to `p`.
pub(crate) fn categorical<R: Rng + ?Sized>(p: &[f64], rng: &mut R) -> usize {
    let total: f64 = p.iter().sum();
    let u = rng.random::<f64>() * total;
    let mut acc = 0.0;
    for (i, &x) in p.iter().enumerate() {
        acc += x;
        if u < acc {
            return i;
        }
    }
    p.iter().rposition(|&x| x > 0.0).unwrap_or(p.len() - 1)
}
