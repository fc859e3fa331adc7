//! Distribution of the Spearman distance under the uniform model and the
//! resulting partition function and moments of the Mallows–Spearman model.
//!
//! For `n <= 20` the embedded exact tables are used. Larger `n` use a
//! discrete maximum-entropy approximation: on the even-distance support the
//! log-cardinalities are a quadratic in `d` whose two free coefficients are
//! solved so that the first two uniform moments, `(n³−n)/6` and
//! `n²(n+1)²(n−1)/36`, are reproduced exactly and the total mass is `n!`.
//! From `n = 170` the support is thinned to a fixed grid of
//! [`GRID_POINTS`] distances, each carrying the number of even distances it
//! stands for (trapezoidal weights).

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use serde::Serialize;

use crate::distance::{max_distance, spear_dist};
use crate::error::Result;
use crate::numeric::{binomial, ln_factorial, logsumexp};
use crate::ranking::Ranking;
use crate::tables::{exact_table, MAX_EXACT_N};

/// `n` from which the approximate distribution is evaluated on a grid.
pub const GRID_FROM_N: usize = 170;
pub const GRID_POINTS: usize = 10_001;

/// Frequencies `N_d` of the Spearman distance from the identity over all rankings of `n` items.
#[derive(Debug, Clone, Serialize)]
pub struct SpearmanDistribution {
    pub n_items: usize,
    /// Ascending even distances.
    pub distances: Vec<u64>,
    /// `log N_d` aligned with `distances`; `-inf` where `N_d = 0`.
    pub log_card: Vec<f64>,
    pub exact: bool,
    #[serde(skip)]
    counts: Option<Vec<u64>>,
}

/// `log Z`, mean and variance of the distance at one concentration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub log_z: f64,
    pub mean: f64,
    pub variance: f64,
}

/// Mean of the distance under the uniform model, `(n³ − n)/6`.
pub fn uniform_mean(n: usize) -> f64 {
    let n = n as f64;
    (n * n * n - n) / 6.0
}

/// Variance of the distance under the uniform model, `n²(n+1)²(n−1)/36`.
pub fn uniform_variance(n: usize) -> f64 {
    let n = n as f64;
    n * n * (n + 1.0) * (n + 1.0) * (n - 1.0) / 36.0
}

impl SpearmanDistribution {
    /// Exact distribution from the embedded table, for `2 <= n <= 20`.
    pub fn exact(n: usize) -> Option<Self> {
        let table = exact_table(n)?;
        Some(SpearmanDistribution {
            n_items: n,
            distances: table.distances().collect(),
            log_card: table
                .counts
                .iter()
                .map(|&c| if c == 0 { f64::NEG_INFINITY } else { (c as f64).ln() })
                .collect(),
            exact: true,
            counts: Some(table.counts.clone()),
        })
    }

    /// Moment-matched approximation for any `n >= 2`; gridded from [`GRID_FROM_N`].
    pub fn approximate(n: usize) -> Self {
        assert!(n >= 2, "distance distribution needs n >= 2");
        let steps = binomial(n as u64 + 1, 3);
        let (distances, base): (Vec<u64>, Vec<f64>) = if n < GRID_FROM_N {
            ((0..=steps).map(|k| 2 * k).collect(), vec![0.0; steps as usize + 1])
        } else {
            let last = GRID_POINTS as u64 - 1;
            let h: Vec<u64> = (0..=last)
                .map(|j| ((j as u128 * steps as u128 + last as u128 / 2) / last as u128) as u64)
                .collect();
            let m = h.len();
            let mult: Vec<f64> = (0..m)
                .map(|j| {
                    let left = if j == 0 { 1.0 } else { (h[j] - h[j - 1]) as f64 };
                    let right = if j == m - 1 { 1.0 } else { (h[j + 1] - h[j]) as f64 };
                    ((left + right) / 2.0).ln()
                })
                .collect();
            (h.iter().map(|&x| 2 * x).collect(), mult)
        };

        let mu = uniform_mean(n);
        let sigma = uniform_variance(n).sqrt();
        let t: Vec<f64> = distances.iter().map(|&d| (d as f64 - mu) / sigma).collect();
        let (b, c) = fit_two_moments(&t, &base);
        let raw: Vec<f64> = t.iter().zip(&base).map(|(&t, &m)| m + b * t + c * t * t).collect();
        let shift = ln_factorial(n) - logsumexp(&raw);
        SpearmanDistribution {
            n_items: n,
            distances,
            log_card: raw.into_iter().map(|x| x + shift).collect(),
            exact: false,
            counts: None,
        }
    }

    /// Exact integer counts, when available.
    pub fn counts(&self) -> Option<&[u64]> {
        self.counts.as_deref()
    }

    pub fn max_distance(&self) -> u64 {
        max_distance(self.n_items)
    }

    /// `log Z(θ)`, `E_θ[D]` and `V_θ[D]` from one weighting of the support.
    pub fn moments(&self, theta: f64) -> Moments {
        let logw: Vec<f64> =
            self.log_card.iter().zip(&self.distances).map(|(&l, &d)| l - theta * d as f64).collect();
        let log_z = logsumexp(&logw);
        let mut mean = 0.0;
        let w: Vec<f64> = logw.iter().map(|&x| (x - log_z).exp()).collect();
        for (&wi, &d) in w.iter().zip(&self.distances) {
            mean += wi * d as f64;
        }
        let mut variance = 0.0;
        for (&wi, &d) in w.iter().zip(&self.distances) {
            let c = d as f64 - mean;
            variance += wi * c * c;
        }
        Moments { log_z, mean, variance }
    }

    pub fn log_partition(&self, theta: f64) -> f64 {
        let logw: Vec<f64> =
            self.log_card.iter().zip(&self.distances).map(|(&l, &d)| l - theta * d as f64).collect();
        logsumexp(&logw)
    }

    /// `E_θ[D]` only; the hot path of the concentration root finder.
    pub fn expected(&self, theta: f64) -> f64 {
        let mut max = f64::NEG_INFINITY;
        for (&l, &d) in self.log_card.iter().zip(&self.distances) {
            max = max.max(l - theta * d as f64);
        }
        let (mut s0, mut s1) = (0.0, 0.0);
        for (&l, &d) in self.log_card.iter().zip(&self.distances) {
            let w = (l - theta * d as f64 - max).exp();
            s0 += w;
            s1 += w * d as f64;
        }
        s1 / s0
    }
}

/// Solves `(b, c)` so that weights `exp(base + b t + c t²)` give `E[t] = 0`, `E[t²] = 1`.
fn fit_two_moments(t: &[f64], base: &[f64]) -> (f64, f64) {
    let (mut b, mut c) = (0.0f64, -0.5f64);
    for _ in 0..100 {
        let logw: Vec<f64> = t.iter().zip(base).map(|(&t, &m)| m + b * t + c * t * t).collect();
        let lz = logsumexp(&logw);
        let mut m = [0.0f64; 5];
        for (&lw, &ti) in logw.iter().zip(t) {
            let w = (lw - lz).exp();
            let mut p = w;
            for mk in m.iter_mut() {
                *mk += p;
                p *= ti;
            }
        }
        let f1 = m[1];
        let f2 = m[2] - 1.0;
        if f1.abs() < 1e-15 && f2.abs() < 1e-15 {
            break;
        }
        let j11 = m[2] - m[1] * m[1];
        let j12 = m[3] - m[1] * m[2];
        let j22 = m[4] - m[2] * m[2];
        let det = j11 * j22 - j12 * j12;
        let db = (j22 * f1 - j12 * f2) / det;
        let dc = (j11 * f2 - j12 * f1) / det;
        b -= db;
        c -= dc;
        if db.abs() < 1e-16 && dc.abs() < 1e-16 {
            break;
        }
    }
    (b, c)
}

fn cache() -> &'static RwLock<HashMap<usize, Arc<SpearmanDistribution>>> {
    static CACHE: OnceLock<RwLock<HashMap<usize, Arc<SpearmanDistribution>>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// The distance distribution used for inference: exact for `n <= 20`,
/// approximate above. Results are cached process-wide.
pub fn distance_distribution(n: usize) -> Arc<SpearmanDistribution> {
    assert!(n >= 2, "distance distribution needs n >= 2");
    if let Some(d) = cache().read().unwrap().get(&n) {
        return Arc::clone(d);
    }
    let dist = Arc::new(if n <= MAX_EXACT_N {
        SpearmanDistribution::exact(n).expect("embedded table missing")
    } else {
        SpearmanDistribution::approximate(n)
    });
    let mut w = cache().write().unwrap();
    Arc::clone(w.entry(n).or_insert(dist))
}

pub fn partition_function(theta: f64, n: usize) -> f64 {
    distance_distribution(n).log_partition(theta).exp()
}

pub fn log_partition_function(theta: f64, n: usize) -> f64 {
    distance_distribution(n).log_partition(theta)
}

pub fn expected_dist(theta: f64, n: usize) -> f64 {
    distance_distribution(n).expected(theta)
}

pub fn var_dist(theta: f64, n: usize) -> f64 {
    distance_distribution(n).moments(theta).variance
}

/// `log P(r | ρ, θ) = −θ d(r, ρ) − log Z(θ)`.
pub fn log_density(r: &Ranking, rho: &Ranking, theta: f64) -> Result<f64> {
    let d = spear_dist(r, rho)?;
    Ok(-theta * d as f64 - log_partition_function(theta, rho.len()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tables::enumerate_counts;

    #[test]
    fn n5_logcard_matches_printed_values() {
        let d = distance_distribution(5);
        assert!(d.exact);
        assert_eq!(d.distances, (0..=20).map(|k| 2 * k).collect::<Vec<u64>>());
        let printed = [
            0.000000, 1.386294, 1.098612, 1.791759, 1.945910, 1.791759, 1.386294, 2.302585, 1.791759, 2.302585,
            1.791759, 2.302585, 1.791759, 2.302585, 1.386294, 1.791759, 1.945910, 1.791759, 1.098612, 1.386294,
            0.000000,
        ];
        for (a, b) in d.log_card.iter().zip(printed) {
            assert!((a - b).abs() < 5e-7);
        }
    }

    #[test]
    fn golden_scalars_n5() {
        // the printed values are on the log scale
        assert!((log_partition_function(0.1, 5) - 3.253889).abs() < 1e-5);
        assert!((expected_dist(0.1, 5).ln() - 2.421115).abs() < 1e-5);
        assert!((var_dist(0.1, 5).ln() - 4.202741).abs() < 1e-5);
        let counts = [1.0, 4.0, 3.0, 6.0, 7.0, 6.0, 4.0, 10.0, 6.0, 10.0, 6.0, 10.0, 6.0, 10.0, 4.0, 6.0, 7.0, 6.0, 3.0, 4.0, 1.0];
        let w: Vec<f64> = counts.iter().enumerate().map(|(k, c)| c * (-0.2 * k as f64).exp()).collect();
        let z: f64 = w.iter().sum();
        let e: f64 = w.iter().enumerate().map(|(k, x)| 2.0 * k as f64 * x).sum::<f64>() / z;
        let v: f64 = w.iter().enumerate().map(|(k, x)| (2.0 * k as f64 - e).powi(2) * x).sum::<f64>() / z;
        assert!((partition_function(0.1, 5) - z).abs() < 1e-12 * z);
        assert!((expected_dist(0.1, 5) - e).abs() < 1e-12 * e);
        assert!((var_dist(0.1, 5) - v).abs() < 1e-10 * v);
    }

    #[test]
    fn limits_in_theta() {
        for n in [3usize, 5, 8, 12, 20] {
            let nfact: f64 = (1..=n).map(|k| k as f64).product();
            assert!((partition_function(0.0, n) / nfact - 1.0).abs() < 1e-12);
            assert!((expected_dist(0.0, n) - uniform_mean(n)).abs() < 1e-8 * uniform_mean(n));
            assert!((partition_function(60.0, n) - 1.0).abs() < 1e-12);
            assert!(expected_dist(60.0, n) < 1e-12);
        }
        // n = 5, θ = 0: exact second moment of the table
        let counts = enumerate_counts(5);
        let mean: f64 = counts.iter().enumerate().map(|(k, &c)| 2.0 * k as f64 * c as f64).sum::<f64>() / 120.0;
        let var: f64 =
            counts.iter().enumerate().map(|(k, &c)| (2.0 * k as f64 - mean).powi(2) * c as f64).sum::<f64>() / 120.0;
        assert_eq!(mean, 20.0);
        assert!((var_dist(0.0, 5) - var).abs() < 1e-9);
        assert!((var - uniform_variance(5)).abs() < 1e-9);
    }

    #[test]
    fn log_density_sums_to_one_over_small_spaces() {
        for n in 2..=6 {
            let rho = Ranking::new((1..=n).rev().collect()).unwrap();
            let all = crate::ranking::index_permutations(n);
            for theta in [0.0, 0.07, 0.5] {
                let total: f64 = all
                    .iter()
                    .map(|p| {
                        let r = Ranking::new(p.iter().map(|&x| x + 1).collect()).unwrap();
                        log_density(&r, &rho, theta).unwrap().exp()
                    })
                    .sum();
                assert!((total - 1.0).abs() < 1e-12, "n = {n}, θ = {theta}");
            }
        }
        let e = Ranking::identity(5);
        assert!((log_density(&e, &e, 0.1).unwrap() + 3.253889).abs() < 1e-6);
        assert!((log_density(&e, &Ranking::reversed(5), 0.0).unwrap() + 120f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn expected_is_decreasing_with_derivative_minus_variance() {
        for n in [4usize, 9, 15, 25] {
            let mut prev = f64::INFINITY;
            for k in 0..40 {
                let theta = k as f64 * 0.01;
                let e = expected_dist(theta, n);
                assert!(e < prev);
                prev = e;
                let h = 1e-4 / uniform_variance(n).sqrt();
                let fd = (expected_dist(theta + h, n) - expected_dist(theta - h, n)) / (2.0 * h);
                let v = var_dist(theta, n);
                assert!((fd + v).abs() <= 1e-6 * v, "n={n} θ={theta} fd={fd} v={v}");
            }
        }
    }

    #[test]
    fn approximation_reproduces_uniform_moments() {
        for n in [21usize, 30, 60] {
            let d = SpearmanDistribution::approximate(n);
            assert!(!d.exact);
            assert!((logsumexp(&d.log_card) - ln_factorial(n)).abs() < 1e-9);
            let m = d.moments(0.0);
            assert!((m.mean / uniform_mean(n) - 1.0).abs() < 1e-10);
            assert!((m.variance / uniform_variance(n) - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn grid_approximation_for_large_n() {
        let d = SpearmanDistribution::approximate(200);
        assert_eq!(d.distances.len(), GRID_POINTS);
        assert_eq!(d.distances[0], 0);
        assert_eq!(*d.distances.last().unwrap(), max_distance(200));
        assert!(d.distances.windows(2).all(|w| w[0] < w[1] && w[1] % 2 == 0));
        let m = d.moments(0.0);
        assert!((m.mean / uniform_mean(200) - 1.0).abs() < 1e-10);
        assert!((m.variance / uniform_variance(200) - 1.0).abs() < 1e-10);
        assert!((logsumexp(&d.log_card) - ln_factorial(200)).abs() < 1e-8);
    }
}
