//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits nonzero if any fails. `ACCEPTANCE_ONLY=3,9` restricts the run.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use spearmix::distance::{max_distance, spear_dist};
use spearmix::distribution::{
    distance_distribution, expected_dist, log_partition_function, uniform_mean, uniform_variance, var_dist,
    SpearmanDistribution,
};
use spearmix::mixture;
use spearmix::model::{fit_mms, loglik_mms, theta_mle};
use spearmix::numeric::{adjusted_rand_index, factorial_u128};
use spearmix::ranking::{augment, censor, complete, convert, CensorAmount, CensorType};
use spearmix::sampling::{
    default_burn_in, default_thin, rmsmix, sample_mms_exact, sample_mms_mh, ExactSampler, RmsmixOptions,
};
use spearmix::tables::{enumerate_counts, exact_table};
use spearmix::uncertainty::{bootstrap, ci_theta_asymptotic, itemwise_hpd, BootstrapOptions, BootstrapType};
use spearmix::{FitOptions, MmsParams, PartialRanking, Ranking, RankingDataset};

type Outcome = (bool, String);

fn rk(v: &[usize]) -> Ranking {
    Ranking::new(v.to_vec()).unwrap()
}

fn pr(v: &[usize]) -> PartialRanking {
    PartialRanking::new(v.iter().map(|&x| (x > 0).then_some(x)).collect()).unwrap()
}

fn all_rankings(n: usize) -> Vec<Ranking> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Ranking>) {
        if prefix.len() == used.len() {
            out.push(Ranking::new(prefix.clone()).unwrap());
            return;
        }
        for r in 0..used.len() {
            if !used[r] {
                used[r] = true;
                prefix.push(r + 1);
                rec(prefix, used, out);
                prefix.pop();
                used[r] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len();
    if m % 2 == 1 {
        v[m / 2]
    } else {
        (v[m / 2 - 1] + v[m / 2]) / 2.0
    }
}

fn golden_scalars() -> Outcome {
    let lz = log_partition_function(0.1, 5);
    let le = expected_dist(0.1, 5).ln();
    let lv = var_dist(0.1, 5).ln();
    let errs = [(lz - 3.253889).abs(), (le - 2.421115).abs(), (lv - 4.202741).abs()];
    let ok = errs.iter().all(|&e| e <= 1e-5);
    (ok, format!("log Z={lz:.7} ln E={le:.7} ln V={lv:.7} max err={:.1e}", errs.iter().cloned().fold(0.0, f64::max)))
}

fn exact_tables() -> Outcome {
    let printed = [1u64, 4, 3, 6, 7, 6, 4, 10, 6, 10, 6, 10, 6, 10, 4, 6, 7, 6, 3, 4, 1];
    let mut ok = exact_table(5).unwrap().counts == printed;
    let start = Instant::now();
    for n in 2..=8 {
        ok &= enumerate_counts(n) == exact_table(n).unwrap().counts;
    }
    let enum_time = start.elapsed();
    ok &= enum_time < Duration::from_secs(60);
    for n in 2..=20usize {
        let c = &exact_table(n).unwrap().counts;
        let nf = factorial_u128(n).unwrap();
        let total: u128 = c.iter().map(|&x| x as u128).sum();
        let sym = c.iter().eq(c.iter().rev());
        let mu = ((n * n * n - n) / 6) as i128;
        let s1: i128 = c.iter().enumerate().map(|(k, &x)| 2 * k as i128 * x as i128).sum();
        let s2: i128 = c
            .iter()
            .enumerate()
            .map(|(k, &x)| {
                let dev = 2 * k as i128 - mu;
                dev * dev * x as i128
            })
            .sum();
        let nn = n as i128;
        ok &= total == nf
            && sym
            && c.len() as u64 == max_distance(n) / 2 + 1
            && s1 == mu * nf as i128
            && 36 * s2 == nf as i128 * nn * nn * (nn + 1) * (nn + 1) * (nn - 1);
        let dist = SpearmanDistribution::exact(n).unwrap();
        let m = dist.moments(0.0);
        ok &= (m.mean - uniform_mean(n)).abs() <= 1e-9 * uniform_mean(n)
            && (m.variance - uniform_variance(n)).abs() <= 1e-9 * uniform_variance(n);
    }
    (ok, format!("n=5 printed table, enumeration n<=8 in {:.2?}, identities n<=20", enum_time))
}

// measured relative errors of the moment-matched E_θ[D], pinned as regression values
const APPROX_PINNED: [(usize, f64, f64); 6] = [
    (15, 5e-4, 0.00000529),
    (15, 1e-3, 0.00004314),
    (15, 5e-3, 0.00600455),
    (20, 5e-4, 0.00003179),
    (20, 1e-3, 0.00026250),
    (20, 5e-3, 0.03814411),
];

fn approximation_audit() -> Outcome {
    let mut ok = true;
    let mut detail = Vec::new();
    for &(n, theta, pinned) in &APPROX_PINNED {
        let exact = SpearmanDistribution::exact(n).unwrap().expected(theta);
        let approx = SpearmanDistribution::approximate(n).expected(theta);
        let rel = (approx - exact).abs() / exact;
        ok &= rel <= 0.05 && (rel - pinned).abs() <= 1e-7;
        detail.push(format!("n={n} θ={theta:e}: {rel:.8}"));
    }
    (ok, detail.join(", "))
}

fn borda_optimality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let spaces: Vec<Vec<Ranking>> = (0..=5).map(|n| if n >= 2 { all_rankings(n) } else { vec![] }).collect();
    let mut ok = true;
    for _ in 0..100 {
        let n = rng.random_range(2..=5usize);
        let size = rng.random_range(1..=40usize);
        let rows: Vec<Ranking> = if rng.random::<bool>() {
            (0..size).map(|_| Ranking::random(n, &mut rng)).collect()
        } else {
            let p = MmsParams::new(Ranking::random(n, &mut rng), rng.random_range(0.0..0.5)).unwrap();
            sample_mms_exact(size, &p, &mut rng).unwrap()
        };
        let mut rbar = vec![0.0; n];
        for r in &rows {
            for (i, &x) in r.ranks().iter().enumerate() {
                rbar[i] += x as f64 / size as f64;
            }
        }
        let score = |rho: &Ranking| rho.ranks().iter().zip(&rbar).map(|(&a, &b)| a as f64 * b).sum::<f64>();
        let fit = fit_mms(&RankingDataset::from_rankings(rows.clone()).unwrap()).unwrap();
        let best_score = spaces[n].iter().map(score).fold(f64::NEG_INFINITY, f64::max);
        ok &= score(&fit.params.rho[0]) >= best_score - 1e-9;

        let mut best_ll = f64::NEG_INFINITY;
        for rho in &spaces[n] {
            let d_bar = rows.iter().map(|r| spear_dist(r, rho).unwrap() as f64).sum::<f64>() / size as f64;
            let t = theta_mle(d_bar, n).unwrap().theta;
            best_ll = best_ll.max(loglik_mms(&MmsParams::new(rho.clone(), t).unwrap(), &rows).unwrap());
        }
        ok &= (fit.final_log_lik() - best_ll).abs() <= 1e-8 * best_ll.abs().max(1.0);
    }
    (ok, "100 datasets, Borda and joint exhaustive maximum agree".into())
}

fn data_op_goldens() -> Outcome {
    let af = vec![rk(&[4, 2, 1, 3, 5, 6, 7]), rk(&[1, 4, 3, 2, 7, 6, 5]), rk(&[3, 4, 1, 2, 7, 6, 5])];
    let rows: Vec<PartialRanking> = af.iter().map(PartialRanking::from).collect();
    let ord = convert(&rows);
    let mut ok = ord == vec![pr(&[3, 2, 4, 1, 5, 6, 7]), pr(&[1, 4, 3, 2, 7, 6, 5]), pr(&[3, 4, 1, 2, 7, 6, 5])];
    ok &= convert(&ord) == rows;

    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let (top3, nranked) = censor(&af, CensorType::TopK, &CensorAmount::Fixed(vec![3; 3]), &mut rng).unwrap();
    ok &= top3 == vec![pr(&[0, 2, 1, 3, 0, 0, 0]), pr(&[1, 0, 3, 2, 0, 0, 0]), pr(&[3, 0, 1, 2, 0, 0, 0])];
    ok &= nranked == vec![3; 3];

    let toy = vec![pr(&[2, 0, 1, 0, 3]), pr(&[0, 4, 0, 1, 0])];
    ok &= complete(&toy, &[Ranking::identity(5), Ranking::reversed(5)]).unwrap()
        == vec![rk(&[2, 4, 1, 5, 3]), rk(&[5, 4, 3, 1, 2])];
    ok &= augment(&toy[0]).unwrap() == vec![rk(&[2, 4, 1, 5, 3]), rk(&[2, 5, 1, 4, 3])];
    let printed: Vec<Ranking> = [[2, 4, 3, 1, 5], [3, 4, 2, 1, 5], [3, 4, 5, 1, 2], [2, 4, 5, 1, 3], [5, 4, 2, 1, 3], [5, 4, 3, 1, 2]]
        .iter()
        .map(|v| rk(v))
        .collect();
    ok &= augment(&toy[1]).unwrap() == printed;
    (ok, "conversion, top-3 censoring, completion, augmentation".into())
}

fn single_component_recovery() -> Outcome {
    let n = 10;
    let mut hits = 0;
    let mut errs = Vec::new();
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(600 + seed);
        let truth = Ranking::random(n, &mut rng);
        let rows = sample_mms_mh(500, &MmsParams::new(truth.clone(), 0.15).unwrap(), default_burn_in(n), default_thin(n), &mut rng)
            .unwrap();
        let fit = fit_mms(&RankingDataset::from_rankings(rows).unwrap()).unwrap();
        hits += usize::from(fit.params.rho[0] == truth);
        errs.push((fit.params.theta[0] - 0.15).abs());
    }
    let med = median(errs);
    let ok = hits >= 19 && med <= 0.02;
    (ok, format!("exact recovery {hits}/20, median |θ̂-0.15| = {med:.5}"))
}

fn mixture_recovery() -> Outcome {
    let mut aris = Vec::new();
    let mut selected = 0;
    let mut picks = Vec::new();
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(700 + seed);
        let mut o = RmsmixOptions::new(300, 8, 3);
        o.theta = Some(vec![0.15; 3]);
        let sim = rmsmix(&o, &mut rng).unwrap();
        let data = RankingDataset::from_rankings(sim.samples.clone()).unwrap();
        let mut best = (f64::INFINITY, 0);
        for g in 1..=4 {
            let opts = FitOptions { n_clust: g, n_start: 50, seed, ..FitOptions::default() };
            let fit = mixture::fit(&data, &opts).unwrap();
            if g == 3 {
                aris.push(adjusted_rand_index(&fit.map_classification, &sim.classification));
            }
            if fit.bic < best.0 {
                best = (fit.bic, g);
            }
        }
        selected += usize::from(best.1 == 3);
        picks.push(best.1);
    }
    let med = median(aris);
    let ok = med >= 0.9 && selected >= 16;
    (ok, format!("median ARI {med:.4}, BIC picks G=3 in {selected}/20 seeds {picks:?}"))
}

fn nondecreasing(trace: &[f64]) -> bool {
    trace.windows(2).all(|w| w[1] >= w[0] - 1e-8)
}

fn em_monotonicity() -> Outcome {
    let mut checked = 0;
    let mut ok = true;
    let fixtures = vec![
        RankingDataset::from_rankings(vec![rk(&[1, 2, 3, 4]), rk(&[4, 3, 2, 1]), rk(&[1, 3, 2, 4]), rk(&[4, 2, 3, 1])]).unwrap(),
        RankingDataset::from_partial(vec![pr(&[2, 0, 1, 0, 3]), pr(&[0, 4, 0, 1, 0]), pr(&[1, 2, 3, 4, 5]), pr(&[5, 4, 0, 0, 1])])
            .unwrap(),
    ];
    for (i, data) in fixtures.iter().enumerate() {
        for g in 1..=2 {
            let opts = FitOptions { n_clust: g, n_start: 5, seed: i as u64, ..FitOptions::default() };
            let fit = mixture::fit(data, &opts).unwrap();
            ok &= nondecreasing(&fit.log_lik);
            checked += 1;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for k in 0..50u64 {
        let n = rng.random_range(4..=6usize);
        let g = rng.random_range(1..=3usize);
        let size = rng.random_range(20..=60usize);
        let sim = rmsmix(&RmsmixOptions { uniform: true, ..RmsmixOptions::new(size, n, g) }, &mut rng).unwrap();
        let full = RankingDataset::from_rankings(sim.samples.clone()).unwrap();
        let probs: Vec<f64> = (1..n).map(|k| if k >= 2 { 1.0 } else { 0.0 }).collect();
        let (part, _) = censor(&sim.samples, CensorType::Mar, &CensorAmount::Random(probs), &mut rng).unwrap();
        let part = RankingDataset::from_partial(part).unwrap();
        for data in [&full, &part] {
            let init = Some(mixture::MixtureParams::random(n, g, &mut rng));
            let opts = FitOptions { n_clust: g, n_start: 1, seed: k, init: init.into_iter().collect(), ..FitOptions::default() };
            let fit = mixture::fit(data, &opts).unwrap();
            ok &= nondecreasing(&fit.log_lik);
            checked += 1;
        }
    }
    (ok, format!("{checked} traces nondecreasing within 1e-8"))
}

fn partial_agreement() -> Outcome {
    let n = 20;
    let mut worst = (0.0f64, 0.0f64);
    let mut ok = true;
    for seed in 0..3u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(900 + seed);
        let truth = MmsParams::new(Ranking::random(n, &mut rng), 0.009).unwrap();
        let full = sample_mms_mh(100, &truth, default_burn_in(n), default_thin(n), &mut rng).unwrap();
        // keep 12..19 entries, so at most 8 are missing
        let probs: Vec<f64> = (1..n).map(|k| if k >= 12 { 1.0 } else { 0.0 }).collect();
        let (part, _) = censor(&full, CensorType::Mar, &CensorAmount::Random(probs), &mut rng).unwrap();
        let data = RankingDataset::from_partial(part).unwrap();
        let aug = mixture::fit(&data, &FitOptions { n_start: 1, seed, ..FitOptions::default() }).unwrap();
        let mc = mixture::fit(&data, &FitOptions { n_start: 1, seed, mc_em: true, ..FitOptions::default() }).unwrap();
        let rel = spear_dist(&aug.params.rho[0], &mc.params.rho[0]).unwrap() as f64 / max_distance(n) as f64;
        let dt = (aug.params.theta[0] - mc.params.theta[0]).abs();
        worst = (worst.0.max(rel), worst.1.max(dt));
        ok &= rel <= 0.01 && dt <= 5e-4;
    }
    (ok, format!("3 datasets, worst relative distance {:.5}, worst |Δθ| {:.2e}", worst.0, worst.1))
}

fn sampler_correctness() -> Outcome {
    let mut ok = true;
    let mut detail = Vec::new();
    let space = all_rankings(4);
    let crit = ChiSquared::new(23.0).unwrap().inverse_cdf(0.99);
    for (k, theta) in [0.0, 0.3].into_iter().enumerate() {
        let p = MmsParams::new(rk(&[2, 4, 1, 3]), theta).unwrap();
        let sampler = ExactSampler::new(&p).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + k as u64);
        let mut counts = vec![0u64; space.len()];
        let total = 1_000_000;
        for _ in 0..total {
            let r = sampler.sample(&mut rng);
            counts[space.iter().position(|x| *x == r).unwrap()] += 1;
        }
        let lz = log_partition_function(theta, 4);
        let stat: f64 = space
            .iter()
            .zip(&counts)
            .map(|(r, &c)| {
                let e = total as f64 * (-theta * spear_dist(r, &p.rho).unwrap() as f64 - lz).exp();
                (c as f64 - e).powi(2) / e
            })
            .sum();
        ok &= stat < crit;
        detail.push(format!("χ²(θ={theta})={stat:.2}"));
    }

    let n = 6;
    let p = MmsParams::new(Ranking::random(n, &mut ChaCha8Rng::seed_from_u64(1)), 0.2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1010);
    let draws = sample_mms_mh(50_000, &p, default_burn_in(n), default_thin(n), &mut rng).unwrap();
    let dist = distance_distribution(n);
    let lz = dist.log_partition(0.2);
    let mut emp = vec![0.0; dist.distances.len()];
    for r in &draws {
        emp[(spear_dist(r, &p.rho).unwrap() / 2) as usize] += 1.0 / draws.len() as f64;
    }
    let tv: f64 = dist
        .distances
        .iter()
        .zip(&dist.log_card)
        .zip(&emp)
        .map(|((&d, &l), &e)| ((l - 0.2 * d as f64 - lz).exp() - e).abs())
        .sum::<f64>()
        / 2.0;
    ok &= tv <= 0.05;
    detail.push(format!("MH TV={tv:.4} (crit χ²={crit:.2})"));
    (ok, detail.join(", "))
}

fn ci_behavior() -> Outcome {
    let n = 10;
    let p = MmsParams::new(Ranking::random(n, &mut ChaCha8Rng::seed_from_u64(11)), 0.1).unwrap();
    let sampler = ExactSampler::new(&p).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1100);
    let mut covered = 0;
    for _ in 0..200 {
        let rows: Vec<Ranking> = (0..200).map(|_| sampler.sample(&mut rng)).collect();
        let fit = fit_mms(&RankingDataset::from_rankings(rows).unwrap()).unwrap();
        let (lo, hi) = ci_theta_asymptotic(&fit, 0.95).unwrap().theta_ci[0];
        covered += usize::from(lo <= 0.1 && 0.1 <= hi);
    }
    let coverage = covered as f64 / 200.0;
    let mut ok = (0.90..=0.99).contains(&coverage);

    let mut hpd_ok = true;
    for _ in 0..100 {
        let m = rng.random_range(4..=7usize);
        let centre = Ranking::random(m, &mut rng);
        let samples =
            sample_mms_exact(rng.random_range(1..=60), &MmsParams::new(centre.clone(), 0.3).unwrap(), &mut rng).unwrap();
        let point = if rng.random::<bool>() { centre } else { Ranking::random(m, &mut rng) };
        let mut prev: Option<Vec<Vec<usize>>> = None;
        for level in [0.5, 0.8, 0.9, 0.95, 0.99] {
            let sets = itemwise_hpd(&samples, &point, level).unwrap();
            hpd_ok &= sets.iter().zip(point.ranks()).all(|(s, r)| s.contains(r));
            if let Some(p) = &prev {
                hpd_ok &= p.iter().zip(&sets).all(|(a, b)| a.iter().all(|x| b.contains(x)));
            }
            prev = Some(sets);
        }
    }
    ok &= hpd_ok;

    let mut rng = ChaCha8Rng::seed_from_u64(1101);
    let mut o = RmsmixOptions::new(150, 6, 3);
    o.theta = Some(vec![0.3; 3]);
    let sim = rmsmix(&o, &mut rng).unwrap();
    let data = RankingDataset::from_rankings(sim.samples).unwrap();
    let fit = mixture::fit(&data, &FitOptions { n_clust: 3, n_start: 10, seed: 1, ..FitOptions::default() }).unwrap();
    let soft = bootstrap(&fit, &data, &BootstrapOptions { seed: 2, ..BootstrapOptions::new(50, BootstrapType::Soft) }).unwrap();
    let sep =
        bootstrap(&fit, &data, &BootstrapOptions { seed: 2, ..BootstrapOptions::new(50, BootstrapType::Separated) }).unwrap();
    let weights_ok = soft.ci.weights_ci.is_some() && sep.ci.weights_ci.is_none();
    ok &= weights_ok;
    (ok, format!("coverage {coverage:.3}, HPD containment/monotonicity {hpd_ok}, soft-only weight CIs {weights_ok}"))
}

fn best_of<T>(reps: usize, mut f: impl FnMut() -> T) -> (Duration, T) {
    let mut best = Duration::MAX;
    let mut out = None;
    for _ in 0..reps {
        let start = Instant::now();
        let v = f();
        best = best.min(start.elapsed());
        out = Some(v);
    }
    (best, out.unwrap())
}

fn performance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1200);
    let mut sample_g1 = |n: usize| {
        let p = MmsParams::new(Ranking::random(n, &mut rng), 1.0 / (n * n) as f64 + 0.5 / (n as f64).powf(1.5)).unwrap();
        RankingDataset::from_rankings(sample_mms_mh(100, &p, default_burn_in(n), default_thin(n), &mut rng).unwrap()).unwrap()
    };
    let d20 = sample_g1(20);
    let d100 = sample_g1(100);

    let cold = Instant::now();
    fit_mms(&d100).unwrap();
    let cold100 = cold.elapsed();
    let (t20, _) = best_of(5, || fit_mms(&d20).unwrap());
    let (t100, _) = best_of(3, || fit_mms(&d100).unwrap());

    let mut rng = ChaCha8Rng::seed_from_u64(1201);
    let mut o = RmsmixOptions::new(100, 9, 2);
    o.uniform = true;
    o.mh = true;
    let data = RankingDataset::from_rankings(rmsmix(&o, &mut rng).unwrap().samples).unwrap();
    let opts = FitOptions { n_clust: 2, n_start: 10, seed: 3, ..FitOptions::default() };
    let (t_mix, serial) = best_of(3, || mixture::fit(&data, &opts).unwrap());
    let par = mixture::fit(&data, &FitOptions { parallel: true, ..opts.clone() }).unwrap();
    let fit = mixture::fit(&data, &FitOptions { n_clust: 2, n_start: 3, seed: 3, ..FitOptions::default() }).unwrap();
    let b = BootstrapOptions { seed: 5, ..BootstrapOptions::new(20, BootstrapType::Soft) };
    let deterministic = serial == par
        && bootstrap(&fit, &data, &b).unwrap() == bootstrap(&fit, &data, &BootstrapOptions { parallel: true, ..b.clone() }).unwrap();

    let ok = t20 <= Duration::from_millis(10) && t100 <= Duration::from_secs(1) && t_mix <= Duration::from_millis(500) && deterministic;
    (
        ok,
        format!(
            "G=1 n=20 {t20:.2?}, n=100 {t100:.2?} (first call {cold100:.2?}), G=2 n=9 n_start=10 {t_mix:.2?}, parallel on/off identical {deterministic}"
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("golden scalars", golden_scalars),
        ("exact tables", exact_tables),
        ("approximation audit", approximation_audit),
        ("Borda optimality", borda_optimality),
        ("data-op goldens", data_op_goldens),
        ("single-component recovery", single_component_recovery),
        ("mixture recovery and BIC selection", mixture_recovery),
        ("EM monotonicity", em_monotonicity),
        ("partial-ranking agreement", partial_agreement),
        ("sampler correctness", sampler_correctness),
        ("CI behavior", ci_behavior),
        ("performance and determinism", performance),
    ];
    let only: Option<Vec<usize>> =
        std::env::var("ACCEPTANCE_ONLY").ok().map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let id = i + 1;
        if only.as_ref().is_some_and(|o| !o.contains(&id)) {
            continue;
        }
        let start = Instant::now();
        let (ok, detail) = f();
        println!("criterion {id:>2} {name}: {} [{:.1?}] {detail}", if ok { "PASS" } else { "FAIL" }, start.elapsed());
        failed += usize::from(!ok);
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
