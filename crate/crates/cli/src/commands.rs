use std::path::Path;
use std::time::Instant;

use anyhow::{bail, ensure, Context, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use spearmix::describe::describe as describe_data;
use spearmix::distance::{max_distance, spear_dist, spear_dist_matrix};
use spearmix::distribution::distance_distribution;
use spearmix::io::{read_csv_path, write_dataset, write_matrix, write_rankings};
use spearmix::mixture::{self, bic_df};
use spearmix::model::fit_mms;
use spearmix::numeric::mix_seed;
use spearmix::ranking::{self, CensorAmount, CensorType};
use spearmix::sampling::{rmsmix, RmsmixOptions, EXACT_SAMPLING_MAX_N};
use spearmix::tables::MAX_EXACT_N;
use spearmix::uncertainty::{self, BootstrapOptions, BootstrapType};
use spearmix::{FitOptions, FitResult, Ordering, Ranking, RankingDataset};

use crate::report::{envelope, write_bytes, write_json};
use crate::{
    BenchArgs, BootKind, BootstrapArgs, CensorArgs, CensorKind, CompleteArgs, DescribeArgs, DistArgs, DistrArgs,
    FitArgs, FitSettings, IoArgs, Protocol, SampleArgs,
};

fn load(path: &Path) -> Result<RankingDataset> {
    let data = read_csv_path(path).with_context(|| format!("reading {}", path.display()))?;
    ensure!(!data.is_empty(), "{}: no data rows", path.display());
    Ok(data)
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> spearmix::Result<()>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

fn numbered(k: usize) -> Vec<String> {
    (1..=k).map(|i| i.to_string()).collect()
}

fn labelled_ordering(o: &Ordering, labels: &[String]) -> Vec<String> {
    o.items().iter().map(|&i| labels[i - 1].clone()).collect()
}

fn parse_ranking(v: &[usize], n: usize) -> Result<Ranking> {
    ensure!(v.len() == n, "ranking has {} entries, data has {n} items", v.len());
    Ok(Ranking::new(v.to_vec())?)
}

pub fn convert(a: &IoArgs) -> Result<()> {
    let data = load(&a.input)?;
    let rows = ranking::convert(data.rows());
    let out = RankingDataset::new(rows, data.item_labels().to_vec())?;
    write_bytes(a.output.as_deref(), &csv_bytes(|w| write_dataset(w, &out))?)
}

pub fn describe(a: &DescribeArgs) -> Result<()> {
    let data = load(&a.io.input)?;
    let subset: Option<Vec<usize>> = match &a.subset {
        Some(rows) => Some(
            rows.iter()
                .map(|&r| {
                    ensure!(r >= 1 && r <= data.len(), "subset row {r} outside 1..={}", data.len());
                    Ok(r - 1)
                })
                .collect::<Result<_>>()?,
        ),
        None => None,
    };
    let d = describe_data(&data, subset.as_deref())?;
    let labels = d.item_labels.clone();
    if let Some(p) = &a.marginals_csv {
        let n = labels.len();
        write_bytes(Some(p), &csv_bytes(|w| write_matrix(w, "rank", &numbered(n), &labels, &d.first_order_marginals))?)?;
    }
    if let Some(p) = &a.pairwise_csv {
        write_bytes(Some(p), &csv_bytes(|w| write_matrix(w, "item", &labels, &labels, &d.pairwise_comparison))?)?;
    }
    let result = json!({
        "n_obs": d.n_obs,
        "item_labels": d.item_labels,
        "n_ranked_distribution": d.n_ranked_distribution,
        "missing_per_item": d.missing_per_item,
        "mean_ranks": d.mean_ranks,
        "borda_ordering": d.borda_ordering,
        "borda_ordering_labels": labelled_ordering(&d.borda_ordering, &labels),
        "first_order_marginals": d.first_order_marginals,
        "pairwise_comparison": d.pairwise_comparison,
        "top_k_inference": d.top_k_inference,
    });
    write_json(a.io.output.as_deref(), &envelope("describe", a, None, false, result))
}

pub fn censor(a: &CensorArgs) -> Result<()> {
    let data = load(&a.io.input)?;
    let rows = data.complete_rows()?;
    let amount = match (&a.nranked, &a.probs) {
        (Some(k), None) if k.len() == 1 => CensorAmount::Fixed(vec![k[0]; rows.len()]),
        (Some(k), None) => CensorAmount::Fixed(k.clone()),
        (None, Some(p)) => CensorAmount::Random(p.clone()),
        _ => bail!("give exactly one of --nranked and --probs"),
    };
    let random = matches!(a.kind, CensorKind::Mar) || matches!(amount, CensorAmount::Random(_));
    ensure!(!random || a.seed.is_some(), "--seed is required for random censoring");
    let kind = match a.kind {
        CensorKind::Topk => CensorType::TopK,
        CensorKind::Mar => CensorType::Mar,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed.unwrap_or(0));
    let (part, _) = ranking::censor(&rows, kind, &amount, &mut rng)?;
    let out = RankingDataset::new(part, data.item_labels().to_vec())?;
    write_bytes(a.io.output.as_deref(), &csv_bytes(|w| write_dataset(w, &out))?)
}

pub fn augment(a: &IoArgs) -> Result<()> {
    let data = load(&a.input)?;
    let sets = ranking::augment_all(data.rows())?;
    let mut row_labels = Vec::new();
    let mut matrix = Vec::new();
    for (i, set) in sets.iter().enumerate() {
        for r in set {
            row_labels.push((i + 1).to_string());
            matrix.push(r.ranks().to_vec());
        }
    }
    write_bytes(a.output.as_deref(), &csv_bytes(|w| write_matrix(w, "row", &row_labels, data.item_labels(), &matrix))?)
}

pub fn complete(a: &CompleteArgs) -> Result<()> {
    let data = load(&a.io.input)?;
    let n = data.n_items();
    let refs: Vec<Ranking> = match (&a.reference, &a.ranking) {
        (Some(p), None) => load(p)?.complete_rows()?,
        (None, Some(v)) => vec![parse_ranking(v, n)?],
        _ => bail!("give exactly one of --reference and --ranking"),
    };
    let refs = match refs.len() {
        1 => vec![refs[0].clone(); data.len()],
        k if k == data.len() => refs,
        k => bail!("{k} reference rankings for {} rows; give one or one per row", data.len()),
    };
    let out = ranking::complete(data.rows(), &refs)?;
    write_bytes(a.io.output.as_deref(), &csv_bytes(|w| write_rankings(w, data.item_labels(), &out))?)
}

pub fn dist(a: &DistArgs) -> Result<()> {
    let data = load(&a.io.input)?;
    let rows = data.complete_rows()?;
    let n = data.n_items();
    let scale = |d: u64| if a.relative { d as f64 / max_distance(n) as f64 } else { d as f64 };
    let (cols, matrix): (Vec<String>, Vec<Vec<f64>>) = match &a.rho {
        Some(v) => {
            let rho = parse_ranking(v, n)?;
            let m = rows.iter().map(|r| Ok(vec![scale(spear_dist(r, &rho)?)])).collect::<Result<_>>()?;
            (vec!["distance".into()], m)
        }
        None => {
            let m = spear_dist_matrix(&rows)?;
            (numbered(rows.len()), m.into_iter().map(|r| r.into_iter().map(scale).collect()).collect())
        }
    };
    write_bytes(a.io.output.as_deref(), &csv_bytes(|w| write_matrix(w, "row", &numbered(rows.len()), &cols, &matrix))?)
}

pub fn distr(a: &DistrArgs) -> Result<()> {
    ensure!(a.n >= 2, "--n must be at least 2");
    ensure!(a.theta >= 0.0 && a.theta.is_finite(), "--theta must be finite and >= 0");
    let dist = distance_distribution(a.n);
    if let Some(p) = &a.table {
        let mut s = String::from("d,log_N_d\n");
        for (d, l) in dist.distances.iter().zip(&dist.log_card) {
            s.push_str(&format!("{d},{l}\n"));
        }
        write_bytes(Some(p), s.as_bytes())?;
    }
    let m = dist.moments(a.theta);
    let result = json!({
        "n": a.n,
        "theta": a.theta,
        "exact": dist.exact,
        "max_distance": max_distance(a.n),
        "support_points": dist.distances.len(),
        "log_partition": m.log_z,
        "partition": m.log_z.exp(),
        "expected": m.mean,
        "log_expected": m.mean.ln(),
        "variance": m.variance,
        "log_variance": m.variance.ln(),
    });
    write_json(a.output.as_deref(), &envelope("distr", a, None, !dist.exact, result))
}

pub fn sample(a: &SampleArgs) -> Result<()> {
    let rho = match &a.rho {
        Some(p) => Some(load(p)?.complete_rows()?),
        None => None,
    };
    let opts = RmsmixOptions {
        rho,
        theta: a.theta.clone(),
        weights: a.weights.clone(),
        uniform: a.uniform,
        mh: a.mh || a.n_items > EXACT_SAMPLING_MAX_N,
        burn_in: a.burn_in,
        thin: a.thin,
        ..RmsmixOptions::new(a.size, a.n_items, a.n_clust)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let sim = rmsmix(&opts, &mut rng)?;
    let labels: Vec<String> = (1..=a.n_items).map(|i| format!("Item{i}")).collect();
    write_bytes(a.output.as_deref(), &csv_bytes(|w| write_rankings(w, &labels, &sim.samples))?)?;
    if let Some(p) = &a.params_output {
        let result = json!({
            "rho": sim.rho,
            "theta": sim.theta,
            "weights": sim.weights,
            "classification": sim.classification.iter().map(|c| c + 1).collect::<Vec<_>>(),
            "sampler": if opts.mh { "metropolis_hastings" } else { "exact" },
        });
        write_json(Some(p), &envelope("sample", a, Some(a.seed), false, result))?;
    }
    Ok(())
}

/// Whether the fit consumes random numbers (starting points or simulated completions).
fn is_random(data: &RankingDataset, s: &FitSettings) -> bool {
    s.n_clust > 1 || !data.is_complete()
}

fn fit_options(data: &RankingDataset, s: &FitSettings) -> Result<FitOptions> {
    if is_random(data, s) && s.n_start > 1 {
        ensure!(s.seed.is_some(), "--seed is required when fitting with random starts (n_start > 1)");
    }
    Ok(FitOptions {
        n_clust: s.n_clust,
        n_start: s.n_start,
        tol: s.tol,
        max_iter: s.max_iter,
        parallel: s.parallel,
        seed: s.seed.unwrap_or(0),
        mc_em: s.mc_em,
        kappa: s.kappa,
        ..FitOptions::default()
    })
}

fn fit_view(fit: &FitResult, data: &RankingDataset, opts: &FitOptions) -> Value {
    let labels = data.item_labels();
    let z: Vec<&[f64]> = (0..fit.n_obs).map(|i| fit.z_row(i)).collect();
    json!({
        "item_labels": labels,
        "n_items": fit.n_items,
        "n_obs": fit.n_obs,
        "n_clust": fit.params.n_clust(),
        "method": fit.method,
        "rho": fit.params.rho,
        "rho_ordering_labels": fit.params.rho.iter().map(|r| labelled_ordering(&r.to_ordering(), labels)).collect::<Vec<_>>(),
        "theta": fit.params.theta,
        "weights": fit.params.weights,
        "log_lik": fit.log_lik,
        "final_log_lik": fit.final_log_lik(),
        "bic": fit.bic,
        "bic_df": opts.bic_df.unwrap_or(bic_df(fit.params.n_clust(), fit.n_items)),
        "conv": fit.conv,
        "n_iter": fit.n_iter,
        "z_hat": z,
        "map_classification": fit.map_classification.iter().map(|c| c + 1).collect::<Vec<_>>(),
        "starts": fit.starts,
        "best_start": fit.best_start + 1,
        "warnings": fit.warnings,
        "borda_ties": fit.borda_ties,
    })
}

pub fn fit(a: &FitArgs) -> Result<()> {
    let data = load(&a.io.input)?;
    let opts = fit_options(&data, &a.fit)?;
    let fit = mixture::fit(&data, &opts)?;
    let mut result = fit_view(&fit, &data, &opts);
    if let Some(level) = a.conf_level {
        let theta = uncertainty::ci_theta_asymptotic(&fit, level)?;
        let weights = if fit.params.n_clust() > 1 { Some(uncertainty::ci_weights_hessian(&fit, level)?) } else { None };
        result["asymptotic"] = json!({
            "conf_level": level,
            "theta_ci": theta.theta_ci,
            "weights_se": weights.as_ref().and_then(|w| w.se.clone()),
            "weights_ci": weights.as_ref().and_then(|w| w.ci.clone()),
            "weights_singular": weights.as_ref().is_some_and(|w| w.singular),
        });
    }
    if let Some(p) = &a.z_csv {
        let z: Vec<Vec<f64>> = (0..fit.n_obs).map(|i| fit.z_row(i).to_vec()).collect();
        let cols: Vec<String> = (1..=fit.params.n_clust()).map(|g| format!("component{g}")).collect();
        write_bytes(Some(p), &csv_bytes(|w| write_matrix(w, "row", &numbered(fit.n_obs), &cols, &z))?)?;
    }
    let env = envelope("fit", a, a.fit.seed, data.n_items() > MAX_EXACT_N, result);
    write_json(a.io.output.as_deref(), &env)
}

pub fn bootstrap(a: &BootstrapArgs) -> Result<()> {
    let seed = a.fit.seed.context("--seed is required for bootstrap")?;
    let data = load(&a.io.input)?;
    let opts = fit_options(&data, &a.fit)?;
    let fit = mixture::fit(&data, &opts)?;
    let kind = match a.kind {
        None => BootstrapType::default_for(fit.params.n_clust()),
        Some(BootKind::Nonparametric) => BootstrapType::Nonparametric,
        Some(BootKind::Parametric) => BootstrapType::Parametric,
        Some(BootKind::Separated) => BootstrapType::Separated,
        Some(BootKind::Soft) => BootstrapType::Soft,
    };
    let bopts = BootstrapOptions {
        n_boot: a.n_boot,
        kind,
        n_start: a.fit.n_start,
        conf_level: a.conf_level,
        all: a.all,
        parallel: a.fit.parallel,
        seed: mix_seed(seed, 1),
        mc_em: a.fit.mc_em,
        kappa: a.fit.kappa,
        tol: a.fit.tol,
        max_iter: a.fit.max_iter,
    };
    let res = uncertainty::bootstrap(&fit, &data, &bopts)?;
    let labels = data.item_labels();
    if let Some(dir) = &a.marginals_dir {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        for (g, m) in res.marginals.iter().enumerate() {
            let p = dir.join(format!("marginals_component{}.csv", g + 1));
            write_bytes(Some(&p), &csv_bytes(|w| write_matrix(w, "rank", &numbered(labels.len()), labels, m))?)?;
        }
    }
    let result = json!({
        "type": res.kind,
        "n_boot": res.n_boot,
        "n_failed": res.n_failed,
        "conf_level": res.ci.conf_level,
        "fit": fit_view(&fit, &data, &opts),
        "theta_ci": res.ci.theta_ci,
        "weights_ci": res.ci.weights_ci,
        "rho_itemwise": res.ci.rho_itemwise,
        "marginals": res.marginals,
        "rho_samples": res.rho_samples,
        "theta_samples": res.theta_samples,
        "weights_samples": res.weights_samples,
    });
    write_json(a.io.output.as_deref(), &envelope("bootstrap", a, Some(seed), data.n_items() > MAX_EXACT_N, result))
}

pub fn bench(a: &BenchArgs) -> Result<()> {
    ensure!(a.reps >= 1 && a.size >= 1, "--reps and --size must be >= 1");
    let (g, default_n): (usize, Vec<usize>) = match a.protocol {
        Protocol::Table2 => (1, vec![5, 6, 7, 8, 9, 10, 15, 20, 50, 100]),
        Protocol::Table3 => (2, vec![5, 6, 7, 8, 9]),
    };
    let ns = a.n.clone().unwrap_or(default_n);
    let mut rows = Vec::new();
    println!("{:>5} {:>12} {:>12}", "n", "mean_s", "max_s");
    for &n in &ns {
        ensure!(n >= 2, "n must be at least 2");
        let mut times = Vec::with_capacity(a.reps);
        for r in 0..a.reps {
            let s = mix_seed(a.seed, (n * 1_000_003 + r) as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let opts = RmsmixOptions { mh: n > EXACT_SAMPLING_MAX_N, ..RmsmixOptions::new(a.size, n, g) };
            let data = RankingDataset::from_rankings(rmsmix(&opts, &mut rng)?.samples)?;
            let start = Instant::now();
            if g == 1 {
                fit_mms(&data)?;
            } else {
                mixture::fit(&data, &FitOptions { n_clust: g, n_start: a.n_start, seed: s, ..FitOptions::default() })?;
            }
            times.push(start.elapsed().as_secs_f64());
        }
        let mean = times.iter().sum::<f64>() / times.len() as f64;
        let max = times.iter().cloned().fold(0.0, f64::max);
        println!("{n:>5} {mean:>12.6} {max:>12.6}");
        rows.push(json!({ "n": n, "mean_seconds": mean, "max_seconds": max, "seconds": times }));
    }
    if let Some(p) = &a.output {
        let result = json!({ "protocol": a.protocol, "n_clust": g, "timings": rows });
        write_json(Some(p), &envelope("bench", a, Some(a.seed), ns.iter().any(|&n| n > MAX_EXACT_N), result))?;
    }
    Ok(())
}
