//! `spearmix` command-line interface.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(name = "spearmix", version, about = "Mixtures of Mallows models with Spearman distance")]
struct Cli {
    /// Worker threads for parallel multi-start and bootstrap (0 = all cores).
    #[arg(long, global = true, env = "SPEARMIX_THREADS", default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Switch rows between ranking and ordering format.
    Convert(IoArgs),
    /// Summary statistics, first-order marginals and pairwise comparisons.
    Describe(DescribeArgs),
    /// Censor complete rankings (top-k or missing at random).
    Censor(CensorArgs),
    /// List every complete ranking compatible with each partial row.
    Augment(IoArgs),
    /// Fill partial rows from reference rankings.
    Complete(CompleteArgs),
    /// Spearman distances between rankings.
    Dist(DistArgs),
    /// Distribution of the Spearman distance under uniformity.
    Distr(DistrArgs),
    /// Simulate from a mixture of Mallows models.
    Sample(SampleArgs),
    /// Maximum-likelihood fit of a mixture.
    Fit(FitArgs),
    /// Bootstrap confidence intervals for a fitted mixture.
    Bootstrap(BootstrapArgs),
    /// Timing benchmark on synthetic data.
    Bench(BenchArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct IoArgs {
    /// Input CSV (header of item labels, NA for missing entries).
    #[arg(short, long)]
    pub input: PathBuf,
    /// Output file; stdout when omitted.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct DescribeArgs {
    #[command(flatten)]
    pub io: IoArgs,
    /// 1-based rows to summarize, e.g. `1,4,5`.
    #[arg(long, value_delimiter = ',')]
    pub subset: Option<Vec<usize>>,
    /// Write first-order marginals (rank × item) as CSV.
    #[arg(long)]
    pub marginals_csv: Option<PathBuf>,
    /// Write pairwise comparison counts (item × item) as CSV.
    #[arg(long)]
    pub pairwise_csv: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CensorKind {
    Topk,
    Mar,
}

#[derive(Args, Debug, Serialize)]
pub struct CensorArgs {
    #[command(flatten)]
    pub io: IoArgs,
    #[arg(long = "type", value_enum)]
    pub kind: CensorKind,
    /// Positions kept: one value for every row, or one per row.
    #[arg(long, value_delimiter = ',', conflicts_with = "probs")]
    pub nranked: Option<Vec<usize>>,
    /// Relative probabilities of keeping 1, ..., n-1 positions.
    #[arg(long, value_delimiter = ',')]
    pub probs: Option<Vec<f64>>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Debug, Serialize)]
pub struct CompleteArgs {
    #[command(flatten)]
    pub io: IoArgs,
    /// CSV of reference rankings: one row for all, or one per input row.
    #[arg(long, conflicts_with = "ranking")]
    pub reference: Option<PathBuf>,
    /// A single reference ranking, e.g. `1,2,3,4,5`.
    #[arg(long, value_delimiter = ',')]
    pub ranking: Option<Vec<usize>>,
}

#[derive(Args, Debug, Serialize)]
pub struct DistArgs {
    #[command(flatten)]
    pub io: IoArgs,
    /// Distances to this ranking instead of the pairwise matrix.
    #[arg(long, value_delimiter = ',')]
    pub rho: Option<Vec<usize>>,
    /// Divide by the maximum distance.
    #[arg(long)]
    pub relative: bool,
}

#[derive(Args, Debug, Serialize)]
pub struct DistrArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0.0)]
    pub theta: f64,
    /// Write the `(d, log N_d)` table as CSV.
    #[arg(long)]
    pub table: Option<PathBuf>,
    /// JSON summary; stdout when omitted.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct SampleArgs {
    #[arg(long)]
    pub n_items: usize,
    #[arg(long, default_value_t = 1)]
    pub n_clust: usize,
    #[arg(long)]
    pub size: usize,
    #[arg(long)]
    pub seed: u64,
    /// CSV with one consensus ranking per component.
    #[arg(long)]
    pub rho: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    pub theta: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub weights: Option<Vec<f64>>,
    /// Draw consensus rankings and weights uniformly instead of well separated.
    #[arg(long)]
    pub uniform: bool,
    /// Use the Metropolis-Hastings sampler (default for n > 10).
    #[arg(long)]
    pub mh: bool,
    #[arg(long)]
    pub burn_in: Option<usize>,
    #[arg(long)]
    pub thin: Option<usize>,
    /// Simulated rankings as CSV; stdout when omitted.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// JSON with the generating parameters and true classification.
    #[arg(long)]
    pub params_output: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize, Clone)]
pub struct FitSettings {
    #[arg(long, default_value_t = 1)]
    pub n_clust: usize,
    #[arg(long, default_value_t = 10)]
    pub n_start: usize,
    #[arg(long, default_value_t = 200)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// Monte Carlo EM for partial rankings instead of augmentation.
    #[arg(long)]
    pub mc_em: bool,
    #[arg(long, default_value_t = 1.0)]
    pub kappa: f64,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Run starts (or replicates) on the thread pool.
    #[arg(long)]
    #[serde(skip)]
    pub parallel: bool,
}

#[derive(Args, Debug, Serialize)]
pub struct FitArgs {
    #[command(flatten)]
    pub io: IoArgs,
    #[command(flatten)]
    pub fit: FitSettings,
    /// Add asymptotic intervals for θ (and weight standard errors) at this level.
    #[arg(long)]
    pub conf_level: Option<f64>,
    /// Write posterior memberships as CSV.
    #[arg(long)]
    pub z_csv: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BootKind {
    Nonparametric,
    Parametric,
    Separated,
    Soft,
}

#[derive(Args, Debug, Serialize)]
pub struct BootstrapArgs {
    #[command(flatten)]
    pub io: IoArgs,
    #[command(flatten)]
    pub fit: FitSettings,
    #[arg(long, default_value_t = 50)]
    pub n_boot: usize,
    /// Nonparametric for one component, soft otherwise.
    #[arg(long = "type", value_enum)]
    pub kind: Option<BootKind>,
    #[arg(long, default_value_t = 0.95)]
    pub conf_level: f64,
    /// Include every replicate estimate in the output.
    #[arg(long)]
    pub all: bool,
    /// Directory for per-component marginal CSVs.
    #[arg(long)]
    pub marginals_dir: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Protocol {
    /// One-component fits of N=100 full rankings.
    Table2,
    /// Two-component fits of N=100 full rankings.
    Table3,
}

#[derive(Args, Debug, Serialize)]
pub struct BenchArgs {
    #[arg(long, value_enum)]
    pub protocol: Protocol,
    /// Numbers of items; protocol defaults when omitted.
    #[arg(long, value_delimiter = ',')]
    pub n: Option<Vec<usize>>,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 100)]
    pub size: usize,
    /// Replications averaged per setting.
    #[arg(long, default_value_t = 10)]
    pub reps: usize,
    #[arg(long, default_value_t = 10)]
    pub n_start: usize,
    /// JSON with the timings.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

fn run(cli: Cli) -> anyhow::Result<()> {
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global()?;
    }
    match cli.command {
        Command::Convert(a) => commands::convert(&a),
        Command::Describe(a) => commands::describe(&a),
        Command::Censor(a) => commands::censor(&a),
        Command::Augment(a) => commands::augment(&a),
        Command::Complete(a) => commands::complete(&a),
        Command::Dist(a) => commands::dist(&a),
        Command::Distr(a) => commands::distr(&a),
        Command::Sample(a) => commands::sample(&a),
        Command::Fit(a) => commands::fit(&a),
        Command::Bootstrap(a) => commands::bootstrap(&a),
        Command::Bench(a) => commands::bench(&a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = format!("{e:#}").replace('\n', " ");
            eprintln!("spearmix: error: {msg}");
            ExitCode::FAILURE
        }
    }
}
