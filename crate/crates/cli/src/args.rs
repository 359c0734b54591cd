use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use lcnorm::{ClaimId, Exponent, SearchFamily};

/// Norms, moments and entropies of log-concave densities, and numerical
/// checks of the inequalities relating them.
#[derive(Debug, Parser)]
#[command(name = "lcnorm", version, about)]
pub struct Cli {
    /// Log more (repeat for more detail). `RUST_LOG` overrides.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the constants C_α, D_α, C(n) and D(n).
    Constants(ConstantsArgs),
    /// Evaluate functionals of one density.
    Eval(EvalArgs),
    /// Check inequalities over densities and a parameter grid.
    Check(CheckArgs),
    /// Search a density family for the largest tightness ratio.
    Search(SearchArgs),
    /// Tightness of one claim over a parameter grid for one density.
    Scan(ScanArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutFormat {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct Output {
    /// Report format.
    #[arg(long = "out", value_enum)]
    pub format: Option<OutFormat>,

    /// Write the report here instead of stdout.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Replay {
    /// Write the run manifest to this file.
    #[arg(long, value_name = "FILE")]
    pub manifest: Option<PathBuf>,

    /// Re-run the manifest in FILE; input flags are ignored.
    #[arg(long, value_name = "FILE")]
    pub replay: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ConstantsArgs {
    /// Moment orders α (at least 1).
    #[arg(long, num_args = 1.., value_delimiter = ',', default_values_t = vec![1.0, 1.5, 2.0, 3.0, 4.0])]
    pub alpha: Vec<f64>,

    /// Dimensions n (at least 2).
    #[arg(long, num_args = 1.., value_delimiter = ',', default_values_t = vec![2, 3, 4])]
    pub n: Vec<usize>,

    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Closed form or exact segment sums when available, else adaptive quadrature.
    Auto,
    Adaptive,
    Riemann,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Density: a JSON spec file, inline JSON, or `family:key=value,...`.
    pub density: String,

    /// L^p norms (`inf` for the supremum).
    #[arg(long, num_args = 1.., value_delimiter = ',')]
    pub lp: Vec<Exponent>,

    /// Moment norms σ_α.
    #[arg(long, num_args = 1.., value_delimiter = ',')]
    pub sigma: Vec<f64>,

    /// Rényi entropies h_p (p > 1 or `inf`).
    #[arg(long, num_args = 1.., value_delimiter = ',')]
    pub renyi: Vec<Exponent>,

    /// Differential entropy.
    #[arg(long)]
    pub entropy: bool,

    /// Supremum of the density.
    #[arg(long)]
    pub supnorm: bool,

    #[arg(long)]
    pub mean: bool,

    #[arg(long, value_enum, default_value_t = Method::Auto)]
    pub method: Method,

    /// Grid points for `--method riemann`.
    #[arg(long, default_value_t = lcnorm::functionals::riemann::DEFAULT_POINTS)]
    pub points: usize,

    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NdFamily {
    /// Standard and correlated gaussians.
    GaussianNd,
    /// Products of catalog densities, plain and under random affine maps.
    Product,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    /// Density specs (files, inline JSON, or `family:key=value,...`).
    pub densities: Vec<String>,

    /// Include the built-in catalog (6 families, 3 members each).
    #[arg(long)]
    pub catalog: bool,

    /// Add N generated piecewise log-linear densities.
    #[arg(long, value_name = "N")]
    pub random: Option<usize>,

    /// Seed for generated densities and multivariate transforms.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Claims and groups (all, all-1d, all-nd, corollary1, corollary2, or wire names).
    #[arg(long, value_delimiter = ',')]
    pub claims: Option<Vec<String>>,

    /// Use the variance-only constants where a claim has them.
    #[arg(long)]
    pub tightened: bool,

    #[arg(long, num_args = 1.., value_delimiter = ',')]
    pub p: Option<Vec<Exponent>>,

    #[arg(long, num_args = 1.., value_delimiter = ',')]
    pub q: Option<Vec<Exponent>>,

    #[arg(long, num_args = 1.., value_delimiter = ',')]
    pub alpha: Option<Vec<f64>>,

    /// Multivariate test families.
    #[arg(long, value_enum, num_args = 1.., value_delimiter = ',')]
    pub family: Vec<NdFamily>,

    /// Dimensions for the multivariate families.
    #[arg(long, num_args = 1.., value_delimiter = ',', default_values_t = vec![2, 3])]
    pub n: Vec<usize>,

    /// Single verdict tolerance instead of the per-verdict default.
    #[arg(long)]
    pub tol: Option<f64>,

    #[command(flatten)]
    pub replay: Replay,

    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    /// Claim to maximize (wire name, e.g. `lemma4`).
    pub claim: Option<ClaimId>,

    /// exponential, gaussian, laplace, logistic, uniform, gamma, pll<k> or catalog.
    #[arg(long, default_value = "catalog")]
    pub family: SearchFamily,

    #[arg(long, default_value = "2")]
    pub p: Exponent,

    #[arg(long, default_value = "1")]
    pub q: Exponent,

    #[arg(long, default_value_t = 2.0)]
    pub alpha: f64,

    /// Objective evaluations per restart.
    #[arg(long, default_value_t = 2000)]
    pub budget: usize,

    #[arg(long, default_value_t = 8)]
    pub restarts: usize,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Ratios above 1 + tol are reported as counterexamples.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,

    /// Write the best density as a JSON spec here.
    #[arg(long, value_name = "FILE")]
    pub witness: Option<PathBuf>,

    #[command(flatten)]
    pub replay: Replay,

    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    /// Claim to tabulate.
    pub claim: Option<ClaimId>,

    /// Density spec.
    pub density: Option<String>,

    #[arg(long, num_args = 1.., value_delimiter = ',', default_values = ["1", "2", "inf"])]
    pub p: Vec<Exponent>,

    #[arg(long, num_args = 1.., value_delimiter = ',', default_values = ["1", "2", "inf"])]
    pub q: Vec<Exponent>,

    #[arg(long, num_args = 1.., value_delimiter = ',', default_values_t = vec![2.0])]
    pub alpha: Vec<f64>,

    #[command(flatten)]
    pub replay: Replay,

    #[command(flatten)]
    pub output: Output,
}
