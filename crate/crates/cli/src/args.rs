use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "relu3d", version, about = "Build, evaluate and verify height-augmented ReLU networks")]
pub struct Cli {
    /// Seed for randomized inputs.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build a network and write it together with `<out>.report.json`.
    Build {
        #[command(flatten)]
        build: BuildArgs,
        #[arg(short = 'o', long = "out")]
        out: PathBuf,
    },
    /// Evaluate a network at the given point, a file of points or random points.
    Eval {
        net: PathBuf,
        /// Coordinates of one point.
        #[arg(allow_negative_numbers = true)]
        coords: Vec<f64>,
        /// File with one point per line, coordinates separated by commas or spaces.
        #[arg(long)]
        points: Option<PathBuf>,
        /// Number of uniform random points in [lo, hi]^d.
        #[arg(long)]
        random: Option<usize>,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        lo: f64,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        hi: f64,
    },
    /// Measure the error of a network against a target and check its bound.
    Verify {
        net: PathBuf,
        #[command(flatten)]
        target: TargetArgs,
        #[command(flatten)]
        measure: MeasureArgs,
        /// Bound to check; defaults to the one in the build report.
        #[arg(long)]
        bound: Option<f64>,
        /// Support half-width for Gaussian L² checks.
        #[arg(long = "M")]
        half_width: Option<f64>,
        /// Where to write the error report (default `<net>.verify.json`).
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Build and measure over a range of one parameter; writes CSV.
    Sweep {
        #[command(flatten)]
        build: BuildArgs,
        #[command(flatten)]
        measure: MeasureArgs,
        /// Parameter to vary (N, H, N1, N2, r, k, d, delta, rho, p, M).
        #[arg(long)]
        param: String,
        /// `a..b` (integers, inclusive), `a..b:step` or a comma list.
        #[arg(long)]
        values: String,
        /// Fit the constant on this leading fraction of rows and check the rest.
        #[arg(long)]
        fit: Option<f64>,
        #[arg(short = 'o', long = "out")]
        out: Option<PathBuf>,
    },
    /// Print width, depth, height and counts of a network.
    Size { net: PathBuf },
    /// Tabulate built sizes and errors next to the height-one baselines; writes CSV.
    Table1 {
        /// JSON array of row configurations; defaults to the polynomial and
        /// analytic-cube rows.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(short = 'o', long = "out")]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug, Clone, Default)]
pub struct TargetArgs {
    /// Catalog id of the target (square, identity, reciprocal-shift, ...).
    #[arg(long)]
    pub target: Option<String>,
    /// JSON parameters of the catalog entry, e.g. '{"a":2}'.
    #[arg(long = "target-params")]
    pub target_params: Option<String>,
    /// Full target document in JSON.
    #[arg(long = "target-file", conflicts_with = "target")]
    pub target_file: Option<PathBuf>,
    /// unit, sym[:a], shifted:lo:hi or gauss.
    #[arg(long)]
    pub domain: Option<String>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct MeasureArgs {
    /// sup, l1, l2, lp:P or gauss-l2.
    #[arg(long)]
    pub norm: Option<String>,
    /// Grid points or quadrature nodes per dimension.
    #[arg(long)]
    pub resolution: Option<usize>,
    #[arg(long = "domain-lo", allow_negative_numbers = true, requires = "domain_hi")]
    pub domain_lo: Option<f64>,
    #[arg(long = "domain-hi", allow_negative_numbers = true, requires = "domain_lo")]
    pub domain_hi: Option<f64>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct BuildArgs {
    #[arg(long)]
    pub theorem: Option<String>,
    /// Build document: {"theorem_id", "target", "params"}; flags override it.
    #[arg(long)]
    pub params: Option<PathBuf>,
    #[command(flatten)]
    pub target: TargetArgs,
    /// Polynomial coefficients a_0,a_1,...
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub coeffs: Option<Vec<f64>>,
    #[arg(long = "N")]
    pub n: Option<usize>,
    #[arg(long = "H")]
    pub h: Option<usize>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub beta: Option<Vec<f64>>,
    #[arg(long)]
    pub r: Option<usize>,
    #[arg(long = "N1")]
    pub n1: Option<usize>,
    #[arg(long = "N2")]
    pub n2: Option<usize>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    /// cos or sin.
    #[arg(long)]
    pub kind: Option<String>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long = "M")]
    pub half_width: Option<f64>,
    #[arg(long = "width-cap")]
    pub width_cap: Option<usize>,
}
