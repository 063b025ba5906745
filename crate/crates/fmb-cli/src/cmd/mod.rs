//! The `fmb` command-line surface: design -> run -> fit -> predict -> report.

pub mod design;
pub mod fit;
pub mod predict;
pub mod report;
pub mod run;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "fmb",
    version,
    about = "Featuremetric benchmarking of quantum computers: design experiments, execute them on a noisy stabilizer simulator (or replay device data), estimate capabilities, and fit predictive capability models."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Create an experiment design (grid or Sobol feature vectors)
    Design(DesignArgs),
    /// Sample circuits for a design, execute them, and estimate capabilities
    Run(RunArgs),
    /// Fit regular or monotonic GP capability models
    Fit(FitArgs),
    /// Evaluate a fitted model at feature vectors or on a 2-D grid
    Predict(PredictArgs),
    /// Emit analysis reports (monotonicity, estimates, volumetric tables)
    Report(ReportArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Grid,
    Sobol,
}

#[derive(Args)]
pub struct DesignArgs {
    /// Feature axis spec, name:scale:kind:min:max (e.g. w:log2:int:2:27,
    /// xi2q:linear:real:0:0.5); repeat per axis
    #[arg(long = "axis", required = true)]
    pub axes: Vec<String>,
    /// Explicit grid values per axis, name=v1,v2,... or name=a..b
    /// (defaults: powers of two for log2 axes, consecutive integers for
    /// linear integer axes)
    #[arg(long = "values")]
    pub values: Vec<String>,
    #[arg(long, value_enum)]
    pub method: MethodArg,
    /// Number of Sobol feature vectors
    #[arg(long, default_value_t = 64)]
    pub m: usize,
    /// Circuits per feature vector
    #[arg(long)]
    pub k: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Exclude grid points whose width * depth exceeds this product
    #[arg(long = "max-wd")]
    pub max_wd: Option<f64>,
    /// Output design file (JSON)
    #[arg(short, long)]
    pub output: PathBuf,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendArg {
    Noiseless,
    Noisy,
    Replay,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EstimatorArg {
    SuccessProb,
    Srdfe,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Mirror,
    FixedDensity,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConnectivityArg {
    Line,
    Full,
}

#[derive(Args)]
pub struct RunArgs {
    #[arg(long)]
    pub design: PathBuf,
    #[arg(long, value_enum)]
    pub backend: BackendArg,
    /// Calibration CSV (required for the noisy backend)
    #[arg(long)]
    pub calibration: Option<PathBuf>,
    /// Stored counts CSV (required for the replay backend)
    #[arg(long)]
    pub counts: Option<PathBuf>,
    #[arg(long)]
    pub shots: u64,
    #[arg(long, value_enum, default_value = "success-prob")]
    pub estimator: EstimatorArg,
    /// Circuit family (defaults: mirror for success-prob, fixed-density for
    /// srdfe)
    #[arg(long = "circuits", value_enum)]
    pub family: Option<FamilyArg>,
    /// Two-qubit density pseudo-feature for designs without a density axis
    #[arg(long, default_value_t = 0.25)]
    pub xi: f64,
    /// Connectivity for simulator backends without calibration (defaults:
    /// line for mirror, full for fixed-density)
    #[arg(long, value_enum)]
    pub connectivity: Option<ConnectivityArg>,
    #[arg(long)]
    pub seed: u64,
    /// Fail (exit 4) when any feature vector is infeasible instead of
    /// recording error entries
    #[arg(long)]
    pub strict: bool,
    /// Also write per-execution outcome histograms
    #[arg(long = "emit-counts")]
    pub emit_counts: Option<PathBuf>,
    /// Also write the executed circuits as a batch file
    #[arg(long = "emit-batch")]
    pub emit_batch: Option<PathBuf>,
    /// Worker threads (default: RAYON_NUM_THREADS or all cores)
    #[arg(long)]
    pub threads: Option<usize>,
    /// Output results file (CSV)
    #[arg(short, long)]
    pub output: PathBuf,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Args)]
pub struct FitArgs {
    #[arg(long)]
    pub design: PathBuf,
    #[arg(long)]
    pub results: PathBuf,
    /// Fit the monotonicity-constrained (EP) variant
    #[arg(long)]
    pub monotonic: bool,
    /// Virtual derivative-constraint points for the monotonic variant
    #[arg(long = "virtual-points", default_value_t = 30)]
    pub virtual_points: usize,
    /// Probit sharpness for the monotonic variant
    #[arg(long, default_value_t = 1e-6)]
    pub nu: f64,
    /// Training fraction; the rest becomes held-out test data
    #[arg(long = "train-frac")]
    pub train_frac: Option<f64>,
    /// Repeated random-split instances (the prediction-error protocol)
    #[arg(long, default_value_t = 1)]
    pub instances: usize,
    /// Hyperparameter-optimizer restarts
    #[arg(long, default_value_t = 10)]
    pub restarts: usize,
    /// Re-select hyperparameters of the monotonic variant by its EP
    /// marginal-likelihood approximation instead of reusing the regular fit
    #[arg(long)]
    pub reoptimize: bool,
    /// Write the model even when EP did not converge
    #[arg(long)]
    pub force: bool,
    #[arg(long)]
    pub seed: u64,
    /// Output model file (JSON)
    #[arg(short, long)]
    pub output: PathBuf,
    /// Per-instance delta_abs summary (CSV; with --instances > 1)
    #[arg(long)]
    pub summary: Option<PathBuf>,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Two grid specs name:min:max:count for a heatmap (e.g.
    /// --grid w:2:27:26 d:4:4096:11)
    #[arg(long = "grid", num_args = 2)]
    pub grid: Vec<String>,
    /// Fixed values name=value for axes outside the grid
    #[arg(long = "fix")]
    pub fixed: Vec<String>,
    /// Evaluate at the feature vectors of this design file instead
    #[arg(long = "at")]
    pub at: Option<PathBuf>,
    #[arg(short, long)]
    pub output: PathBuf,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MetricArg {
    /// Per-vector monotonicity metric (full set and projections)
    DeltaV,
    /// Per-circuit estimates for distribution plots
    Estimates,
    /// Per-vector means and standard errors
    Volumetric,
}

#[derive(Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub design: PathBuf,
    #[arg(long)]
    pub results: PathBuf,
    #[arg(long, value_enum)]
    pub metric: MetricArg,
    /// For delta-v: drop this axis and report only that projection
    #[arg(long)]
    pub project: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(short, long)]
    pub output: PathBuf,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}
