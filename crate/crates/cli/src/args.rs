use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(
    name = "hjortic",
    version,
    about = "Annual liver-index time series: fitting, selection, monitoring, combination"
)]
pub struct Cli {
    /// Output directory for JSON summaries and CSV plot data.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,

    /// Random seed for simulation subcommands.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a regression model with autoregressive errors.
    Fit(FitArgs),
    /// Forecast means and standard deviations.
    Forecast(ForecastArgs),
    /// AIC/BIC tables and sequential score races.
    Select(SelectArgs),
    /// Focused information criterion over nested candidates.
    Fic(FicArgs),
    /// One-step prediction monitoring and MAE against a naive mean.
    Monitor(MonitorArgs),
    /// Likelihood monitoring bridge and break scan.
    Bridge(BridgeArgs),
    /// Augmented Dickey-Fuller unit-root test.
    Adf(AdfArgs),
    /// Kernel-smoothed rolling standard deviation.
    Rollsd(RollsdArgs),
    /// Conditional-mean reconstruction of missing years.
    Reconstruct(ModelArgs),
    /// Combine confidence distributions.
    Combine(CombineArgs),
    /// Gamma-margin copula for liver and fish weights.
    #[command(subcommand)]
    Copula(CopulaCommand),
    /// Local estimates of time-varying AR coefficients.
    Tvar(TvarArgs),
    /// Aggregate monthly temperatures to October-March winter means.
    KolaWinter(KolaArgs),
    /// Generate synthetic data.
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DataArgs {
    /// Year-indexed CSV input.
    #[arg(long)]
    pub input: PathBuf,

    #[arg(long, default_value = "year")]
    pub year_column: String,

    /// Response column.
    #[arg(long)]
    pub response: String,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ModelArgs {
    #[command(flatten)]
    pub data: DataArgs,

    /// Covariate as `name:lag`; repeatable.
    #[arg(long = "covariate", value_name = "NAME:LAG")]
    pub covariates: Vec<String>,

    #[arg(long, default_value_t = 1)]
    pub ar_order: usize,

    /// Include a linear trend in `year - 1980`.
    #[arg(long, overrides_with = "no_trend")]
    pub trend: bool,

    #[arg(long, overrides_with = "trend")]
    pub no_trend: bool,

    #[arg(long)]
    pub no_intercept: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FocusArgs {
    /// `pred:H`, `slope:Y1,Y2[,unscaled]` or `thresh:LEVEL,Y1,...`.
    #[arg(long)]
    pub focus: Option<String>,

    /// Threshold for a `thresh:` focus, a number or `mean`; the focus then
    /// lists only years, e.g. `--focus thresh:2013,2014 --threshold mean`.
    #[arg(long)]
    pub threshold: Option<String>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FitArgs {
    #[command(flatten)]
    pub model: ModelArgs,

    #[command(flatten)]
    pub focus: FocusArgs,

    /// Level of the reported focus interval.
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ForecastArgs {
    #[command(flatten)]
    pub model: ModelArgs,

    #[arg(long, default_value_t = 1)]
    pub horizon: usize,

    /// CSV with covariate values for the forecast years.
    #[arg(long)]
    pub future: Option<PathBuf>,

    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SelectArgs {
    #[command(flatten)]
    pub data: DataArgs,

    /// Candidate descriptor such as `ar2+trend+kola:1`; repeatable.
    #[arg(long = "candidate", value_name = "DESCRIPTOR")]
    pub candidates: Vec<String>,

    /// Use every submodel of this descriptor when no candidates are given.
    #[arg(long)]
    pub wide: Option<String>,

    /// Run a score race from this year.
    #[arg(long)]
    pub race_from: Option<i32>,

    /// Race baseline descriptor; defaults to the first candidate.
    #[arg(long)]
    pub baseline: Option<String>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FicArgs {
    #[command(flatten)]
    pub data: DataArgs,

    /// Wide model descriptor.
    #[arg(long)]
    pub wide: String,

    /// Candidate descriptor; repeatable. Defaults to every submodel of the wide model.
    #[arg(long = "candidate", value_name = "DESCRIPTOR")]
    pub candidates: Vec<String>,

    #[command(flatten)]
    pub focus: FocusArgs,

    #[arg(long)]
    pub future: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct MonitorArgs {
    #[command(flatten)]
    pub model: ModelArgs,

    /// First monitored year.
    #[arg(long)]
    pub start: i32,

    /// Years averaged by the naive predictor.
    #[arg(long, default_value_t = 3)]
    pub naive_window: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BridgeArgs {
    #[command(flatten)]
    pub model: ModelArgs,

    #[arg(long, default_value_t = hjortic::monitor::BRIDGE_BAND_95)]
    pub band: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct AdfArgs {
    #[command(flatten)]
    pub data: DataArgs,

    #[arg(long, default_value_t = 4)]
    pub max_lag: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RollsdArgs {
    #[command(flatten)]
    pub data: DataArgs,

    /// Kernel standard deviation in years.
    #[arg(long, default_value_t = hjortic::monitor::DEFAULT_BANDWIDTH)]
    pub bandwidth: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CombineArgs {
    /// Confidence distribution JSON file; repeatable.
    #[arg(long = "cd", value_name = "PATH")]
    pub cds: Vec<PathBuf>,

    /// Interval `LO,HI` turned into a normal confidence distribution; repeatable.
    #[arg(long = "interval", value_name = "LO,HI")]
    pub intervals: Vec<String>,

    /// Coverage of the `--interval` inputs.
    #[arg(long, default_value_t = 0.95)]
    pub interval_level: f64,

    /// Focus label for `--interval` inputs; defaults to the first `--cd` label, else `theta`.
    #[arg(long)]
    pub label: Option<String>,

    /// Level of the reported combined interval.
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,

    /// Points in the emitted confidence-curve grid.
    #[arg(long, default_value_t = 401)]
    pub grid_points: usize,
}

#[derive(Debug, Subcommand)]
pub enum CopulaCommand {
    /// Fit gamma margins and the normal-scores correlation.
    Fit(CopulaFitArgs),
    /// Simulate per-fish and bulk indices.
    Simulate(CopulaSimArgs),
    /// Regress simulated bulk on per-fish indices.
    Translate(CopulaSimArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CopulaFitArgs {
    /// Two-column CSV: liver_kg, fish_kg.
    #[arg(long)]
    pub pairs: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CopulaModelArgs {
    /// `a1,b1,a2,b2,rho` (shape/rate for liver, then fish).
    #[arg(long, conflicts_with = "model")]
    pub params: Option<String>,

    /// Model JSON as written by `copula fit`.
    #[arg(long)]
    pub model: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CopulaSimArgs {
    #[command(flatten)]
    pub model: CopulaModelArgs,

    #[arg(long, default_value_t = 1000)]
    pub n_fish: usize,

    #[arg(long, default_value_t = 5000)]
    pub n_reps: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TvarArgs {
    #[command(flatten)]
    pub data: DataArgs,

    #[arg(long, default_value_t = 2)]
    pub order: usize,

    /// Kernel sd as a fraction of the span.
    #[arg(long, default_value_t = hjortic::tvar::DEFAULT_BANDWIDTH)]
    pub bandwidth: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct KolaArgs {
    /// Monthly CSV: `year,month,value` or `year` plus twelve month columns.
    #[arg(long)]
    pub input: PathBuf,

    /// Value column in the long layout; defaults to the third column.
    #[arg(long)]
    pub value_column: Option<String>,

    /// Name of the output series.
    #[arg(long, default_value = "kola_winter")]
    pub name: String,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SynthArgs {
    /// `arK[+trend]` for a series or `copula` for weight pairs.
    #[arg(long)]
    pub model: String,

    #[arg(long)]
    pub n: usize,

    #[arg(long, default_value_t = 1859)]
    pub start_year: i32,

    #[arg(long, default_value = "z")]
    pub name: String,

    #[arg(long, default_value_t = 5.0)]
    pub intercept: f64,

    /// Trend slope per year.
    #[arg(long, default_value_t = 0.0)]
    pub slope: f64,

    /// AR coefficients `r1,r2,...`; defaults exist for orders 0 to 2.
    #[arg(long)]
    pub rho: Option<String>,

    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,

    /// Copula parameters `a1,b1,a2,b2,rho`.
    #[arg(long)]
    pub params: Option<String>,
}
