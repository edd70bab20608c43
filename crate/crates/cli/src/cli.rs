//! Command-line interface definition.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "windcast",
    about = "Short-term wind speed forecasting for wind farm clusters",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a seeded synthetic cluster data file.
    Synth(SynthArgs),
    /// Denoise a complete cluster file with the weighted mean filter.
    Preprocess(PreprocessArgs),
    /// Fill missing values (MAA from a site's own history, or CCK from
    /// CPK-weighted neighbors).
    Impute(ImputeArgs),
    /// Train the multi-slice ensemble and write a model directory.
    Train(TrainArgs),
    /// Forecast with a trained model and write real-vs-predicted series.
    Predict(PredictArgs),
    /// Compute MAPE/MAE/RMSE for a predictions file.
    Evaluate(EvaluateArgs),
    /// Train 1..n-slice models and report metrics per slice count.
    AblateSlices(AblateArgs),
    /// Inject gaps into the test range, impute via MAA and CCK, and compare
    /// masked-range forecast metrics.
    MissingDataStudy(MissingDataArgs),
    /// Compare forecasts trained on WMF-denoised vs raw noisy synthetic data.
    DenoiseStudy(DenoiseArgs),
    /// Merge per-site `timestamp,value` files into one cluster data file.
    Convert(ConvertArgs),
}

#[derive(Debug, Args, Clone)]
pub struct CommonArgs {
    /// Experiment configuration file (TOML). Defaults apply when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Directory for generated outputs.
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Output cluster file.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 3)]
    pub sites: usize,
    #[arg(long, default_value_t = 10_000)]
    pub length: usize,
    /// Latent coupling in [0, 1]; higher means stronger pairwise KRCC.
    #[arg(long, default_value_t = 0.9)]
    pub strength: f64,
    /// Per-site independent noise level (m/s).
    #[arg(long, default_value_t = 0.1)]
    pub noise: f64,
    #[arg(long, default_value_t = 96)]
    pub samples_per_day: usize,
}

#[derive(Debug, Args)]
pub struct PreprocessArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Input cluster file (must be complete; impute first).
    #[arg(long)]
    pub data: PathBuf,
}

#[derive(Debug, Args)]
pub struct ImputeArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Input cluster file with missing values.
    #[arg(long)]
    pub data: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Complete cluster file to train on.
    #[arg(long)]
    pub data: PathBuf,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Model directory written by `train`.
    #[arg(long)]
    pub model: PathBuf,
    /// Complete cluster file to forecast.
    #[arg(long)]
    pub data: PathBuf,
    /// Forecast range: the chronological test split, validation split, or
    /// everything after the longest lookback.
    #[arg(long, default_value = "test", value_parser = ["test", "val", "all"])]
    pub range: String,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Predictions file written by `predict`.
    #[arg(long)]
    pub pred: PathBuf,
    /// Model label for the metrics row.
    #[arg(long, default_value = "lmu")]
    pub label: String,
    /// Slice count recorded in the metrics row.
    #[arg(long, default_value_t = 3)]
    pub slices: usize,
    /// Restrict the metrics to rows [mask-start, mask-start + mask-len).
    #[arg(long)]
    pub mask_start: Option<usize>,
    #[arg(long, requires = "mask_start")]
    pub mask_len: Option<usize>,
}

#[derive(Debug, Args)]
pub struct AblateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Complete cluster file to train on.
    #[arg(long)]
    pub data: PathBuf,
    /// Largest slice count to test (1..=n); defaults to model.slices.
    #[arg(long)]
    pub max_slices: Option<usize>,
}

#[derive(Debug, Args)]
pub struct MissingDataArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Complete cluster file; gaps are injected into its test range.
    #[arg(long)]
    pub data: PathBuf,
}

#[derive(Debug, Args)]
pub struct DenoiseArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Length of the self-generated synthetic series.
    #[arg(long, default_value_t = 4000)]
    pub length: usize,
    /// Signal-to-noise ratio (dB) of the injected white noise.
    #[arg(long, default_value_t = 10.0)]
    pub snr_db: f64,
}

#[derive(Debug, Args)]
pub struct ConvertArgs {
    /// Per-site `timestamp,value` files, one per site.
    #[arg(long, required = true, num_args = 1..)]
    pub inputs: Vec<PathBuf>,
    /// Site ids, one per input; defaults to the input file stems.
    #[arg(long, num_args = 1..)]
    pub ids: Vec<String>,
    /// Output cluster file.
    #[arg(long)]
    pub out: PathBuf,
}
