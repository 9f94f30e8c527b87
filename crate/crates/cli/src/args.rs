use std::path::PathBuf;

use autotsf::data::{SeriesKind, SplitMode};
use autotsf::learners::{LearnerFamily, OptimizerKind, Reduction};
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "autotsf", version, about = "Few-shot forecasting pipeline search")]
pub struct Cli {
    /// Master seed; required by generate, search and train.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    /// JSON file of defaults; explicit flags take precedence.
    #[arg(long, global = true, value_name = "JSON")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write synthetic source and target series as CSV.
    Generate(GenerateArgs),
    /// Search pipeline configurations with MCTS.
    Search(SearchArgs),
    /// Train one pipeline with explicit hyper-parameters.
    Train(TrainArgs),
    /// Forecast the target's test horizon with a trained model.
    Predict(PredictArgs),
    /// Compare per-seed test errors across result directories.
    Compare(CompareArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Generate(_) => "generate",
            Command::Search(_) => "search",
            Command::Train(_) => "train",
            Command::Predict(_) => "predict",
            Command::Compare(_) => "compare",
        }
    }
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub kind: Option<SeriesKind>,
    /// Number of source tasks; one more series is written as the target.
    #[arg(long)]
    pub n_train: Option<usize>,
    #[arg(long)]
    pub hours: Option<usize>,
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Directory holding `train_*.csv` and `target.csv`.
    #[arg(long, default_value = ".")]
    pub data: PathBuf,
    /// Input window length.
    #[arg(long)]
    pub window: Option<usize>,
    #[arg(long)]
    pub split: Option<SplitMode>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub meta_iterations: Option<usize>,
    /// Fine-tuning gradient steps on the validation slice.
    #[arg(long, visible_alias = "n-g")]
    pub finetune_steps: Option<usize>,
    #[arg(long)]
    pub tasks_per_batch: Option<usize>,
    /// Pairs sampled per support and query set.
    #[arg(long)]
    pub shots: Option<usize>,
    #[arg(long)]
    pub inner_steps: Option<usize>,
    #[arg(long)]
    pub reduction: Option<Reduction>,
    /// Record evaluation wall time (makes outputs run-dependent).
    #[arg(long)]
    pub record_wall_time: bool,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub eval: EvalArgs,
    #[arg(long)]
    pub family: Option<LearnerFamily>,
    #[arg(long)]
    pub budget: Option<usize>,
    /// Points per learning-rate grid.
    #[arg(long)]
    pub grid_resolution: Option<usize>,
    #[arg(long)]
    pub kappa: Option<f64>,
    #[arg(long)]
    pub c_uct: Option<f64>,
    /// Adds a shots level with these options.
    #[arg(long, value_delimiter = ',')]
    pub search_shots: Option<Vec<usize>>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub eval: EvalArgs,
    #[arg(long)]
    pub family: Option<LearnerFamily>,
    #[arg(long)]
    pub width: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub optimizer: Option<OptimizerKind>,
    /// Take the best configuration from a search `summary.json`.
    #[arg(long, conflicts_with_all = ["family", "width", "alpha", "beta", "gamma", "optimizer"])]
    pub pipeline: Option<PathBuf>,
    /// Train from scratch on the target validation slice only.
    #[arg(long)]
    pub vanilla: bool,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    /// Directory written by `train`.
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, default_value = ".")]
    pub data: PathBuf,
    #[arg(long)]
    pub horizon: Option<usize>,
    /// Feed forecasts back as inputs instead of using observed lags.
    #[arg(long)]
    pub recursive: bool,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Result directories, scanned recursively for `report.json` and `summary.json`.
    #[arg(required = true, num_args = 2..)]
    pub dirs: Vec<PathBuf>,
}

/// Defaults read from `--config`.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub kind: Option<SeriesKind>,
    pub n_train: Option<usize>,
    pub hours: Option<usize>,
    pub window: Option<usize>,
    pub split: Option<SplitMode>,
    pub family: Option<LearnerFamily>,
    pub budget: Option<usize>,
    pub grid_resolution: Option<usize>,
    pub kappa: Option<f64>,
    pub c_uct: Option<f64>,
    pub search_shots: Option<Vec<usize>>,
    pub width: Option<usize>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
    pub optimizer: Option<OptimizerKind>,
    pub meta_iterations: Option<usize>,
    pub finetune_steps: Option<usize>,
    pub tasks_per_batch: Option<usize>,
    pub shots: Option<usize>,
    pub inner_steps: Option<usize>,
    pub reduction: Option<Reduction>,
    pub horizon: Option<usize>,
}

impl FileConfig {
    pub fn load(path: Option<&PathBuf>) -> CliResult<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
    }
}
