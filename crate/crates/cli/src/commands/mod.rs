mod compare;
mod generate;
mod predict;
mod search;
mod train;

use autotsf::data::{build_bundle, BundleOptions, DataBundle, DEFAULT_TEST_HORIZON, DEFAULT_WINDOW};
use autotsf::meta::EvalSettings;

use crate::args::{Cli, Command, DataArgs, EvalArgs, FileConfig};
use crate::error::{CliError, CliResult};
use crate::io::load_data_dir;

pub fn run(cli: &Cli) -> CliResult<()> {
    let file = FileConfig::load(cli.config.as_ref())?;
    match &cli.command {
        Command::Generate(a) => generate::run(cli, &file, a),
        Command::Search(a) => search::run(cli, &file, a),
        Command::Train(a) => train::run(cli, &file, a),
        Command::Predict(a) => predict::run(cli, &file, a),
        Command::Compare(a) => compare::run(cli, a),
    }
}

pub(crate) fn require_seed(cli: &Cli) -> CliResult<u64> {
    cli.seed
        .ok_or_else(|| CliError::usage(format!("`{}` requires an explicit --seed", cli.command.name())))
}

pub(crate) fn eval_settings(a: &EvalArgs, file: &FileConfig) -> EvalSettings {
    let d = EvalSettings::default();
    EvalSettings {
        tasks_per_batch: a.tasks_per_batch.or(file.tasks_per_batch).unwrap_or(d.tasks_per_batch),
        shots: a.shots.or(file.shots).or(d.shots),
        meta_iterations: a.meta_iterations.or(file.meta_iterations).unwrap_or(d.meta_iterations),
        finetune_steps: a.finetune_steps.or(file.finetune_steps).unwrap_or(d.finetune_steps),
        inner_steps: a.inner_steps.or(file.inner_steps).unwrap_or(d.inner_steps),
        reduction: a.reduction.or(file.reduction).unwrap_or(d.reduction),
        record_wall_time: a.record_wall_time,
    }
}

pub(crate) fn bundle_options(a: &DataArgs, file: &FileConfig, seed: u64) -> BundleOptions {
    BundleOptions {
        window: a.window.or(file.window).unwrap_or(DEFAULT_WINDOW),
        test_horizon: DEFAULT_TEST_HORIZON,
        split: a.split.or(file.split).unwrap_or_default(),
        seed,
    }
}

pub(crate) fn load_bundle(a: &DataArgs, file: &FileConfig, seed: u64) -> CliResult<DataBundle<f64>> {
    let (train, target) = load_data_dir(&a.data)?;
    Ok(build_bundle(&train, &target, &bundle_options(a, file, seed))?)
}
