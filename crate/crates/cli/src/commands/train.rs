use std::fmt::Write as _;

use autotsf::data::Normalization;
use autotsf::learners::{checkpoint, LearnerFamily, LearnerSpec};
use autotsf::meta::{run_pipeline, run_vanilla, EvalSettings};
use autotsf::pipeline::PipelineConfig;
use autotsf::rng::{split, streams};
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::search::Summary;
use crate::args::{Cli, FileConfig, TrainArgs};
use crate::error::{CliError, CliResult};
use crate::io::{ensure_dir, read_json, write_json, write_manifest, write_text};

pub const THETA_HAT: &str = "theta_hat.bin";
pub const THETA_STAR: &str = "theta_star.bin";
pub const MODEL: &str = "model.json";

/// Contents of `model.json`.
#[derive(Debug, Serialize, Deserialize)]
pub struct ModelFile {
    pub seed: u64,
    pub vanilla: bool,
    pub spec: LearnerSpec,
    pub config: PipelineConfig,
    pub settings: EvalSettings,
    pub target_id: String,
    pub normalization: Option<Normalization<f64>>,
    pub val_mse: f64,
    pub test_mse: f64,
}

/// Contents of `report.json`.
#[derive(Debug, Serialize, Deserialize)]
pub struct Report {
    pub seed: u64,
    pub vanilla: bool,
    pub family: LearnerFamily,
    pub val_mse: f64,
    pub test_mse: f64,
}

fn pipeline_config(file: &FileConfig, a: &TrainArgs) -> CliResult<PipelineConfig> {
    if let Some(path) = &a.pipeline {
        let summary: Summary = read_json(path)?;
        return summary
            .best
            .ok_or_else(|| CliError::Data(format!("{}: search found no successful pipeline", path.display())));
    }
    let family = a.family.or(file.family).unwrap_or(LearnerFamily::Mlp);
    let d = PipelineConfig::fixed_default(family);
    let config = PipelineConfig::fixed(
        family,
        a.width.or(file.width).unwrap_or(d.width),
        a.alpha.or(file.alpha).unwrap_or(d.alpha),
        a.beta.or(file.beta).unwrap_or(d.beta),
        a.gamma.or(file.gamma).unwrap_or(d.gamma),
        a.optimizer.or(file.optimizer).unwrap_or(d.optimizer),
    );
    config.validate().map_err(|e| CliError::usage(e.to_string()))?;
    Ok(config)
}

pub fn run(cli: &Cli, file: &FileConfig, a: &TrainArgs) -> CliResult<()> {
    let seed = super::require_seed(cli)?;
    let config = pipeline_config(file, a)?;
    let settings = super::eval_settings(&a.eval, file);
    let bundle = super::load_bundle(&a.data, file, seed)?;
    let eval_seed = split(seed, streams::EVAL);
    let run = if a.vanilla {
        run_vanilla(&config, &bundle, &settings, eval_seed)?
    } else {
        run_pipeline(&config, &bundle, &settings, eval_seed)?
    };

    ensure_dir(&cli.out)?;
    checkpoint::save(cli.out.join(THETA_HAT), &run.spec, &run.result.theta_hat)?;
    checkpoint::save(cli.out.join(THETA_STAR), &run.spec, &run.result.theta_star)?;
    let mut curve = String::from("iteration,meta_loss\n");
    for (i, l) in &run.result.train_curve {
        let _ = writeln!(curve, "{i},{l}");
    }
    write_text(&cli.out.join("train_curve.csv"), &curve)?;
    write_json(
        &cli.out.join(MODEL),
        &ModelFile {
            seed,
            vanilla: a.vanilla,
            spec: run.spec,
            config: config.clone(),
            settings,
            target_id: bundle.target_id.clone(),
            normalization: bundle.target_normalization,
            val_mse: run.result.val_mse,
            test_mse: run.test_mse,
        },
    )?;
    write_json(
        &cli.out.join("report.json"),
        &Report {
            seed,
            vanilla: a.vanilla,
            family: config.family,
            val_mse: run.result.val_mse,
            test_mse: run.test_mse,
        },
    )?;
    write_manifest(&cli.out, "train", json!({ "seed": seed, "data": a.data.data }))
}
