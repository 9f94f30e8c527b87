use std::fmt::Write as _;

use autotsf::learners::LearnerFamily;
use autotsf::pipeline::{EvaluationRecord, PipelineConfig};
use autotsf::search::{search, PipelineEvaluator, SearchSpace, DEFAULT_C_UCT, DEFAULT_GRID_RESOLUTION, DEFAULT_KAPPA};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::args::{Cli, FileConfig, SearchArgs};
use crate::error::{CliError, CliResult};
use crate::io::{ensure_dir, write_json, write_manifest, write_text};

/// Contents of `summary.json`.
#[derive(Debug, Serialize, Deserialize)]
pub struct Summary {
    pub seed: u64,
    pub family: LearnerFamily,
    pub budget: usize,
    pub failures: usize,
    pub best_iteration: Option<usize>,
    pub best: Option<PipelineConfig>,
    pub val_mse: Option<f64>,
    pub test_mse: Option<f64>,
}

pub fn run(cli: &Cli, file: &FileConfig, a: &SearchArgs) -> CliResult<()> {
    let seed = super::require_seed(cli)?;
    let family = a.family.or(file.family).unwrap_or(LearnerFamily::Mlp);
    let budget = a.budget.or(file.budget).unwrap_or(100);
    if budget == 0 {
        return Err(CliError::usage("--budget must be at least 1"));
    }
    let mut space = SearchSpace::build(
        family,
        a.grid_resolution.or(file.grid_resolution).unwrap_or(DEFAULT_GRID_RESOLUTION),
        a.kappa.or(file.kappa).unwrap_or(DEFAULT_KAPPA),
        a.c_uct.or(file.c_uct).unwrap_or(DEFAULT_C_UCT),
    )?;
    if let Some(shots) = a.search_shots.clone().or_else(|| file.search_shots.clone()) {
        space = space.with_shots(shots)?;
    }
    let settings = super::eval_settings(&a.eval, file);
    let bundle = super::load_bundle(&a.data, file, seed)?;

    let mut evaluator = PipelineEvaluator::new(&bundle, settings.clone());
    let outcome = search(&space, budget, seed, &mut evaluator)?;
    let records = &outcome.trajectory.records;

    ensure_dir(&cli.out)?;
    let mut jsonl = String::new();
    for r in records {
        jsonl.push_str(&r.to_json_line()?);
        jsonl.push('\n');
    }
    write_text(&cli.out.join("trajectory.jsonl"), &jsonl)?;
    write_text(&cli.out.join("plot.csv"), &plot_csv(records, &outcome.trajectory.best_so_far))?;

    let best = outcome.best.as_ref();
    let summary = Summary {
        seed,
        family,
        budget,
        failures: records.iter().filter(|r| r.objective().is_none()).count(),
        best_iteration: best.map(|r| r.iteration),
        best: best.map(|r| r.config.clone()),
        val_mse: best.and_then(|r| r.val_mse),
        test_mse: best.and_then(|r| r.test_mse),
    };
    write_json(&cli.out.join("summary.json"), &summary)?;
    write_manifest(
        &cli.out,
        "search",
        json!({ "seed": seed, "space": space, "settings": settings, "data": a.data.data }),
    )
}

fn plot_csv(records: &[EvaluationRecord], best: &[f64]) -> String {
    let mut out = String::from("iteration,best_so_far_mse,cumulative_wall_time_ms\n");
    let mut wall = 0u64;
    for (r, b) in records.iter().zip(best) {
        wall += r.wall_time_ms;
        let _ = writeln!(out, "{},{},{}", r.iteration, b, wall);
    }
    out
}
