use std::fmt::Write as _;

use autotsf::data::{windows_from_values, DEFAULT_TEST_HORIZON};
use autotsf::learners::{checkpoint, predict};
use autotsf::Error;
use serde_json::json;

use super::train::{ModelFile, MODEL, THETA_STAR};
use crate::args::{Cli, FileConfig, PredictArgs};
use crate::error::{CliError, CliResult};
use crate::io::{ensure_dir, load_data_dir, read_json, write_manifest, write_text};

pub fn run(cli: &Cli, file: &FileConfig, a: &PredictArgs) -> CliResult<()> {
    let model: ModelFile = read_json(&a.model.join(MODEL))?;
    let (spec, theta) = checkpoint::load::<f64>(a.model.join(THETA_STAR))?;
    if spec != model.spec {
        return Err(Error::Version(format!(
            "checkpoint holds {spec:?} but {MODEL} describes {:?}",
            model.spec
        ))
        .into());
    }
    let horizon = a.horizon.or(file.horizon).unwrap_or(DEFAULT_TEST_HORIZON);
    if horizon == 0 {
        return Err(CliError::usage("--horizon must be at least 1"));
    }
    let (_, target) = load_data_dir(&a.data)?;
    let norm = model.normalization;
    let values: Vec<f64> = match norm {
        Some(n) => target.values.iter().map(|&v| n.apply(v)).collect(),
        None => target.values.clone(),
    };
    let w = spec.input_dim;
    let pairs = windows_from_values(&values, w)?;
    if pairs.len() < horizon {
        return Err(CliError::Data(format!(
            "target `{}` yields {} windows, fewer than the {horizon}-step horizon",
            target.task_id,
            pairs.len()
        )));
    }
    let start = values.len() - horizon;
    let mut history = values[..start].to_vec();
    let mut csv = String::from("step,index,forecast,actual\n");
    for step in 0..horizon {
        let x = if a.recursive {
            &history[history.len() - w..]
        } else {
            &values[start + step - w..start + step]
        };
        let y_hat = predict(&spec, &theta, x)?;
        history.push(y_hat);
        let _ = writeln!(
            csv,
            "{},{},{},{}",
            step + 1,
            start + step,
            norm.map_or(y_hat, |n| n.invert(y_hat)),
            target.values[start + step]
        );
    }
    ensure_dir(&cli.out)?;
    write_text(&cli.out.join("forecast.csv"), &csv)?;
    write_manifest(
        &cli.out,
        "predict",
        json!({ "model": a.model, "data": a.data, "horizon": horizon, "recursive": a.recursive }),
    )
}
