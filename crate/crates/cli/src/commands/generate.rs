use autotsf::data::{generate_with_params, save_csv, SeriesKind};
use serde_json::json;

use crate::args::{Cli, FileConfig, GenerateArgs};
use crate::error::CliResult;
use crate::io::{ensure_dir, write_manifest};

pub fn run(cli: &Cli, file: &FileConfig, a: &GenerateArgs) -> CliResult<()> {
    let seed = super::require_seed(cli)?;
    let kind = a.kind.or(file.kind).unwrap_or(SeriesKind::Wind);
    let n_train = a.n_train.or(file.n_train).unwrap_or(4);
    let hours = a.hours.or(file.hours).unwrap_or(168);
    let (series, params) = generate_with_params::<f64>(kind, n_train + 1, hours, seed)?;
    ensure_dir(&cli.out)?;
    let mut files = Vec::with_capacity(series.len());
    for (i, s) in series.iter().enumerate() {
        let name = if i < n_train {
            format!("train_{i}.csv")
        } else {
            "target.csv".to_string()
        };
        save_csv(cli.out.join(&name), std::slice::from_ref(s))?;
        files.push(name);
    }
    write_manifest(
        &cli.out,
        "generate",
        json!({
            "seed": seed,
            "kind": kind,
            "n_train": n_train,
            "hours": hours,
            "files": files,
            "generator": params,
        }),
    )
}
