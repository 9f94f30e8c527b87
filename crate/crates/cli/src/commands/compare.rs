use std::collections::BTreeMap;
use std::path::Path;

use autotsf::stats::{compare_errors, compare_report, CompareReport};
use serde::{Deserialize, Serialize};
use serde_json::json;
use walkdir::WalkDir;

use crate::args::{Cli, CompareArgs};
use crate::error::{CliError, CliResult};
use crate::io::{ensure_dir, read_json, write_json, write_manifest};

#[derive(Deserialize)]
struct SeedResult {
    seed: u64,
    test_mse: Option<f64>,
}

#[derive(Serialize)]
struct Comparison {
    seeds: Vec<u64>,
    #[serde(flatten)]
    report: CompareReport,
}

/// Per-seed test MSE of every run below `dir`.
fn collect(dir: &Path) -> CliResult<BTreeMap<u64, f64>> {
    let mut out = BTreeMap::new();
    for entry in WalkDir::new(dir).sort_by_file_name() {
        let entry = entry.map_err(|e| CliError::Data(format!("{}: {e}", dir.display())))?;
        let name = entry.file_name();
        if name != "report.json" && name != "summary.json" {
            continue;
        }
        let r: SeedResult = read_json(entry.path())?;
        let mse = r.test_mse.ok_or_else(|| {
            CliError::Data(format!("{}: no test_mse recorded", entry.path().display()))
        })?;
        if out.insert(r.seed, mse).is_some() {
            return Err(CliError::Data(format!(
                "{}: seed {} appears more than once",
                dir.display(),
                r.seed
            )));
        }
    }
    if out.is_empty() {
        return Err(CliError::Data(format!("{}: no report.json or summary.json found", dir.display())));
    }
    Ok(out)
}

pub fn run(cli: &Cli, a: &CompareArgs) -> CliResult<()> {
    let groups = a
        .dirs
        .iter()
        .map(|d| Ok((d.display().to_string(), collect(d)?)))
        .collect::<CliResult<Vec<_>>>()?;
    let seeds: Vec<u64> = groups[0].1.keys().copied().collect();
    for (label, g) in &groups[1..] {
        let other: Vec<u64> = g.keys().copied().collect();
        if other != seeds {
            return Err(CliError::usage(format!(
                "seed sets differ: `{}` has {:?}, `{label}` has {:?}",
                groups[0].0, seeds, other
            )));
        }
    }
    let mut pairs = Vec::new();
    for i in 0..groups.len() {
        for j in i + 1..groups.len() {
            let a_vals: Vec<f64> = groups[i].1.values().copied().collect();
            let b_vals: Vec<f64> = groups[j].1.values().copied().collect();
            pairs.push(compare_errors(&groups[i].0, &a_vals, &groups[j].0, &b_vals)?);
        }
    }
    ensure_dir(&cli.out)?;
    write_json(
        &cli.out.join("comparison.json"),
        &Comparison {
            seeds,
            report: compare_report(pairs),
        },
    )?;
    write_manifest(&cli.out, "compare", json!({ "dirs": a.dirs }))
}
