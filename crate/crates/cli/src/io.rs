use std::fs;
use std::path::{Path, PathBuf};

use autotsf::data::{load_csv, TimeSeries};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{CliError, CliResult};

pub const MANIFEST: &str = "manifest.json";

pub fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn write_json<S: Serialize>(path: &Path, value: &S) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Json {
        path: path.to_path_buf(),
        source: e,
    })?;
    text.push('\n');
    write_text(path, &text)
}

pub fn read_json<D: serde::de::DeserializeOwned>(path: &Path) -> CliResult<D> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Json {
        path: path.to_path_buf(),
        source: e,
    })
}

/// Argument vector without the program name.
pub fn argv() -> Vec<String> {
    std::env::args().skip(1).collect()
}

/// Writes `manifest.json` with the argument vector, version and `extra` fields.
pub fn write_manifest(out: &Path, command: &str, extra: Value) -> CliResult<()> {
    let mut manifest = json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "argv": argv(),
    });
    if let (Some(m), Value::Object(extra)) = (manifest.as_object_mut(), extra) {
        m.extend(extra);
    }
    write_json(&out.join(MANIFEST), &manifest)
}

fn train_index(path: &Path) -> Option<usize> {
    path.file_name()?
        .to_str()?
        .strip_prefix("train_")?
        .strip_suffix(".csv")?
        .parse()
        .ok()
}

/// Reads `train_<i>.csv` (in index order) and `target.csv` from `dir`.
pub fn load_data_dir(dir: &Path) -> CliResult<(Vec<TimeSeries<f64>>, TimeSeries<f64>)> {
    let entries = fs::read_dir(dir).map_err(|e| CliError::io(dir, e))?;
    let mut train_files: Vec<(usize, PathBuf)> = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| CliError::io(dir, e))?.path();
        if let Some(i) = train_index(&path) {
            train_files.push((i, path));
        }
    }
    train_files.sort();
    let mut train = Vec::new();
    for (_, path) in &train_files {
        train.extend(load_csv::<f64>(path)?);
    }
    let target_path = dir.join("target.csv");
    let mut target = load_csv::<f64>(&target_path)?;
    if target.len() != 1 {
        return Err(CliError::Data(format!(
            "{}: expected exactly one series, found {}",
            target_path.display(),
            target.len()
        )));
    }
    Ok((train, target.remove(0)))
}
