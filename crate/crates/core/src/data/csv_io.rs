//! `task_id,timestamp,value` CSV files.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use super::series::{SeriesKind, TimeSeries};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const HEADER: [&str; 3] = ["task_id", "timestamp", "value"];

/// Reads every series in `path`. Series come back in order of first
/// appearance, each sorted by timestamp; their kind is `Synthetic` since the
/// file does not record it.
pub fn load_csv<T: Scalar>(path: impl AsRef<Path>) -> Result<Vec<TimeSeries<T>>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file)
}

pub fn read_csv<T: Scalar, R: Read>(reader: R) -> Result<Vec<TimeSeries<T>>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);

    let mut order: Vec<String> = Vec::new();
    let mut rows: HashMap<String, BTreeMap<u64, T>> = HashMap::new();
    let mut saw_header = false;

    for record in rdr.records() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if !saw_header {
            if record.iter().map(str::trim).ne(HEADER.iter().copied()) {
                return Err(Error::Parse {
                    line,
                    message: format!("expected header `{}`", HEADER.join(",")),
                });
            }
            saw_header = true;
            continue;
        }
        if record.len() != 3 {
            return Err(Error::Parse {
                line,
                message: format!("expected 3 fields, found {}", record.len()),
            });
        }
        let task = record[0].trim();
        if task.is_empty() {
            return Err(Error::Parse {
                line,
                message: "empty task_id".into(),
            });
        }
        let ts: u64 = record[1].trim().parse().map_err(|_| Error::Parse {
            line,
            message: format!("timestamp `{}` is not a non-negative integer", &record[1]),
        })?;
        let value: T = record[2]
            .trim()
            .parse()
            .ok()
            .filter(|v: &T| v.is_finite())
            .ok_or_else(|| Error::Parse {
                line,
                message: format!("value `{}` is not a finite number", &record[2]),
            })?;

        let entry = rows.entry(task.to_string()).or_insert_with(|| {
            order.push(task.to_string());
            BTreeMap::new()
        });
        if entry.insert(ts, value).is_some() {
            return Err(Error::Parse {
                line,
                message: format!("duplicate row for task `{task}` at timestamp {ts}"),
            });
        }
    }

    if order.is_empty() {
        return Err(Error::EmptyInput("csv contains no data rows".into()));
    }
    order
        .into_iter()
        .map(|id| {
            let values = rows.remove(&id).unwrap_or_default().into_values().collect();
            TimeSeries::new(id, SeriesKind::Synthetic, values)
        })
        .collect()
}

/// Writes the series with timestamps `0..len`.
pub fn write_csv<T: Scalar, W: Write>(writer: W, series: &[TimeSeries<T>]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let to_err = |e: csv::Error| Error::invalid(format!("csv write failed: {e}"));
    wtr.write_record(HEADER).map_err(to_err)?;
    for s in series {
        for (t, v) in s.values.iter().enumerate() {
            wtr.write_record([s.task_id.as_str(), &t.to_string(), &v.to_string()])
                .map_err(to_err)?;
        }
    }
    wtr.flush().map_err(|e| Error::invalid(format!("csv flush failed: {e}")))
}

pub fn save_csv<T: Scalar>(path: impl AsRef<Path>, series: &[TimeSeries<T>]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_csv(file, series)
}
