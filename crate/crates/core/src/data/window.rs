use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::series::{Normalization, TimeSeries};
use crate::error::{Error, Result};
use crate::rng::{rng_for, streams};
use crate::scalar::Scalar;

pub const DEFAULT_WINDOW: usize = 24;
pub const DEFAULT_TEST_HORIZON: usize = 24;

/// `x` holds the `w` observations immediately preceding target `y`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowPair<T> {
    pub x: Vec<T>,
    pub y: T,
}

pub fn windows_from_values<T: Scalar>(values: &[T], w: usize) -> Result<Vec<WindowPair<T>>> {
    if w == 0 {
        return Err(Error::invalid("window length must be at least 1"));
    }
    if values.len() < w + 1 {
        return Err(Error::invalid(format!(
            "series of length {} is too short for window {w}",
            values.len()
        )));
    }
    Ok(values
        .windows(w + 1)
        .map(|win| WindowPair {
            x: win[..w].to_vec(),
            y: win[w],
        })
        .collect())
}

/// Slides a window of length `w` over the series: `len - w` pairs in temporal order.
pub fn make_windows<T: Scalar>(series: &TimeSeries<T>, w: usize) -> Result<Vec<WindowPair<T>>> {
    windows_from_values(&series.values, w)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitMode {
    /// Seeded uniform permutation.
    #[default]
    Shuffled,
    /// Leading pairs form the support set.
    Temporal,
}

impl std::str::FromStr for SplitMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "shuffled" => Ok(SplitMode::Shuffled),
            "temporal" => Ok(SplitMode::Temporal),
            other => Err(Error::invalid(format!("unknown split mode `{other}`"))),
        }
    }
}

/// One source task's support/query episode split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskDataset<T> {
    pub task_id: String,
    pub support: Vec<WindowPair<T>>,
    pub query: Vec<WindowPair<T>>,
}

/// `round(0.8 n)`, kept below `n` so the query set is never empty.
pub fn support_size(n: usize) -> usize {
    ((4 * n + 2) / 5).min(n - 1)
}

pub fn split_support_query<T: Scalar>(
    task_id: impl Into<String>,
    pairs: Vec<WindowPair<T>>,
    seed: u64,
) -> Result<TaskDataset<T>> {
    split_with_mode(task_id, pairs, seed, SplitMode::Shuffled)
}

pub fn split_with_mode<T: Scalar>(
    task_id: impl Into<String>,
    mut pairs: Vec<WindowPair<T>>,
    seed: u64,
    mode: SplitMode,
) -> Result<TaskDataset<T>> {
    let n = pairs.len();
    if n < 2 {
        return Err(Error::invalid(format!(
            "need at least 2 pairs to split, got {n}"
        )));
    }
    if mode == SplitMode::Shuffled {
        pairs.shuffle(&mut rng_for(seed, streams::SPLIT));
    }
    let query = pairs.split_off(support_size(n));
    Ok(TaskDataset {
        task_id: task_id.into(),
        support: pairs,
        query,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleOptions {
    pub window: usize,
    pub test_horizon: usize,
    pub split: SplitMode,
    pub seed: u64,
}

impl BundleOptions {
    pub fn new(seed: u64) -> Self {
        Self {
            window: DEFAULT_WINDOW,
            test_horizon: DEFAULT_TEST_HORIZON,
            split: SplitMode::Shuffled,
            seed,
        }
    }
}

/// Source tasks plus the target task's fine-tuning and test slices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataBundle<T> {
    pub train_tasks: Vec<TaskDataset<T>>,
    pub validation: Vec<WindowPair<T>>,
    pub test: Vec<WindowPair<T>>,
    pub target_id: String,
    pub target_normalization: Option<Normalization<T>>,
    pub window: usize,
}

/// Normalizes every series, windows it and assembles the bundle.
///
/// The target's last `test_horizon` windows form the test slice; the first
/// `round(0.8 n)` windows (truncated so they stay disjoint from the test
/// slice) form the validation slice.
pub fn build_bundle<T: Scalar>(
    train: &[TimeSeries<T>],
    target: &TimeSeries<T>,
    opts: &BundleOptions,
) -> Result<DataBundle<T>> {
    if let Some(t) = train.iter().find(|t| t.task_id == target.task_id) {
        return Err(Error::invalid(format!(
            "train task `{}` shares the target id",
            t.task_id
        )));
    }
    let train_tasks = train
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let pairs = make_windows(&s.normalize()?, opts.window)?;
            split_with_mode(
                s.task_id.clone(),
                pairs,
                crate::rng::split(opts.seed, i as u64),
                opts.split,
            )
        })
        .collect::<Result<Vec<_>>>()?;

    let target_norm = target.normalize()?;
    let pairs = make_windows(&target_norm, opts.window)?;
    let n = pairs.len();
    if opts.test_horizon == 0 || n <= opts.test_horizon {
        return Err(Error::invalid(format!(
            "target `{}` yields {n} windows, not enough for a {}-step test horizon",
            target.task_id, opts.test_horizon
        )));
    }
    let n_val = ((4 * n + 2) / 5).min(n - opts.test_horizon);
    let test = pairs[n - opts.test_horizon..].to_vec();
    let validation = pairs[..n_val].to_vec();

    Ok(DataBundle {
        train_tasks,
        validation,
        test,
        target_id: target.task_id.clone(),
        target_normalization: target_norm.normalization,
        window: opts.window,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::series::SeriesKind;
    use crate::data::synth::generate_synthetic_tasks;

    fn series(values: Vec<f64>) -> TimeSeries<f64> {
        TimeSeries::new("s", SeriesKind::Synthetic, values).unwrap()
    }

    #[test]
    fn windows_enumerate() {
        let w = make_windows(&series(vec![1.0, 2.0, 3.0, 4.0]), 2).unwrap();
        assert_eq!(
            w,
            vec![
                WindowPair { x: vec![1.0, 2.0], y: 3.0 },
                WindowPair { x: vec![2.0, 3.0], y: 4.0 },
            ]
        );
    }

    #[test]
    fn window_count() {
        let w = make_windows(&series(vec![0.0; 168]), 24).unwrap();
        assert_eq!(w.len(), 144);
    }

    #[test]
    fn window_errors() {
        assert!(make_windows(&series(vec![1.0, 2.0]), 0).is_err());
        assert!(make_windows(&series(vec![1.0, 2.0]), 2).is_err());
    }

    fn pairs(n: usize) -> Vec<WindowPair<f64>> {
        (0..n)
            .map(|i| WindowPair { x: vec![i as f64], y: i as f64 })
            .collect()
    }

    #[test]
    fn split_sizes() {
        let d = split_support_query("t", pairs(10), 1).unwrap();
        assert_eq!((d.support.len(), d.query.len()), (8, 2));
        let d = split_support_query("t", pairs(5), 1).unwrap();
        assert_eq!((d.support.len(), d.query.len()), (4, 1));
        let d = split_support_query("t", pairs(2), 1).unwrap();
        assert_eq!((d.support.len(), d.query.len()), (1, 1));
        assert!(split_support_query("t", pairs(1), 1).is_err());
    }

    #[test]
    fn split_deterministic_and_disjoint() {
        let a = split_support_query("t", pairs(30), 9).unwrap();
        let b = split_support_query("t", pairs(30), 9).unwrap();
        assert_eq!(a, b);
        let mut ys: Vec<f64> = a.support.iter().chain(&a.query).map(|p| p.y).collect();
        ys.sort_by(f64::total_cmp);
        assert_eq!(ys, (0..30).map(|i| i as f64).collect::<Vec<_>>());
    }

    #[test]
    fn temporal_split_keeps_order() {
        let d = split_with_mode("t", pairs(10), 3, SplitMode::Temporal).unwrap();
        assert_eq!(d.support.last().unwrap().y, 7.0);
        assert_eq!(d.query[0].y, 8.0);
    }

    #[test]
    fn bundle_shapes() {
        let s = generate_synthetic_tasks::<f64>(SeriesKind::Wind, 5, 168, 11).unwrap();
        let b = build_bundle(&s[..4], &s[4], &BundleOptions::new(11)).unwrap();
        assert_eq!(b.train_tasks.len(), 4);
        assert_eq!(b.train_tasks[0].support.len(), 115);
        assert_eq!(b.train_tasks[0].query.len(), 29);
        assert_eq!(b.validation.len(), 115);
        assert_eq!(b.test.len(), 24);
        assert_eq!(b.target_id, "wind-4");
        // validation ends before the test slice starts
        let n = 144;
        assert!(b.validation.len() <= n - 24);
    }

    #[test]
    fn bundle_rejects_shared_id() {
        let s = generate_synthetic_tasks::<f64>(SeriesKind::Wind, 2, 168, 1).unwrap();
        assert!(build_bundle(&s[..1], &s[0], &BundleOptions::new(1)).is_err());
    }
}
