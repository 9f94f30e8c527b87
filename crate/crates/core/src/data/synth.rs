//! Synthetic multi-task energy series.
//!
//! Tasks share one parametric family per kind; per-task amplitude, phase,
//! daily-cycle shape, offset and noise level are drawn uniformly from fixed
//! ranges.
//!
//! * `pv`: `a * max(0, sin(2π(t-φ)/24))^p + b + ε` during daylight, exactly 0 at
//!   night (where the sine is non-positive), clamped at 0.
//! * `wind`, `load`, `synthetic`: `a * sin(2π(t-φ)/24) + 0.3a * sin(2πt/168) + b + ε`.

use std::f64::consts::PI;
use std::ops::RangeInclusive;

use rand::Rng as _;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::series::{SeriesKind, TimeSeries};
use crate::error::{Error, Result};
use crate::rng::{rng_for, streams};
use crate::scalar::Scalar;

/// Per-task draw from the generator family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorParams {
    pub task_id: String,
    pub kind: SeriesKind,
    pub amplitude: f64,
    pub phase: f64,
    /// Exponent of the daylight bump; 1.0 for the sinusoidal kinds.
    pub shape: f64,
    pub offset: f64,
    pub noise_sd: f64,
}

struct Ranges {
    amplitude: RangeInclusive<f64>,
    phase: RangeInclusive<f64>,
    shape: RangeInclusive<f64>,
    offset: RangeInclusive<f64>,
    noise_sd: RangeInclusive<f64>,
}

fn ranges(kind: SeriesKind) -> Ranges {
    match kind {
        SeriesKind::Pv => Ranges {
            amplitude: 3.0..=5.0,
            phase: 5.0..=7.0,
            shape: 1.0..=2.0,
            offset: 0.0..=0.2,
            noise_sd: 0.05..=0.2,
        },
        SeriesKind::Wind => Ranges {
            amplitude: 0.8..=1.5,
            phase: 0.0..=3.0,
            shape: 1.0..=1.0,
            offset: 2.0..=3.0,
            noise_sd: 0.1..=0.25,
        },
        SeriesKind::Load => Ranges {
            amplitude: 1.0..=2.0,
            phase: 6.0..=9.0,
            shape: 1.0..=1.0,
            offset: 5.0..=6.0,
            noise_sd: 0.05..=0.15,
        },
        SeriesKind::Synthetic => Ranges {
            amplitude: 0.5..=1.5,
            phase: 0.0..=4.0,
            shape: 1.0..=1.0,
            offset: 1.0..=2.0,
            noise_sd: 0.05..=0.2,
        },
    }
}

/// Samples the parameters of task `index` from the family of `kind`.
pub fn sample_params(kind: SeriesKind, index: usize, seed: u64) -> GeneratorParams {
    let r = ranges(kind);
    let mut rng = rng_for(seed, streams::GENERATOR + index as u64);
    let mut draw = |range: &RangeInclusive<f64>| {
        if range.start() == range.end() {
            *range.start()
        } else {
            rng.random_range(range.clone())
        }
    };
    GeneratorParams {
        task_id: format!("{kind}-{index}"),
        kind,
        amplitude: draw(&r.amplitude),
        phase: draw(&r.phase),
        shape: draw(&r.shape),
        offset: draw(&r.offset),
        noise_sd: draw(&r.noise_sd),
    }
}

/// `true` where the PV day mask is open.
pub fn is_daylight(params: &GeneratorParams, t: usize) -> bool {
    daily(params, t) > 0.0
}

fn daily(params: &GeneratorParams, t: usize) -> f64 {
    (2.0 * PI * (t as f64 - params.phase) / 24.0).sin()
}

/// Noise-free profile plus the supplied noise draw at hour `t`.
pub fn profile_value(params: &GeneratorParams, t: usize, noise: f64) -> f64 {
    let s = daily(params, t);
    match params.kind {
        SeriesKind::Pv => {
            if s <= 0.0 {
                0.0
            } else {
                (params.amplitude * s.powf(params.shape) + params.offset + noise).max(0.0)
            }
        }
        _ => {
            let weekly = (2.0 * PI * t as f64 / 168.0).sin();
            params.amplitude * s + 0.3 * params.amplitude * weekly + params.offset + noise
        }
    }
}

fn render<T: Scalar>(params: &GeneratorParams, hours: usize, seed: u64, index: usize) -> Result<TimeSeries<T>> {
    let mut rng = rng_for(seed, streams::GENERATOR_NOISE + index as u64);
    let noise = Normal::new(0.0, params.noise_sd)
        .map_err(|e| Error::invalid(format!("noise level: {e}")))?;
    let values = (0..hours)
        .map(|t| T::of(profile_value(params, t, noise.sample(&mut rng))))
        .collect();
    TimeSeries::new(params.task_id.clone(), params.kind, values)
}

/// Generates `n_tasks` series of `hours` points plus the parameters each was drawn with.
pub fn generate_with_params<T: Scalar>(
    kind: SeriesKind,
    n_tasks: usize,
    hours: usize,
    seed: u64,
) -> Result<(Vec<TimeSeries<T>>, Vec<GeneratorParams>)> {
    if n_tasks == 0 {
        return Err(Error::invalid("n_tasks must be at least 1"));
    }
    if hours < 2 {
        return Err(Error::invalid(format!("hours must be at least 2, got {hours}")));
    }
    let params: Vec<_> = (0..n_tasks).map(|i| sample_params(kind, i, seed)).collect();
    let series = params
        .iter()
        .enumerate()
        .map(|(i, p)| render(p, hours, seed, i))
        .collect::<Result<_>>()?;
    Ok((series, params))
}

pub fn generate_synthetic_tasks<T: Scalar>(
    kind: SeriesKind,
    n_tasks: usize,
    hours: usize,
    seed: u64,
) -> Result<Vec<TimeSeries<T>>> {
    generate_with_params(kind, n_tasks, hours, seed).map(|(s, _)| s)
}
