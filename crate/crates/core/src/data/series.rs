use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeriesKind {
    Wind,
    Pv,
    Load,
    Synthetic,
}

impl SeriesKind {
    pub const ALL: [SeriesKind; 4] = [
        SeriesKind::Wind,
        SeriesKind::Pv,
        SeriesKind::Load,
        SeriesKind::Synthetic,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SeriesKind::Wind => "wind",
            SeriesKind::Pv => "pv",
            SeriesKind::Load => "load",
            SeriesKind::Synthetic => "synthetic",
        }
    }
}

impl fmt::Display for SeriesKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SeriesKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SeriesKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::invalid(format!("unknown series kind `{s}`")))
    }
}

/// Affine rescale applied by [`TimeSeries::normalize`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Normalization<T> {
    pub min: T,
    pub max: T,
    /// Set when the source series was constant and every value mapped to zero.
    pub degenerate: bool,
}

impl<T: Scalar> Normalization<T> {
    pub fn apply(&self, v: T) -> T {
        if self.degenerate {
            T::zero()
        } else {
            (v - self.min) / (self.max - self.min)
        }
    }

    pub fn invert(&self, v: T) -> T {
        if self.degenerate {
            self.min
        } else {
            v * (self.max - self.min) + self.min
        }
    }
}

/// One task's hourly measurements.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries<T> {
    pub task_id: String,
    pub kind: SeriesKind,
    pub values: Vec<T>,
    pub normalization: Option<Normalization<T>>,
}

impl<T: Scalar> TimeSeries<T> {
    pub fn new(task_id: impl Into<String>, kind: SeriesKind, values: Vec<T>) -> Result<Self> {
        let task_id = task_id.into();
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "series `{task_id}` has a non-finite value at index {i}"
            )));
        }
        Ok(Self {
            task_id,
            kind,
            values,
            normalization: None,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Min-max rescales the values into `[0, 1]`.
    ///
    /// A constant series maps to all zeros and the returned normalization has
    /// `degenerate` set.
    pub fn normalize(&self) -> Result<Self> {
        if self.values.is_empty() {
            return Err(Error::invalid(format!(
                "cannot normalize empty series `{}`",
                self.task_id
            )));
        }
        let (min, max) = self
            .values
            .iter()
            .fold((T::infinity(), T::neg_infinity()), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
        let norm = Normalization {
            min,
            max,
            degenerate: max <= min,
        };
        Ok(Self {
            task_id: self.task_id.clone(),
            kind: self.kind,
            values: self.values.iter().map(|&v| norm.apply(v)).collect(),
            normalization: Some(norm),
        })
    }

    /// Maps a normalized value back to the original scale; identity when the
    /// series carries no normalization.
    pub fn denormalize_value(&self, v: T) -> T {
        match &self.normalization {
            Some(n) => n.invert(v),
            None => v,
        }
    }

    pub fn denormalized(&self) -> Self {
        Self {
            task_id: self.task_id.clone(),
            kind: self.kind,
            values: self
                .values
                .iter()
                .map(|&v| self.denormalize_value(v))
                .collect(),
            normalization: None,
        }
    }
}
