use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LearnerFamily {
    /// Affine map of the lag window.
    Linear,
    /// One tanh hidden layer followed by an affine readout.
    Mlp,
    /// Gated recurrent cell over the lag window, affine readout of the final state.
    Recurrent,
}

impl LearnerFamily {
    pub fn as_str(self) -> &'static str {
        match self {
            LearnerFamily::Linear => "linear",
            LearnerFamily::Mlp => "mlp",
            LearnerFamily::Recurrent => "recurrent",
        }
    }
}

impl fmt::Display for LearnerFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LearnerFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(LearnerFamily::Linear),
            "mlp" => Ok(LearnerFamily::Mlp),
            "recurrent" => Ok(LearnerFamily::Recurrent),
            other => Err(Error::invalid(format!("unknown learner family `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LearnerSpec {
    pub family: LearnerFamily,
    /// Hidden neurons (mlp) or hidden units (recurrent); ignored for linear.
    pub width: usize,
    /// Window length.
    pub input_dim: usize,
}

/// A named block of the flat parameter vector. Matrices are row-major.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub name: String,
    pub offset: usize,
    pub shape: Vec<usize>,
    /// Fan-in used for initialization; zero marks a bias.
    pub fan_in: usize,
}

impl Segment {
    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn range(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.len()
    }
}

impl LearnerSpec {
    pub fn linear(input_dim: usize) -> Self {
        Self {
            family: LearnerFamily::Linear,
            width: 0,
            input_dim,
        }
    }

    pub fn mlp(width: usize, input_dim: usize) -> Self {
        Self {
            family: LearnerFamily::Mlp,
            width,
            input_dim,
        }
    }

    pub fn recurrent(width: usize, input_dim: usize) -> Self {
        Self {
            family: LearnerFamily::Recurrent,
            width,
            input_dim,
        }
    }

    pub fn new(family: LearnerFamily, width: usize, input_dim: usize) -> Self {
        Self {
            family,
            width,
            input_dim,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 {
            return Err(Error::invalid("input_dim must be at least 1"));
        }
        if self.family != LearnerFamily::Linear && self.width == 0 {
            return Err(Error::invalid(format!(
                "{} learner needs a positive width",
                self.family
            )));
        }
        Ok(())
    }

    /// The flat layout; segment order is the storage order.
    pub fn layout(&self) -> Vec<Segment> {
        let w = self.input_dim;
        let h = self.width;
        let blocks: Vec<(&str, Vec<usize>, usize)> = match self.family {
            LearnerFamily::Linear => vec![("weight", vec![w], w), ("bias", vec![1], 0)],
            LearnerFamily::Mlp => vec![
                ("hidden.weight", vec![h, w], w),
                ("hidden.bias", vec![h], 0),
                ("out.weight", vec![h], h),
                ("out.bias", vec![1], 0),
            ],
            LearnerFamily::Recurrent => {
                let mut v = Vec::new();
                for gate in ["update", "reset", "candidate"] {
                    v.push((gate, vec![h], h + 1));
                    v.push((gate, vec![h, h], h + 1));
                    v.push((gate, vec![h], 0));
                }
                v.push(("out.weight", vec![h], h));
                v.push(("out.bias", vec![1], 0));
                v
            }
        };
        let mut offset = 0;
        blocks
            .into_iter()
            .enumerate()
            .map(|(i, (name, shape, fan_in))| {
                let name = match self.family {
                    LearnerFamily::Recurrent if i < 9 => {
                        format!("{name}.{}", ["input", "hidden", "bias"][i % 3])
                    }
                    _ => name.to_string(),
                };
                let seg = Segment {
                    name,
                    offset,
                    shape,
                    fan_in,
                };
                offset += seg.len();
                seg
            })
            .collect()
    }

    pub fn param_count(&self) -> usize {
        let w = self.input_dim;
        let h = self.width;
        match self.family {
            LearnerFamily::Linear => w + 1,
            LearnerFamily::Mlp => w * h + h + h + 1,
            LearnerFamily::Recurrent => 3 * (h + h * h + h) + h + 1,
        }
    }
}
