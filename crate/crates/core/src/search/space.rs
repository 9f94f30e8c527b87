use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learners::{LearnerFamily, OptimizerKind};
use crate::pipeline::{PipelineConfig, LR_MAX, LR_MIN};

pub const DEFAULT_GRID_RESOLUTION: usize = 8;
pub const DEFAULT_KAPPA: f64 = 0.7;
pub const DEFAULT_C_UCT: f64 = 1.0;
pub const WIDTH_OPTIONS: [usize; 8] = [128, 256, 384, 512, 640, 768, 896, 1024];

/// The decision made at one tree level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "options", rename_all = "snake_case")]
pub enum Level {
    Width(Vec<usize>),
    Alpha(Vec<f64>),
    Beta(Vec<f64>),
    Gamma(Vec<f64>),
    Optimizer(Vec<OptimizerKind>),
    Shots(Vec<usize>),
}

impl Level {
    pub fn len(&self) -> usize {
        match self {
            Level::Width(v) | Level::Shots(v) => v.len(),
            Level::Alpha(v) | Level::Beta(v) | Level::Gamma(v) => v.len(),
            Level::Optimizer(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Log-uniform grid from `LR_MIN` to `LR_MAX`, endpoints exact.
pub fn lr_grid(points: usize) -> Result<Vec<f64>> {
    if points < 2 {
        return Err(Error::invalid(format!(
            "grid resolution must be at least 2, got {points}"
        )));
    }
    let ratio = (LR_MAX / LR_MIN).ln() / (points - 1) as f64;
    Ok((0..points)
        .map(|i| match i {
            0 => LR_MIN,
            i if i == points - 1 => LR_MAX,
            i => LR_MIN * (ratio * i as f64).exp(),
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    pub family: LearnerFamily,
    pub levels: Vec<Level>,
    pub grid_resolution: usize,
    /// Progressive-widening exponent, in (0, 1).
    pub kappa: f64,
    /// UCT exploration weight.
    pub c_uct: f64,
}

impl SearchSpace {
    /// Width, α, β, γ, optimizer; the linear family gets a single width placeholder.
    pub fn build(family: LearnerFamily, grid_resolution: usize, kappa: f64, c_uct: f64) -> Result<Self> {
        let grid = lr_grid(grid_resolution)?;
        let widths = match family {
            LearnerFamily::Linear => vec![0],
            _ => WIDTH_OPTIONS.to_vec(),
        };
        Self::from_levels(
            family,
            vec![
                Level::Width(widths),
                Level::Alpha(grid.clone()),
                Level::Beta(grid.clone()),
                Level::Gamma(grid),
                Level::Optimizer(OptimizerKind::ALL.to_vec()),
            ],
            grid_resolution,
            kappa,
            c_uct,
        )
    }

    /// Appends a shots level after the five standard ones.
    pub fn with_shots(mut self, shots: Vec<usize>) -> Result<Self> {
        if shots.is_empty() || shots.contains(&0) {
            return Err(Error::invalid("shots options must be non-empty and positive"));
        }
        self.levels.push(Level::Shots(shots));
        Ok(self)
    }

    pub fn from_levels(
        family: LearnerFamily,
        levels: Vec<Level>,
        grid_resolution: usize,
        kappa: f64,
        c_uct: f64,
    ) -> Result<Self> {
        if !(kappa > 0.0 && kappa < 1.0) {
            return Err(Error::invalid(format!("kappa must lie in (0, 1), got {kappa}")));
        }
        if !(c_uct > 0.0 && c_uct.is_finite()) {
            return Err(Error::invalid(format!("c_uct must be positive, got {c_uct}")));
        }
        if levels.is_empty() || levels.iter().any(Level::is_empty) {
            return Err(Error::invalid("every search level needs at least one option"));
        }
        for level in &levels {
            if let Level::Alpha(g) | Level::Beta(g) | Level::Gamma(g) = level {
                if g.windows(2).any(|w| w[0] >= w[1]) || g.iter().any(|v| !(LR_MIN..=LR_MAX).contains(v)) {
                    return Err(Error::invalid("learning-rate grids must be ascending within [1e-4, 0.5]"));
                }
            }
        }
        Ok(Self {
            family,
            levels,
            grid_resolution,
            kappa,
            c_uct,
        })
    }

    /// Number of decisions in a complete pipeline.
    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn options_at(&self, level: usize) -> usize {
        self.levels[level].len()
    }

    /// Number of complete pipelines.
    pub fn size(&self) -> usize {
        self.levels.iter().map(Level::len).product()
    }

    /// Maps one option index per level to its values. Levels that are absent
    /// keep the fixed-default value.
    pub fn resolve(&self, choices: &[usize]) -> Result<PipelineConfig> {
        if choices.len() != self.depth() {
            return Err(Error::invalid(format!(
                "expected {} choices, got {}",
                self.depth(),
                choices.len()
            )));
        }
        let mut cfg = PipelineConfig::fixed_default(self.family);
        cfg.choices = choices.to_vec();
        for (level, &c) in self.levels.iter().zip(choices) {
            if c >= level.len() {
                return Err(Error::invalid(format!(
                    "choice {c} out of range for a level with {} options",
                    level.len()
                )));
            }
            match level {
                Level::Width(v) => cfg.width = v[c],
                Level::Alpha(v) => cfg.alpha = v[c],
                Level::Beta(v) => cfg.beta = v[c],
                Level::Gamma(v) => cfg.gamma = v[c],
                Level::Optimizer(v) => cfg.optimizer = v[c],
                Level::Shots(v) => cfg.shots = Some(v[c]),
            }
        }
        Ok(cfg)
    }
}
