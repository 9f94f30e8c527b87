//! Pipeline configurations and evaluation records shared by the meta-learner
//! and the tree search.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learners::{LearnerFamily, LearnerSpec, OptimizerKind};

pub const LR_MIN: f64 = 1e-4;
pub const LR_MAX: f64 = 0.5;
pub const WIDTH_MIN: usize = 128;
pub const WIDTH_MAX: usize = 1024;

/// One complete pipeline: the option index chosen at every search level plus
/// the values those indices resolve to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub choices: Vec<usize>,
    pub family: LearnerFamily,
    /// Zero for the linear family.
    pub width: usize,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub optimizer: OptimizerKind,
    /// Shots per task, when the search space carries a shots level.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shots: Option<usize>,
}

impl PipelineConfig {
    /// A configuration given directly by value rather than through a search space.
    pub fn fixed(
        family: LearnerFamily,
        width: usize,
        alpha: f64,
        beta: f64,
        gamma: f64,
        optimizer: OptimizerKind,
    ) -> Self {
        Self {
            choices: Vec::new(),
            family,
            width: if family == LearnerFamily::Linear { 0 } else { width },
            alpha,
            beta,
            gamma,
            optimizer,
            shots: None,
        }
    }

    /// Fixed-hyperparameter baseline: width 512 (mlp) or 640 (recurrent),
    /// rates 0.01 / 0.001 / 0.05, sgd.
    pub fn fixed_default(family: LearnerFamily) -> Self {
        let width = match family {
            LearnerFamily::Linear => 0,
            LearnerFamily::Mlp => 512,
            LearnerFamily::Recurrent => 640,
        };
        Self::fixed(family, width, 0.01, 0.001, 0.05, OptimizerKind::Sgd)
    }

    pub fn learner_spec(&self, input_dim: usize) -> LearnerSpec {
        LearnerSpec::new(self.family, self.width, input_dim)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("alpha", self.alpha), ("beta", self.beta), ("gamma", self.gamma)] {
            if !(LR_MIN..=LR_MAX).contains(&v) {
                return Err(Error::invalid(format!(
                    "{name} = {v} is outside [{LR_MIN}, {LR_MAX}]"
                )));
            }
        }
        if self.family != LearnerFamily::Linear && !(WIDTH_MIN..=WIDTH_MAX).contains(&self.width) {
            return Err(Error::invalid(format!(
                "width {} is outside [{WIDTH_MIN}, {WIDTH_MAX}]",
                self.width
            )));
        }
        if self.shots == Some(0) {
            return Err(Error::invalid("shots must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Failed,
}

/// Outcome of evaluating one pipeline; one JSONL line of a search trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationRecord {
    pub iteration: usize,
    pub config: PipelineConfig,
    /// MSE on the fine-tuning slice after fine-tuning.
    pub val_mse: Option<f64>,
    /// MSE on the held-out test slice; the search objective.
    pub test_mse: Option<f64>,
    pub seed: u64,
    pub wall_time_ms: u64,
    pub status: Status,
}

impl EvaluationRecord {
    pub fn success(config: PipelineConfig, val_mse: f64, test_mse: f64, seed: u64) -> Self {
        Self {
            iteration: 0,
            config,
            val_mse: Some(val_mse),
            test_mse: Some(test_mse),
            seed,
            wall_time_ms: 0,
            status: Status::Ok,
        }
    }

    pub fn failure(config: PipelineConfig, seed: u64) -> Self {
        Self {
            iteration: 0,
            config,
            val_mse: None,
            test_mse: None,
            seed,
            wall_time_ms: 0,
            status: Status::Failed,
        }
    }

    /// Test MSE of a successful evaluation.
    pub fn objective(&self) -> Option<f64> {
        match self.status {
            Status::Ok => self.test_mse.filter(|v| v.is_finite()),
            Status::Failed => None,
        }
    }

    pub fn to_json_line(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}
