//! The five optimizers available to outer and fine-tuning steps.
//!
//! Only the learning rate is tunable; the remaining constants are the usual
//! library defaults:
//!
//! | kind     | update                                                         | constants              |
//! |----------|----------------------------------------------------------------|------------------------|
//! | sgd      | `θ -= lr g`                                                    |                        |
//! | adam     | bias-corrected first/second moments                            | β1 0.9, β2 0.999, ε 1e-8 |
//! | rmsprop  | `v = ρv + (1-ρ)g²; θ -= lr g / (√v + ε)`                        | ρ 0.99, ε 1e-8          |
//! | adadelta | `v = ρv + (1-ρ)g²; Δ = √(u+ε)/√(v+ε) g; u = ρu + (1-ρ)Δ²; θ -= lr Δ` | ρ 0.9, ε 1e-6     |
//! | adagrad  | `s += g²; θ -= lr g / (√s + ε)`                                 | ε 1e-10                 |

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::params::ParameterVector;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    Sgd,
    Adam,
    Rmsprop,
    Adadelta,
    Adagrad,
}

impl OptimizerKind {
    pub const ALL: [OptimizerKind; 5] = [
        OptimizerKind::Sgd,
        OptimizerKind::Adam,
        OptimizerKind::Rmsprop,
        OptimizerKind::Adadelta,
        OptimizerKind::Adagrad,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            OptimizerKind::Sgd => "sgd",
            OptimizerKind::Adam => "adam",
            OptimizerKind::Rmsprop => "rmsprop",
            OptimizerKind::Adadelta => "adadelta",
            OptimizerKind::Adagrad => "adagrad",
        }
    }
}

impl fmt::Display for OptimizerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for OptimizerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        OptimizerKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::invalid(format!("unknown optimizer `{s}`")))
    }
}

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;
const RMSPROP_RHO: f64 = 0.99;
const RMSPROP_EPS: f64 = 1e-8;
const ADADELTA_RHO: f64 = 0.9;
const ADADELTA_EPS: f64 = 1e-6;
const ADAGRAD_EPS: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerState<T> {
    pub kind: OptimizerKind,
    /// First moment (adam); empty otherwise.
    pub first: Vec<T>,
    /// Second moment / squared-gradient average or sum.
    pub second: Vec<T>,
    /// Running average of squared updates (adadelta).
    pub updates: Vec<T>,
    pub step: u64,
}

impl<T: Scalar> OptimizerState<T> {
    pub fn new(kind: OptimizerKind, len: usize) -> Self {
        let zeros = |used: bool| if used { vec![T::zero(); len] } else { Vec::new() };
        Self {
            kind,
            first: zeros(kind == OptimizerKind::Adam),
            second: zeros(kind != OptimizerKind::Sgd),
            updates: zeros(kind == OptimizerKind::Adadelta),
            step: 0,
        }
    }

    fn expected_len(&self) -> Option<usize> {
        match self.kind {
            OptimizerKind::Sgd => None,
            _ => Some(self.second.len()),
        }
    }

    /// Applies one update in place.
    pub fn apply(&mut self, theta: &mut ParameterVector<T>, grad: &ParameterVector<T>, lr: T) -> Result<()> {
        if theta.len() != grad.len() || self.expected_len().is_some_and(|n| n != theta.len()) {
            return Err(Error::invalid(format!(
                "shape mismatch: params {}, gradient {}, optimizer state {:?}",
                theta.len(),
                grad.len(),
                self.expected_len()
            )));
        }
        if !(lr > T::zero()) {
            return Err(Error::invalid("learning rate must be positive"));
        }
        if let Some(index) = grad.first_non_finite() {
            return Err(Error::Numeric {
                index,
                message: "gradient is not finite".into(),
            });
        }
        self.step += 1;
        let g = grad.as_slice();
        let p = theta.as_mut_slice();
        let one = T::one();
        match self.kind {
            OptimizerKind::Sgd => {
                for (pi, &gi) in p.iter_mut().zip(g) {
                    *pi -= lr * gi;
                }
            }
            OptimizerKind::Adam => {
                let (b1, b2, eps) = (T::of(ADAM_BETA1), T::of(ADAM_BETA2), T::of(ADAM_EPS));
                let t = self.step as i32;
                let c1 = one - b1.powi(t);
                let c2 = one - b2.powi(t);
                for i in 0..p.len() {
                    self.first[i] = b1 * self.first[i] + (one - b1) * g[i];
                    self.second[i] = b2 * self.second[i] + (one - b2) * g[i] * g[i];
                    let m = self.first[i] / c1;
                    let v = self.second[i] / c2;
                    p[i] -= lr * m / (v.sqrt() + eps);
                }
            }
            OptimizerKind::Rmsprop => {
                let (rho, eps) = (T::of(RMSPROP_RHO), T::of(RMSPROP_EPS));
                for i in 0..p.len() {
                    self.second[i] = rho * self.second[i] + (one - rho) * g[i] * g[i];
                    p[i] -= lr * g[i] / (self.second[i].sqrt() + eps);
                }
            }
            OptimizerKind::Adadelta => {
                let (rho, eps) = (T::of(ADADELTA_RHO), T::of(ADADELTA_EPS));
                for i in 0..p.len() {
                    self.second[i] = rho * self.second[i] + (one - rho) * g[i] * g[i];
                    let delta = (self.updates[i] + eps).sqrt() / (self.second[i] + eps).sqrt() * g[i];
                    self.updates[i] = rho * self.updates[i] + (one - rho) * delta * delta;
                    p[i] -= lr * delta;
                }
            }
            OptimizerKind::Adagrad => {
                let eps = T::of(ADAGRAD_EPS);
                for i in 0..p.len() {
                    self.second[i] += g[i] * g[i];
                    p[i] -= lr * g[i] / (self.second[i].sqrt() + eps);
                }
            }
        }
        theta.ensure_finite("updated parameter")
    }
}

/// Pure form of [`OptimizerState::apply`].
pub fn optimizer_step<T: Scalar>(
    state: &OptimizerState<T>,
    theta: &ParameterVector<T>,
    grad: &ParameterVector<T>,
    lr: T,
) -> Result<(ParameterVector<T>, OptimizerState<T>)> {
    let mut next_state = state.clone();
    let mut next = theta.clone();
    next_state.apply(&mut next, grad, lr)?;
    Ok((next, next_state))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pv(v: &[f64]) -> ParameterVector<f64> {
        ParameterVector::from_vec(v.to_vec())
    }

    #[test]
    fn sgd_step() {
        let s = OptimizerState::new(OptimizerKind::Sgd, 1);
        let (p, s2) = optimizer_step(&s, &pv(&[1.0]), &pv(&[0.5]), 0.1).unwrap();
        assert!((p[0] - 0.95).abs() < 1e-15);
        assert_eq!(s2.step, 1);
        let (p, _) = optimizer_step(&s, &pv(&[1.0, -2.0]), &pv(&[0.0, 0.0]), 0.1).unwrap();
        assert_eq!(p, pv(&[1.0, -2.0]));
    }

    #[test]
    fn adam_first_step() {
        // m = 0.05, v = 0.00025; m̂ = 0.5, v̂ = 0.25; step = 0.1 * 0.5 / (0.5 + 1e-8)
        let s = OptimizerState::new(OptimizerKind::Adam, 1);
        let (p, _) = optimizer_step(&s, &pv(&[0.0]), &pv(&[0.5]), 0.1).unwrap();
        let expected = -0.1 * 0.5 / (0.5 + 1e-8);
        assert!((p[0] - expected).abs() < 1e-12);
        assert!((p[0] + 0.1).abs() < 1e-8);
    }

    #[test]
    fn rmsprop_adagrad_adadelta_first_steps() {
        let g = 0.5f64;
        let s = OptimizerState::new(OptimizerKind::Rmsprop, 1);
        let (p, _) = optimizer_step(&s, &pv(&[0.0]), &pv(&[g]), 0.01).unwrap();
        let v = 0.01 * g * g;
        assert!((p[0] + 0.01 * g / (v.sqrt() + 1e-8)).abs() < 1e-12);

        let s = OptimizerState::new(OptimizerKind::Adagrad, 1);
        let (p, _) = optimizer_step(&s, &pv(&[0.0]), &pv(&[g]), 0.01).unwrap();
        assert!((p[0] + 0.01 * g / (g + 1e-10)).abs() < 1e-12);

        let s = OptimizerState::new(OptimizerKind::Adadelta, 1);
        let (p, s2) = optimizer_step(&s, &pv(&[0.0]), &pv(&[g]), 1.0).unwrap();
        let v = 0.1 * g * g;
        let delta = (1e-6f64).sqrt() / (v + 1e-6).sqrt() * g;
        assert!((p[0] + delta).abs() < 1e-12);
        assert!((s2.updates[0] - 0.1 * delta * delta).abs() < 1e-18);
    }

    #[test]
    fn step_counter_advances() {
        let mut s = OptimizerState::new(OptimizerKind::Adam, 2);
        let mut p = pv(&[1.0, 1.0]);
        for _ in 0..3 {
            s.apply(&mut p, &pv(&[0.1, -0.1]), 0.01).unwrap();
        }
        assert_eq!(s.step, 3);
        assert!(p[0] < 1.0 && p[1] > 1.0);
    }

    #[test]
    fn errors() {
        let s = OptimizerState::<f64>::new(OptimizerKind::Adam, 2);
        assert!(matches!(
            optimizer_step(&s, &pv(&[0.0]), &pv(&[0.0]), 0.1),
            Err(Error::InvalidArgument(_))
        ));
        let err = optimizer_step(&s, &pv(&[0.0, 0.0]), &pv(&[0.0, f64::NAN]), 0.1).unwrap_err();
        assert!(matches!(err, Error::Numeric { index: 1, .. }));
        assert!(optimizer_step(&s, &pv(&[0.0, 0.0]), &pv(&[0.0, 0.0]), 0.0).is_err());
    }

    #[test]
    fn kinds_parse() {
        for k in OptimizerKind::ALL {
            assert_eq!(k.as_str().parse::<OptimizerKind>().unwrap(), k);
        }
    }
}
