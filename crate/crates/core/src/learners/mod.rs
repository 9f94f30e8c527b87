//! Differentiable base forecasters over flat parameter vectors, and the
//! optimizers that update them.

pub mod checkpoint;
mod gru;
mod linear;
mod mlp;
mod optim;
mod params;
mod spec;

pub use optim::{optimizer_step, OptimizerKind, OptimizerState};
pub use params::{init_params, ParameterVector};
pub use spec::{LearnerFamily, LearnerSpec, Segment};

use serde::{Deserialize, Serialize};

use crate::data::WindowPair;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// How per-pair squared errors are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Reduction {
    Sum,
    #[default]
    Mean,
}

impl std::str::FromStr for Reduction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sum" => Ok(Reduction::Sum),
            "mean" => Ok(Reduction::Mean),
            other => Err(Error::invalid(format!("unknown reduction `{other}`"))),
        }
    }
}

fn check_input<T: Scalar>(spec: &LearnerSpec, theta: &ParameterVector<T>, x: &[T]) -> Result<()> {
    theta.check_len(spec)?;
    if x.len() != spec.input_dim {
        return Err(Error::invalid(format!(
            "input has length {}, learner expects {}",
            x.len(),
            spec.input_dim
        )));
    }
    Ok(())
}

fn check_data<T: Scalar>(spec: &LearnerSpec, theta: &ParameterVector<T>, data: &[WindowPair<T>]) -> Result<()> {
    if data.is_empty() {
        return Err(Error::invalid("loss needs at least one pair"));
    }
    spec.validate()?;
    theta.check_len(spec)?;
    if let Some(p) = data.iter().find(|p| p.x.len() != spec.input_dim) {
        return Err(Error::invalid(format!(
            "pair input has length {}, learner expects {}",
            p.x.len(),
            spec.input_dim
        )));
    }
    Ok(())
}

fn predict_unchecked<T: Scalar>(spec: &LearnerSpec, theta: &[T], x: &[T]) -> T {
    match spec.family {
        LearnerFamily::Linear => linear::predict(theta, x),
        LearnerFamily::Mlp => mlp::predict(theta, spec.width, x),
        LearnerFamily::Recurrent => gru::predict(theta, spec.width, x),
    }
}

pub fn predict<T: Scalar>(spec: &LearnerSpec, theta: &ParameterVector<T>, x: &[T]) -> Result<T> {
    spec.validate()?;
    check_input(spec, theta, x)?;
    Ok(predict_unchecked(spec, theta.as_slice(), x))
}

/// `Σ (f(x) - y)²`, or its mean.
pub fn loss_with<T: Scalar>(
    spec: &LearnerSpec,
    theta: &ParameterVector<T>,
    data: &[WindowPair<T>],
    reduction: Reduction,
) -> Result<T> {
    check_data(spec, theta, data)?;
    let sum: T = data
        .iter()
        .map(|p| {
            let r = predict_unchecked(spec, theta.as_slice(), &p.x) - p.y;
            r * r
        })
        .sum();
    Ok(match reduction {
        Reduction::Sum => sum,
        Reduction::Mean => sum / T::of(data.len() as f64),
    })
}

/// Summed squared error over `data`.
pub fn loss<T: Scalar>(spec: &LearnerSpec, theta: &ParameterVector<T>, data: &[WindowPair<T>]) -> Result<T> {
    loss_with(spec, theta, data, Reduction::Sum)
}

/// Mean squared error over `data`.
pub fn mean_loss<T: Scalar>(spec: &LearnerSpec, theta: &ParameterVector<T>, data: &[WindowPair<T>]) -> Result<T> {
    loss_with(spec, theta, data, Reduction::Mean)
}

/// Loss and its exact gradient in one pass.
pub fn loss_and_gradient<T: Scalar>(
    spec: &LearnerSpec,
    theta: &ParameterVector<T>,
    data: &[WindowPair<T>],
    reduction: Reduction,
) -> Result<(T, ParameterVector<T>)> {
    check_data(spec, theta, data)?;
    let scale = match reduction {
        Reduction::Sum => T::one(),
        Reduction::Mean => T::one() / T::of(data.len() as f64),
    };
    let mut grad = ParameterVector::zeros(theta.len());
    let th = theta.as_slice();
    let g = grad.as_mut_slice();
    let mut total = T::zero();
    for p in data {
        total += match spec.family {
            LearnerFamily::Linear => linear::accumulate(th, &p.x, p.y, scale, g),
            LearnerFamily::Mlp => mlp::accumulate(th, spec.width, &p.x, p.y, scale, g),
            LearnerFamily::Recurrent => gru::accumulate(th, spec.width, &p.x, p.y, scale, g),
        };
    }
    Ok((total * scale, grad))
}

/// Gradient of the summed squared-error loss.
pub fn gradient<T: Scalar>(
    spec: &LearnerSpec,
    theta: &ParameterVector<T>,
    data: &[WindowPair<T>],
) -> Result<ParameterVector<T>> {
    loss_and_gradient(spec, theta, data, Reduction::Sum).map(|(_, g)| g)
}
