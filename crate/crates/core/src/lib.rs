//! Automated forecasting-pipeline search: windowed task data, small learners
//! trained by first-order meta-learning, a Monte Carlo tree search over their
//! hyper-parameters, and the statistics used to compare runs.
//!
//! The numeric core is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix it to `f64`.

pub mod data;
pub mod error;
pub mod learners;
pub mod meta;
pub mod pipeline;
pub mod rng;
pub mod scalar;
pub mod search;
pub mod stats;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Series = data::TimeSeries<f64>;
pub type Window = data::WindowPair<f64>;
pub type Task = data::TaskDataset<f64>;
pub type Bundle = data::DataBundle<f64>;
pub type Params = learners::ParameterVector<f64>;
pub type Meta = meta::MetaConfig<f64>;
pub type Trained = meta::MetaResult<f64>;
