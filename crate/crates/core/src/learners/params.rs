use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::spec::LearnerSpec;
use crate::error::{Error, Result};
use crate::rng::{rng_for, streams};
use crate::scalar::Scalar;

/// Flat parameter vector of a base learner; the layout comes from its [`LearnerSpec`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParameterVector<T> {
    values: Vec<T>,
}

impl<T: Scalar> ParameterVector<T> {
    pub fn zeros(len: usize) -> Self {
        Self {
            values: vec![T::zero(); len],
        }
    }

    pub fn from_vec(values: Vec<T>) -> Self {
        Self { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.values
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn into_vec(self) -> Vec<T> {
        self.values
    }

    pub fn iter(&self) -> std::slice::Iter<'_, T> {
        self.values.iter()
    }

    /// `self += scale * other`
    pub fn axpy(&mut self, scale: T, other: &Self) {
        for (a, &b) in self.values.iter_mut().zip(&other.values) {
            *a += scale * b;
        }
    }

    pub fn scaled(&self, scale: T) -> Self {
        Self {
            values: self.values.iter().map(|&v| v * scale).collect(),
        }
    }

    /// Index of the first non-finite entry, if any.
    pub fn first_non_finite(&self) -> Option<usize> {
        self.values.iter().position(|v| !v.is_finite())
    }

    pub fn ensure_finite(&self, what: &str) -> Result<()> {
        match self.first_non_finite() {
            Some(index) => Err(Error::Numeric {
                index,
                message: format!("{what} is not finite"),
            }),
            None => Ok(()),
        }
    }

    pub fn check_len(&self, spec: &LearnerSpec) -> Result<()> {
        if self.len() != spec.param_count() {
            return Err(Error::invalid(format!(
                "parameter vector has {} entries, {} learner expects {}",
                self.len(),
                spec.family,
                spec.param_count()
            )));
        }
        Ok(())
    }
}

impl<T> std::ops::Index<usize> for ParameterVector<T> {
    type Output = T;

    fn index(&self, i: usize) -> &T {
        &self.values[i]
    }
}

/// Weights uniform in `±1/sqrt(fan_in)`, biases zero.
pub fn init_params<T: Scalar>(spec: &LearnerSpec, seed: u64) -> ParameterVector<T> {
    let mut rng = rng_for(seed, streams::INIT);
    let mut values = Vec::with_capacity(spec.param_count());
    for seg in spec.layout() {
        if seg.fan_in == 0 {
            values.extend(std::iter::repeat_n(T::zero(), seg.len()));
        } else {
            let bound = 1.0 / (seg.fan_in as f64).sqrt();
            values.extend((0..seg.len()).map(|_| T::of(rng.random_range(-bound..bound))));
        }
    }
    ParameterVector { values }
}
