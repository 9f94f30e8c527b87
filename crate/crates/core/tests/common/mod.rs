//! Independent oracles shared by the integration and acceptance suites.
#![allow(dead_code)]

use autotsf::data::WindowPair;
use autotsf::learners::{loss, LearnerFamily, LearnerSpec, ParameterVector};
use autotsf::rng::Rng;
use rand::Rng as _;

pub const FD_STEP: f64 = 1e-5;
pub const FD_REL: f64 = 1e-4;
pub const FD_ABS: f64 = 1e-7;

/// Central finite-difference gradient of the summed loss.
pub fn fd_gradient(spec: &LearnerSpec, theta: &ParameterVector<f64>, data: &[WindowPair<f64>]) -> Vec<f64> {
    let mut t = theta.clone();
    (0..theta.len())
        .map(|i| {
            let v = theta[i];
            t.as_mut_slice()[i] = v + FD_STEP;
            let up = loss(spec, &t, data).unwrap();
            t.as_mut_slice()[i] = v - FD_STEP;
            let down = loss(spec, &t, data).unwrap();
            t.as_mut_slice()[i] = v;
            (up - down) / (2.0 * FD_STEP)
        })
        .collect()
}

/// Largest violation of `|a - n| <= max(REL * max(|a|, |n|), ABS)`; `<= 1` passes.
pub fn fd_violation(analytic: &[f64], numeric: &[f64]) -> f64 {
    analytic
        .iter()
        .zip(numeric)
        .map(|(&a, &n)| (a - n).abs() / (FD_REL * a.abs().max(n.abs())).max(FD_ABS))
        .fold(0.0, f64::max)
}

/// A small random learner, parameter vector and data set.
pub fn random_instance(family: LearnerFamily, rng: &mut Rng) -> (LearnerSpec, ParameterVector<f64>, Vec<WindowPair<f64>>) {
    let input_dim = rng.random_range(1..=5);
    let width = rng.random_range(1..=4);
    let spec = LearnerSpec::new(family, width, input_dim);
    let theta = ParameterVector::from_vec((0..spec.param_count()).map(|_| rng.random_range(-1.0..1.0)).collect());
    let n = rng.random_range(1..=4);
    let data = (0..n)
        .map(|_| WindowPair {
            x: (0..input_dim).map(|_| rng.random_range(-1.0..1.0)).collect(),
            y: rng.random_range(-1.0..1.0),
        })
        .collect();
    (spec, theta, data)
}

/// Two-sided signed-rank p-value by listing every sign assignment.
pub fn wilcoxon_enumerated(a: &[f64], b: &[f64]) -> (f64, usize) {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).filter(|&d| d != 0.0).collect();
    let n = d.len();
    if n == 0 {
        return (1.0, 0);
    }
    let mag: Vec<f64> = d.iter().map(|v| v.abs()).collect();
    // average ranks by counting smaller and equal magnitudes
    let ranks: Vec<f64> = mag
        .iter()
        .map(|&m| {
            let less = mag.iter().filter(|&&o| o < m).count() as f64;
            let equal = mag.iter().filter(|&&o| o == m).count() as f64;
            less + (equal + 1.0) / 2.0
        })
        .collect();
    let total: f64 = ranks.iter().sum();
    let plus: f64 = ranks.iter().zip(&d).filter(|(_, &v)| v > 0.0).map(|(r, _)| r).sum();
    let observed = plus.min(total - plus);
    let mut extreme = 0u64;
    for mask in 0u64..(1 << n) {
        let w: f64 = (0..n).filter(|&i| mask >> i & 1 == 1).map(|i| ranks[i]).sum();
        if w.min(total - w) <= observed + 1e-9 {
            extreme += 1;
        }
    }
    (extreme as f64 / (1u64 << n) as f64, n)
}

/// A12 by counting all pairs.
pub fn a12_pairs(a: &[f64], b: &[f64]) -> f64 {
    let mut wins = 0.0;
    for &x in a {
        for &y in b {
            if x > y {
                wins += 1.0;
            } else if x == y {
                wins += 0.5;
            }
        }
    }
    wins / (a.len() * b.len()) as f64
}

/// Sample of small integers as floats, so ties are common.
pub fn tied_sample(rng: &mut Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-6i32..=6) as f64).collect()
}

/// Sample of real values (ties improbable).
pub fn real_sample(rng: &mut Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}
