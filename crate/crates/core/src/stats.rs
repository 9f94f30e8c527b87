//! Error metrics, the Wilcoxon signed-rank test, the Vargha-Delaney A12 effect
//! size and search-trajectory analytics.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::pipeline::EvaluationRecord;
use crate::scalar::Scalar;

pub const SIGNIFICANCE_LEVEL: f64 = 0.05;
/// Largest number of non-zero differences for which the exact null
/// distribution is enumerated.
pub const EXACT_CUTOFF: usize = 12;

pub fn mse<T: Scalar>(y: &[T], y_hat: &[T]) -> Result<T> {
    if y.is_empty() || y.len() != y_hat.len() {
        return Err(Error::invalid(format!(
            "mse needs equal non-zero lengths, got {} and {}",
            y.len(),
            y_hat.len()
        )));
    }
    let sum: T = y.iter().zip(y_hat).map(|(&a, &b)| (a - b) * (a - b)).sum();
    Ok(sum / T::of(y.len() as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EffectCategory {
    Equal,
    Small,
    Medium,
    Large,
    /// The second sample tends to be larger; swap the arguments to grade it.
    BelowHalf,
}

impl EffectCategory {
    pub const ALL: [EffectCategory; 5] = [
        EffectCategory::Large,
        EffectCategory::Medium,
        EffectCategory::Small,
        EffectCategory::Equal,
        EffectCategory::BelowHalf,
    ];

    /// `large ≥ 0.71 > medium ≥ 0.64 > small ≥ 0.56 > equal > 0.44 ≥ below_half`.
    pub fn from_value(v: f64) -> Self {
        if v >= 0.71 {
            EffectCategory::Large
        } else if v >= 0.64 {
            EffectCategory::Medium
        } else if v >= 0.56 {
            EffectCategory::Small
        } else if v > 0.44 {
            EffectCategory::Equal
        } else {
            EffectCategory::BelowHalf
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectSize {
    pub value: f64,
    pub category: EffectCategory,
}

/// Vargha-Delaney A12: probability that a draw from `a` exceeds a draw from
/// `b`, ties counting one half.
///
/// Larger values of `a` count as better. To compare error metrics, pass the
/// negated errors (or swap the arguments).
pub fn a12<T: Scalar>(a: &[T], b: &[T]) -> Result<EffectSize> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::invalid("a12 needs two non-empty samples"));
    }
    if a.iter().chain(b).any(|v| v.is_nan()) {
        return Err(Error::invalid("a12 samples contain NaN"));
    }
    let mut sorted = b.to_vec();
    sorted.sort_by(|x, y| x.partial_cmp(y).expect("no NaN"));
    let (mut greater, mut ties) = (0u64, 0u64);
    for &ai in a {
        let below = sorted.partition_point(|&bj| bj < ai);
        let not_above = sorted.partition_point(|&bj| bj <= ai);
        greater += below as u64;
        ties += (not_above - below) as u64;
    }
    let value = (2 * greater + ties) as f64 / (2 * a.len() as u64 * b.len() as u64) as f64;
    Ok(EffectSize {
        value,
        category: EffectCategory::from_value(value),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestOutcome {
    /// `min(W+, W-)`.
    pub statistic: f64,
    pub p_value: f64,
    pub significant: bool,
    /// Number of non-zero paired differences.
    pub n_effective: usize,
}

impl TestOutcome {
    fn new(statistic: f64, p_value: f64, n_effective: usize) -> Self {
        let p_value = p_value.clamp(0.0, 1.0);
        Self {
            statistic,
            p_value,
            significant: p_value < SIGNIFICANCE_LEVEL,
            n_effective,
        }
    }
}

/// Average ranks of `values` (ascending, 1-based), doubled so they are integers.
fn doubled_ranks(values: &[f64]) -> Vec<u64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut ranks = vec![0u64; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start;
        while end + 1 < order.len() && values[order[end + 1]] == values[order[start]] {
            end += 1;
        }
        // positions start..=end hold ranks start+1..=end+1; their mean, doubled
        let doubled = (start + end + 2) as u64;
        for &k in &order[start..=end] {
            ranks[k] = doubled;
        }
        start = end + 1;
    }
    ranks
}

/// Two-sided Wilcoxon signed-rank test on paired samples.
///
/// Zero differences are dropped and tied magnitudes share their average rank.
/// Up to [`EXACT_CUTOFF`] non-zero differences the p-value comes from the
/// exact null distribution of the rank sum; beyond that a normal
/// approximation with tie and continuity corrections is used. If every
/// difference is zero the outcome is `p = 1`, `n_effective = 0`.
pub fn wilcoxon_signed_rank<T: Scalar>(a: &[T], b: &[T]) -> Result<TestOutcome> {
    if a.is_empty() || a.len() != b.len() {
        return Err(Error::invalid(format!(
            "paired samples need equal non-zero lengths, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    let diffs: Vec<f64> = a
        .iter()
        .zip(b)
        .map(|(&x, &y)| (x - y).as_f64())
        .collect();
    if diffs.iter().any(|d| d.is_nan()) {
        return Err(Error::invalid("paired samples contain NaN"));
    }
    let nonzero: Vec<f64> = diffs.into_iter().filter(|&d| d != 0.0).collect();
    let n = nonzero.len();
    if n == 0 {
        return Ok(TestOutcome::new(0.0, 1.0, 0));
    }
    let magnitudes: Vec<f64> = nonzero.iter().map(|d| d.abs()).collect();
    let ranks = doubled_ranks(&magnitudes);
    let total: u64 = ranks.iter().sum();
    let plus: u64 = ranks
        .iter()
        .zip(&nonzero)
        .filter(|(_, &d)| d > 0.0)
        .map(|(&r, _)| r)
        .sum();
    let observed = plus.min(total - plus);
    let statistic = observed as f64 / 2.0;

    let p = if n <= EXACT_CUTOFF {
        // counts[s] = number of sign assignments with doubled W+ equal to s
        let mut counts = vec![0u64; total as usize + 1];
        counts[0] = 1;
        let mut reach = 0usize;
        for &r in &ranks {
            let r = r as usize;
            for s in (0..=reach).rev() {
                if counts[s] > 0 {
                    counts[s + r] += counts[s];
                }
            }
            reach += r;
        }
        let extreme: u64 = counts
            .iter()
            .enumerate()
            .filter(|&(s, _)| {
                let s = s as u64;
                s.min(total - s) <= observed
            })
            .map(|(_, &c)| c)
            .sum();
        extreme as f64 / (1u64 << n) as f64
    } else {
        let nf = n as f64;
        let mean = nf * (nf + 1.0) / 4.0;
        let mut tie_term = 0.0;
        let mut sorted = magnitudes.clone();
        sorted.sort_by(f64::total_cmp);
        let mut i = 0;
        while i < sorted.len() {
            let mut j = i;
            while j + 1 < sorted.len() && sorted[j + 1] == sorted[i] {
                j += 1;
            }
            let t = (j - i + 1) as f64;
            tie_term += t * t * t - t;
            i = j + 1;
        }
        let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term / 48.0;
        let w_plus = plus as f64 / 2.0;
        let z = ((w_plus - mean).abs() - 0.5).max(0.0) / var.sqrt();
        erfc(z / std::f64::consts::SQRT_2)
    };
    Ok(TestOutcome::new(statistic, p, n))
}

/// Running minimum of successful test MSEs; failures carry the previous best
/// (`+inf` before the first success).
pub fn best_so_far(records: &[EvaluationRecord]) -> Result<Vec<f64>> {
    if records.is_empty() {
        return Err(Error::invalid("trajectory is empty"));
    }
    let mut best = f64::INFINITY;
    Ok(records
        .iter()
        .map(|r| {
            if let Some(m) = r.objective() {
                best = best.min(m);
            }
            best
        })
        .collect())
}

/// First index whose value is within `tolerance` (relative) of the final value.
pub fn plateau_index(best: &[f64], tolerance: f64) -> usize {
    let Some(&last) = best.last() else {
        return 0;
    };
    best.iter()
        .position(|&b| b - last <= tolerance * last)
        .unwrap_or(best.len() - 1)
}

/// One pairwise comparison of per-seed test MSEs. A12 is oriented so that
/// values above 0.5 mean `a` has the lower error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairReport {
    pub a: String,
    pub b: String,
    pub mse_a: f64,
    pub mse_b: f64,
    pub p_value: f64,
    pub significant: bool,
    pub a12: f64,
    pub category: EffectCategory,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub pairs: Vec<PairReport>,
    /// Share of pairs per category, in percent.
    pub category_percentages: BTreeMap<EffectCategory, f64>,
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Compares two seed-aligned samples of error values.
pub fn compare_errors(label_a: &str, a: &[f64], label_b: &str, b: &[f64]) -> Result<PairReport> {
    let test = wilcoxon_signed_rank(a, b)?;
    let neg = |v: &[f64]| v.iter().map(|x| -x).collect::<Vec<_>>();
    let effect = a12(&neg(a), &neg(b))?;
    Ok(PairReport {
        a: label_a.to_string(),
        b: label_b.to_string(),
        mse_a: mean(a),
        mse_b: mean(b),
        p_value: test.p_value,
        significant: test.significant,
        a12: effect.value,
        category: effect.category,
    })
}

pub fn compare_report(pairs: Vec<PairReport>) -> CompareReport {
    let mut category_percentages: BTreeMap<EffectCategory, f64> =
        EffectCategory::ALL.iter().map(|&c| (c, 0.0)).collect();
    if !pairs.is_empty() {
        let share = 100.0 / pairs.len() as f64;
        for p in &pairs {
            *category_percentages.entry(p.category).or_default() += share;
        }
    }
    CompareReport {
        pairs,
        category_percentages,
    }
}
