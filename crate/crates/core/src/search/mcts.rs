//! The search loop: descend, expand, roll out, evaluate, back-propagate.

use serde::{Deserialize, Serialize};

use super::space::SearchSpace;
use super::tree::{backpropagate, maybe_expand, reward_from_mse, rollout, select, NodeId, SearchTree, ROOT};
use crate::data::DataBundle;
use crate::error::{Error, Result};
use crate::meta::{evaluate_pipeline, EvalSettings};
use crate::pipeline::{EvaluationRecord, PipelineConfig};
use crate::rng::{rng_for, split, streams};
use crate::scalar::Scalar;

/// Scores one complete configuration. Failures are returned as failed records.
pub trait Evaluator {
    fn evaluate(&mut self, config: &PipelineConfig, seed: u64) -> EvaluationRecord;
}

impl<F> Evaluator for F
where
    F: FnMut(&PipelineConfig, u64) -> EvaluationRecord,
{
    fn evaluate(&mut self, config: &PipelineConfig, seed: u64) -> EvaluationRecord {
        self(config, seed)
    }
}

/// Meta-trains and scores configurations on a data bundle.
pub struct PipelineEvaluator<'a, T> {
    pub bundle: &'a DataBundle<T>,
    pub settings: EvalSettings,
}

impl<'a, T> PipelineEvaluator<'a, T> {
    pub fn new(bundle: &'a DataBundle<T>, settings: EvalSettings) -> Self {
        Self { bundle, settings }
    }
}

impl<T: Scalar> Evaluator for PipelineEvaluator<'_, T> {
    fn evaluate(&mut self, config: &PipelineConfig, seed: u64) -> EvaluationRecord {
        evaluate_pipeline(config, self.bundle, &self.settings, seed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchTrajectory {
    pub records: Vec<EvaluationRecord>,
    /// Running minimum test MSE after each iteration.
    pub best_so_far: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct SearchOutcome {
    /// Lowest-test-MSE record, earliest on ties; `None` if every evaluation failed.
    pub best: Option<EvaluationRecord>,
    pub trajectory: SearchTrajectory,
    pub tree: SearchTree,
    /// Node path and reward of each iteration.
    pub paths: Vec<(Vec<NodeId>, f64)>,
}

impl SearchOutcome {
    pub fn best_config(&self) -> Option<&PipelineConfig> {
        self.best.as_ref().map(|r| &r.config)
    }
}

/// Walks from the root to the node whose prefix the rollout will complete.
fn descend(tree: &mut SearchTree, space: &SearchSpace, rng: &mut crate::rng::Rng) -> Result<Vec<NodeId>> {
    let mut path = vec![ROOT];
    let mut node = ROOT;
    while tree.node(node).level < space.depth() {
        if let Some(child) = maybe_expand(tree, node, space, rng) {
            path.push(child);
            break;
        }
        if tree.node(node).children.is_empty() {
            break;
        }
        node = select(tree, node, space.c_uct, rng)?;
        path.push(node);
    }
    Ok(path)
}

/// Runs `budget` iterations. The tree policy draws from the `TREE` stream of
/// `seed`; every evaluation receives the same `EVAL` child seed so a
/// configuration's score does not depend on when it is visited.
pub fn search<E: Evaluator + ?Sized>(
    space: &SearchSpace,
    budget: usize,
    seed: u64,
    evaluator: &mut E,
) -> Result<SearchOutcome> {
    if budget == 0 {
        return Err(Error::invalid("search budget must be at least 1"));
    }
    let mut rng = rng_for(seed, streams::TREE);
    let eval_seed = split(seed, streams::EVAL);
    let mut tree = SearchTree::new();
    let mut records = Vec::with_capacity(budget);
    let mut paths = Vec::with_capacity(budget);
    for iteration in 1..=budget {
        let path = descend(&mut tree, space, &mut rng)?;
        let leaf = *path.last().expect("path holds the root");
        let config = rollout(&tree.prefix(leaf), space, &mut rng)?;
        let mut record = evaluator.evaluate(&config, eval_seed);
        record.iteration = iteration;
        let reward = reward_from_mse(record.objective())?;
        backpropagate(&mut tree, &path, reward, &config)?;
        records.push(record);
        paths.push((path, reward));
    }
    let best = records
        .iter()
        .filter_map(|r| r.objective().map(|m| (m, r)))
        .fold(None::<(f64, &EvaluationRecord)>, |acc, (m, r)| match acc {
            Some((b, _)) if b <= m => acc,
            _ => Some((m, r)),
        })
        .map(|(_, r)| r.clone());
    let best_so_far = crate::stats::best_so_far(&records)?;
    Ok(SearchOutcome {
        best,
        trajectory: SearchTrajectory { records, best_so_far },
        tree,
        paths,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::LearnerFamily;

    fn space() -> SearchSpace {
        SearchSpace::build(LearnerFamily::Mlp, 3, 0.5, 1.0).unwrap()
    }

    fn bowl(target: &'static [usize]) -> impl FnMut(&PipelineConfig, u64) -> EvaluationRecord {
        move |c, seed| {
            let d: f64 = c
                .choices
                .iter()
                .zip(target)
                .map(|(&a, &b)| (a as f64 - b as f64).powi(2))
                .sum();
            EvaluationRecord::success(c.clone(), d, d, seed)
        }
    }

    #[test]
    fn budget_one() {
        let mut ev = bowl(&[0, 0, 0, 0, 0]);
        let out = search(&space(), 1, 9, &mut ev).unwrap();
        assert_eq!(out.trajectory.records.len(), 1);
        assert_eq!(out.best_config(), Some(&out.trajectory.records[0].config));
        assert!(search(&space(), 0, 9, &mut ev).is_err());
    }

    #[test]
    fn deterministic_and_monotone() {
        let mut ev = bowl(&[1, 2, 0, 1, 3]);
        let a = search(&space(), 60, 4, &mut ev).unwrap();
        let b = search(&space(), 60, 4, &mut ev).unwrap();
        assert_eq!(a.trajectory, b.trajectory);
        assert!(a.trajectory.best_so_far.windows(2).all(|w| w[1] <= w[0]));
        let iters: Vec<usize> = a.trajectory.records.iter().map(|r| r.iteration).collect();
        assert_eq!(iters, (1..=60).collect::<Vec<_>>());
    }

    #[test]
    fn failures_never_abort() {
        let mut ev = |c: &PipelineConfig, s| EvaluationRecord::failure(c.clone(), s);
        let out = search(&space(), 10, 1, &mut ev).unwrap();
        assert!(out.best.is_none());
        assert_eq!(out.tree.node(ROOT).total_reward, 0.0);
        assert!(out.trajectory.best_so_far.iter().all(|b| b.is_infinite()));
    }
}
