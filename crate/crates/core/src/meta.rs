//! First-order episodic meta-training, fine-tuning and pipeline evaluation.
//!
//! One meta-iteration samples `N` source tasks and `K` support/query pairs from
//! each. For every task the parameters are adapted by plain gradient descent
//! on the support loss, `θ'_k = θ - α ∇L_support(θ)`. The outer gradient is the
//! sum of query-loss gradients taken at each `θ'_k`, treating `dθ'/dθ` as the
//! identity, and is applied to `θ` with the configured optimizer at rate `β`.
//! After meta-training the parameters are fine-tuned on the target task's
//! validation slice for `n_g` optimizer steps at rate `γ`.
//!
//! Support, query and meta losses are summed squared errors. Fine-tuning and
//! reported MSEs use the per-pair mean.

use std::time::Instant;

use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::data::{DataBundle, TaskDataset, WindowPair};
use crate::error::{Error, Result};
use crate::learners::{
    init_params, loss_and_gradient, loss_with, mean_loss, LearnerSpec, OptimizerKind, OptimizerState,
    ParameterVector, Reduction,
};
use crate::pipeline::{EvaluationRecord, PipelineConfig, LR_MAX, LR_MIN};
use crate::rng::{rng_for, streams};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetaConfig<T> {
    /// Inner-loop rate.
    pub alpha: T,
    /// Outer-loop rate.
    pub beta: T,
    /// Fine-tuning rate.
    pub gamma: T,
    /// Used for outer and fine-tuning steps; the inner step is always plain descent.
    pub optimizer: OptimizerKind,
    pub tasks_per_batch: usize,
    /// Pairs drawn from each support and query set per episode; `None` uses them all.
    pub shots: Option<usize>,
    pub meta_iterations: usize,
    pub finetune_steps: usize,
    pub inner_steps: usize,
    /// Reduction of each task's support and query loss.
    #[serde(default)]
    pub reduction: Reduction,
}

impl<T: Scalar> MetaConfig<T> {
    pub fn validate(&self, n_tasks: usize) -> Result<()> {
        for (name, v) in [("alpha", self.alpha), ("beta", self.beta), ("gamma", self.gamma)] {
            let v = v.as_f64();
            if !(LR_MIN..=LR_MAX).contains(&v) {
                return Err(Error::invalid(format!(
                    "{name} = {v} is outside [{LR_MIN}, {LR_MAX}]"
                )));
            }
        }
        if self.meta_iterations > 0 && !(1..=n_tasks).contains(&self.tasks_per_batch) {
            return Err(Error::invalid(format!(
                "tasks_per_batch = {} must lie in [1, {n_tasks}]",
                self.tasks_per_batch
            )));
        }
        if self.shots == Some(0) {
            return Err(Error::invalid("shots must be at least 1"));
        }
        if self.finetune_steps == 0 {
            return Err(Error::invalid("finetune_steps must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetaResult<T> {
    /// Parameters after meta-training.
    pub theta_hat: ParameterVector<T>,
    /// Parameters after fine-tuning.
    pub theta_star: ParameterVector<T>,
    pub val_mse: T,
    /// `(iteration, meta-loss)`, iterations numbered from 1.
    pub train_curve: Vec<(usize, T)>,
}

/// `steps` plain gradient-descent updates on the support loss.
pub fn inner_adapt<T: Scalar>(
    spec: &LearnerSpec,
    theta: &ParameterVector<T>,
    support: &[WindowPair<T>],
    alpha: T,
    steps: usize,
    reduction: Reduction,
) -> Result<ParameterVector<T>> {
    if support.is_empty() {
        return Err(Error::invalid("support set is empty"));
    }
    if !(alpha > T::zero()) {
        return Err(Error::invalid("inner learning rate must be positive"));
    }
    let mut adapted = theta.clone();
    for _ in 0..steps {
        let (_, g) = loss_and_gradient(spec, &adapted, support, reduction)?;
        g.ensure_finite("support gradient")?;
        adapted.axpy(-alpha, &g);
        adapted.ensure_finite("adapted parameter")?;
    }
    Ok(adapted)
}

/// Sum over tasks of each adapted parameter vector's query loss.
pub fn meta_loss<T: Scalar>(
    spec: &LearnerSpec,
    adapted: &[(ParameterVector<T>, &[WindowPair<T>])],
    reduction: Reduction,
) -> Result<T> {
    if adapted.is_empty() {
        return Err(Error::invalid("meta loss needs at least one task"));
    }
    adapted
        .iter()
        .map(|(theta, query)| loss_with(spec, theta, query, reduction))
        .sum()
}

/// In-place outer step; returns the meta-loss evaluated at the adapted parameters.
pub fn outer_step_in_place<T: Scalar>(
    spec: &LearnerSpec,
    theta: &mut ParameterVector<T>,
    tasks: &[TaskDataset<T>],
    cfg: &MetaConfig<T>,
    state: &mut OptimizerState<T>,
) -> Result<T> {
    if tasks.is_empty() {
        return Err(Error::invalid("outer step needs at least one task"));
    }
    let mut outer = ParameterVector::zeros(theta.len());
    let mut total = T::zero();
    for task in tasks {
        let adapted = inner_adapt(spec, theta, &task.support, cfg.alpha, cfg.inner_steps, cfg.reduction)?;
        if task.query.is_empty() {
            return Err(Error::invalid(format!("task `{}` has an empty query set", task.task_id)));
        }
        let (l, g) = loss_and_gradient(spec, &adapted, &task.query, cfg.reduction)?;
        total += l;
        outer.axpy(T::one(), &g);
    }
    state.apply(theta, &outer, cfg.beta)?;
    Ok(total)
}

/// Pure outer step: `(θ̂, optimizer state', meta-loss)`.
pub fn outer_step<T: Scalar>(
    spec: &LearnerSpec,
    theta: &ParameterVector<T>,
    tasks: &[TaskDataset<T>],
    cfg: &MetaConfig<T>,
    state: &OptimizerState<T>,
) -> Result<(ParameterVector<T>, OptimizerState<T>, T)> {
    let mut next = theta.clone();
    let mut next_state = state.clone();
    let l = outer_step_in_place(spec, &mut next, tasks, cfg, &mut next_state)?;
    Ok((next, next_state, l))
}

fn sample_pairs<T: Scalar>(pairs: &[WindowPair<T>], k: Option<usize>, rng: &mut crate::rng::Rng) -> Vec<WindowPair<T>> {
    match k {
        Some(k) if k < pairs.len() => index::sample(rng, pairs.len(), k)
            .into_iter()
            .map(|i| pairs[i].clone())
            .collect(),
        _ => pairs.to_vec(),
    }
}

/// Runs `cfg.meta_iterations` outer steps from `init`.
pub fn meta_train<T: Scalar>(
    spec: &LearnerSpec,
    cfg: &MetaConfig<T>,
    tasks: &[TaskDataset<T>],
    init: ParameterVector<T>,
    seed: u64,
) -> Result<(ParameterVector<T>, Vec<(usize, T)>)> {
    spec.validate()?;
    init.check_len(spec)?;
    cfg.validate(tasks.len())?;
    let mut rng = rng_for(seed, streams::META);
    let mut theta = init;
    let mut state = OptimizerState::new(cfg.optimizer, theta.len());
    let mut curve = Vec::with_capacity(cfg.meta_iterations);
    for it in 1..=cfg.meta_iterations {
        let picked = index::sample(&mut rng, tasks.len(), cfg.tasks_per_batch);
        let episode: Vec<TaskDataset<T>> = picked
            .into_iter()
            .map(|i| {
                let t = &tasks[i];
                let support = sample_pairs(&t.support, cfg.shots, &mut rng);
                let query = sample_pairs(&t.query, cfg.shots, &mut rng);
                TaskDataset {
                    task_id: t.task_id.clone(),
                    support,
                    query,
                }
            })
            .collect();
        let l = outer_step_in_place(spec, &mut theta, &episode, cfg, &mut state)?;
        curve.push((it, l));
    }
    Ok((theta, curve))
}

/// `steps` optimizer steps on the mean validation loss.
pub fn fine_tune<T: Scalar>(
    spec: &LearnerSpec,
    theta_hat: &ParameterVector<T>,
    validation: &[WindowPair<T>],
    gamma: T,
    steps: usize,
    optimizer: OptimizerKind,
) -> Result<ParameterVector<T>> {
    if steps == 0 {
        return Err(Error::invalid("fine-tuning needs at least one step"));
    }
    let mut theta = theta_hat.clone();
    let mut state = OptimizerState::new(optimizer, theta.len());
    for _ in 0..steps {
        let (_, g) = loss_and_gradient(spec, &theta, validation, Reduction::Mean)?;
        state.apply(&mut theta, &g, gamma)?;
    }
    Ok(theta)
}

/// Lower-level settings that are not part of the searched pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalSettings {
    /// Capped at the number of source tasks.
    pub tasks_per_batch: usize,
    pub shots: Option<usize>,
    pub meta_iterations: usize,
    pub finetune_steps: usize,
    pub inner_steps: usize,
    pub reduction: Reduction,
    /// Measure wall time; off by default so outputs stay byte-reproducible.
    pub record_wall_time: bool,
}

impl Default for EvalSettings {
    fn default() -> Self {
        Self {
            tasks_per_batch: 4,
            shots: Some(10),
            meta_iterations: 100,
            finetune_steps: 1,
            inner_steps: 1,
            reduction: Reduction::Mean,
            record_wall_time: false,
        }
    }
}

impl EvalSettings {
    pub fn meta_config<T: Scalar>(&self, config: &PipelineConfig, n_tasks: usize) -> MetaConfig<T> {
        MetaConfig {
            alpha: T::of(config.alpha),
            beta: T::of(config.beta),
            gamma: T::of(config.gamma),
            optimizer: config.optimizer,
            tasks_per_batch: self.tasks_per_batch.min(n_tasks).max(1),
            shots: config.shots.or(self.shots),
            meta_iterations: self.meta_iterations,
            finetune_steps: self.finetune_steps,
            inner_steps: self.inner_steps,
            reduction: self.reduction,
        }
    }
}

/// Everything a single lower-level run produces.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineRun<T> {
    pub spec: LearnerSpec,
    pub result: MetaResult<T>,
    pub test_mse: T,
}

/// Meta-trains on the source tasks, fine-tunes on the validation slice and
/// scores the test slice.
pub fn run_pipeline<T: Scalar>(
    config: &PipelineConfig,
    bundle: &DataBundle<T>,
    settings: &EvalSettings,
    seed: u64,
) -> Result<PipelineRun<T>> {
    let spec = config.learner_spec(bundle.window);
    spec.validate()?;
    if bundle.train_tasks.is_empty() && settings.meta_iterations > 0 {
        return Err(Error::invalid("meta-training needs at least one source task"));
    }
    let cfg: MetaConfig<T> = settings.meta_config(config, bundle.train_tasks.len());
    let init = init_params(&spec, seed);
    let (theta_hat, train_curve) = meta_train(&spec, &cfg, &bundle.train_tasks, init, seed)?;
    finish(spec, theta_hat, train_curve, bundle, &cfg)
}

/// Trains from scratch on the validation slice alone, mirroring the meta
/// schedule: `meta_iterations` steps at rate `β`, then `finetune_steps` at `γ`.
/// Source tasks are ignored.
pub fn run_vanilla<T: Scalar>(
    config: &PipelineConfig,
    bundle: &DataBundle<T>,
    settings: &EvalSettings,
    seed: u64,
) -> Result<PipelineRun<T>> {
    let spec = config.learner_spec(bundle.window);
    spec.validate()?;
    let mut cfg: MetaConfig<T> = settings.meta_config(config, bundle.train_tasks.len());
    cfg.validate(bundle.train_tasks.len().max(1))?;
    let mut theta_hat = init_params(&spec, seed);
    if cfg.meta_iterations > 0 {
        if bundle.validation.is_empty() {
            return Err(Error::invalid("bundle needs a non-empty validation slice"));
        }
        theta_hat = fine_tune(
            &spec,
            &theta_hat,
            &bundle.validation,
            cfg.beta,
            cfg.meta_iterations,
            cfg.optimizer,
        )?;
    }
    cfg.meta_iterations = 0;
    finish(spec, theta_hat, Vec::new(), bundle, &cfg)
}

fn finish<T: Scalar>(
    spec: LearnerSpec,
    theta_hat: ParameterVector<T>,
    train_curve: Vec<(usize, T)>,
    bundle: &DataBundle<T>,
    cfg: &MetaConfig<T>,
) -> Result<PipelineRun<T>> {
    if bundle.validation.is_empty() || bundle.test.is_empty() {
        return Err(Error::invalid("bundle needs non-empty validation and test slices"));
    }
    let theta_star = fine_tune(
        &spec,
        &theta_hat,
        &bundle.validation,
        cfg.gamma,
        cfg.finetune_steps,
        cfg.optimizer,
    )?;
    let val_mse = mean_loss(&spec, &theta_star, &bundle.validation)?;
    let test_mse = mean_loss(&spec, &theta_star, &bundle.test)?;
    if !val_mse.is_finite() || !test_mse.is_finite() {
        return Err(Error::Numeric {
            index: 0,
            message: "evaluation produced a non-finite MSE".into(),
        });
    }
    Ok(PipelineRun {
        spec,
        result: MetaResult {
            theta_hat,
            theta_star,
            val_mse,
            train_curve,
        },
        test_mse,
    })
}

/// [`run_pipeline`] folded into an [`EvaluationRecord`]; lower-level errors
/// become failed records.
pub fn evaluate_pipeline<T: Scalar>(
    config: &PipelineConfig,
    bundle: &DataBundle<T>,
    settings: &EvalSettings,
    seed: u64,
) -> EvaluationRecord {
    let start = settings.record_wall_time.then(Instant::now);
    let outcome = config
        .validate()
        .and_then(|_| run_pipeline(config, bundle, settings, seed));
    let mut record = match outcome {
        Ok(run) => EvaluationRecord::success(
            config.clone(),
            run.result.val_mse.as_f64(),
            run.test_mse.as_f64(),
            seed,
        ),
        Err(_) => EvaluationRecord::failure(config.clone(), seed),
    };
    if let Some(start) = start {
        record.wall_time_ms = start.elapsed().as_millis() as u64;
    }
    record
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::{gradient, LearnerFamily};

    fn pair(x: &[f64], y: f64) -> WindowPair<f64> {
        WindowPair { x: x.to_vec(), y }
    }

    fn cfg(alpha: f64, beta: f64) -> MetaConfig<f64> {
        MetaConfig {
            alpha,
            beta,
            gamma: 0.05,
            optimizer: OptimizerKind::Sgd,
            tasks_per_batch: 1,
            shots: None,
            meta_iterations: 1,
            finetune_steps: 1,
            inner_steps: 1,
            reduction: Reduction::Sum,
        }
    }

    #[test]
    fn inner_adapt_by_hand() {
        let spec = LearnerSpec::linear(1);
        let theta = ParameterVector::zeros(2);
        let out = inner_adapt(&spec, &theta, &[pair(&[1.0], 1.0)], 0.1, 1, Reduction::Sum).unwrap();
        assert!((out[0] - 0.2).abs() < 1e-15 && (out[1] - 0.2).abs() < 1e-15);
        assert!(inner_adapt(&spec, &theta, &[pair(&[1.0], 1.0)], 0.0, 1, Reduction::Sum).is_err());
        assert!(inner_adapt(&spec, &theta, &[], 0.1, 1, Reduction::Sum).is_err());
    }

    #[test]
    fn inner_adapt_at_optimum_is_identity() {
        let spec = LearnerSpec::linear(1);
        let theta = ParameterVector::from_vec(vec![2.0, 1.0]);
        let out = inner_adapt(&spec, &theta, &[pair(&[1.0], 3.0)], 0.1, 3, Reduction::Sum).unwrap();
        assert_eq!(out, theta);
    }

    #[test]
    fn meta_loss_sums() {
        let spec = LearnerSpec::linear(1);
        let zero = ParameterVector::zeros(2);
        let q1 = [pair(&[0.0], 1.0)];
        let q2 = [pair(&[0.0], 2.0)];
        let l = meta_loss(&spec, &[(zero.clone(), &q1[..]), (zero.clone(), &q2[..])], Reduction::Sum).unwrap();
        assert_eq!(l, 5.0);
        let single = meta_loss(&spec, &[(zero.clone(), &q2[..])], Reduction::Sum).unwrap();
        assert_eq!(single, crate::learners::loss(&spec, &zero, &q2).unwrap());
        assert!(meta_loss::<f64>(&spec, &[], Reduction::Sum).is_err());
    }

    #[test]
    fn outer_step_two_stage_by_hand() {
        // θ = (w, b) = (0, 0); support ([1], 1); query ([2], 0).
        // θ' = θ - 0.1 * (-2, -2) = (0.2, 0.2)
        // query residual = 0.2*2 + 0.2 - 0 = 0.6; ∇ = (2*0.6*2, 2*0.6) = (2.4, 1.2)
        // θ̂ = θ - 0.01 * (2.4, 1.2) = (-0.024, -0.012); meta loss = 0.36
        let spec = LearnerSpec::linear(1);
        let task = TaskDataset {
            task_id: "t".into(),
            support: vec![pair(&[1.0], 1.0)],
            query: vec![pair(&[2.0], 0.0)],
        };
        let state = OptimizerState::new(OptimizerKind::Sgd, 2);
        let (next, _, l) =
            outer_step(&spec, &ParameterVector::zeros(2), &[task.clone()], &cfg(0.1, 0.01), &state).unwrap();
        assert!((next[0] + 0.024).abs() < 1e-15);
        assert!((next[1] + 0.012).abs() < 1e-15);
        assert!((l - 0.36).abs() < 1e-15);

        // duplicating the task doubles the step
        let (twice, _, l2) = outer_step(
            &spec,
            &ParameterVector::zeros(2),
            &[task.clone(), task],
            &cfg(0.1, 0.01),
            &state,
        )
        .unwrap();
        assert!((twice[0] - 2.0 * next[0]).abs() < 1e-15);
        assert!((twice[1] - 2.0 * next[1]).abs() < 1e-15);
        assert!((l2 - 2.0 * l).abs() < 1e-15);
    }

    #[test]
    fn outer_step_with_zero_query_gradient_keeps_theta() {
        let spec = LearnerSpec::linear(1);
        // support optimum already reached, query fit exactly
        let theta = ParameterVector::from_vec(vec![1.0, 0.0]);
        let task = TaskDataset {
            task_id: "t".into(),
            support: vec![pair(&[1.0], 1.0)],
            query: vec![pair(&[3.0], 3.0)],
        };
        let state = OptimizerState::new(OptimizerKind::Sgd, 2);
        let (next, _, l) = outer_step(&spec, &theta, &[task], &cfg(0.1, 0.1), &state).unwrap();
        assert_eq!(next, theta);
        assert_eq!(l, 0.0);
    }

    fn toy_tasks(n: usize) -> Vec<TaskDataset<f64>> {
        (0..n)
            .map(|t| TaskDataset {
                task_id: format!("t{t}"),
                support: (0..12).map(|i| pair(&[i as f64 / 12.0], 0.5 * i as f64 / 12.0 + 0.1 * t as f64)).collect(),
                query: (0..4).map(|i| pair(&[i as f64 / 4.0], 0.5 * i as f64 / 4.0 + 0.1 * t as f64)).collect(),
            })
            .collect()
    }

    #[test]
    fn meta_train_zero_iterations_and_determinism() {
        let spec = LearnerSpec::linear(1);
        let tasks = toy_tasks(3);
        let init = init_params::<f64>(&spec, 1);
        let mut c = cfg(0.01, 0.01);
        c.meta_iterations = 0;
        let (theta, curve) = meta_train(&spec, &c, &tasks, init.clone(), 5).unwrap();
        assert_eq!(theta, init);
        assert!(curve.is_empty());

        c.meta_iterations = 20;
        c.tasks_per_batch = 2;
        c.shots = Some(3);
        let a = meta_train(&spec, &c, &tasks, init.clone(), 5).unwrap();
        let b = meta_train(&spec, &c, &tasks, init.clone(), 5).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.1.len(), 20);
        assert_eq!(a.1[0].0, 1);
    }

    #[test]
    fn meta_train_single_task_equals_outer_step() {
        let spec = LearnerSpec::linear(1);
        let tasks = toy_tasks(1);
        let init = init_params::<f64>(&spec, 2);
        let c = cfg(0.01, 0.01);
        let (theta, curve) = meta_train(&spec, &c, &tasks, init.clone(), 9).unwrap();
        let state = OptimizerState::new(OptimizerKind::Sgd, 2);
        let (expected, _, l) = outer_step(&spec, &init, &tasks, &c, &state).unwrap();
        assert_eq!(theta, expected);
        assert_eq!(curve, vec![(1, l)]);
    }

    #[test]
    fn meta_train_rejects_bad_config() {
        let spec = LearnerSpec::linear(1);
        let tasks = toy_tasks(2);
        let init = init_params::<f64>(&spec, 2);
        let mut c = cfg(0.01, 0.01);
        c.tasks_per_batch = 3;
        assert!(meta_train(&spec, &c, &tasks, init.clone(), 1).is_err());
        let mut c = cfg(0.9, 0.01);
        c.tasks_per_batch = 1;
        assert!(meta_train(&spec, &c, &tasks, init, 1).is_err());
    }

    #[test]
    fn fine_tune_single_step_by_hand() {
        // mean loss over one pair: ∇ = 2 r (x, 1) with r = w + b - 1 = -1
        let spec = LearnerSpec::linear(1);
        let out = fine_tune(&spec, &ParameterVector::zeros(2), &[pair(&[1.0], 1.0)], 0.05, 1, OptimizerKind::Sgd).unwrap();
        assert!((out[0] - 0.1).abs() < 1e-15 && (out[1] - 0.1).abs() < 1e-15);
        // mean over two pairs halves each pair's contribution
        let data = [pair(&[1.0], 1.0), pair(&[2.0], 0.0)];
        let out = fine_tune(&spec, &ParameterVector::zeros(2), &data, 0.05, 1, OptimizerKind::Sgd).unwrap();
        let g = gradient(&spec, &ParameterVector::zeros(2), &data).unwrap();
        assert!((out[0] + 0.05 * g[0] / 2.0).abs() < 1e-15);
        assert!((out[1] + 0.05 * g[1] / 2.0).abs() < 1e-15);
    }

    #[test]
    fn fine_tune_at_optimum_is_identity() {
        let spec = LearnerSpec::linear(1);
        let theta = ParameterVector::from_vec(vec![2.0, -1.0]);
        let out = fine_tune(&spec, &theta, &[pair(&[1.0], 1.0)], 0.05, 4, OptimizerKind::Sgd).unwrap();
        assert_eq!(out, theta);
        assert!(fine_tune(&spec, &theta, &[pair(&[1.0], 1.0)], 0.05, 0, OptimizerKind::Sgd).is_err());
    }

    #[test]
    fn evaluate_failure_becomes_record() {
        let tasks = toy_tasks(2);
        let bundle = DataBundle {
            train_tasks: tasks.clone(),
            validation: tasks[0].support.clone(),
            test: tasks[0].query.clone(),
            target_id: "x".into(),
            target_normalization: None,
            window: 1,
        };
        let mut c = PipelineConfig::fixed_default(LearnerFamily::Linear);
        c.beta = 0.5;
        c.alpha = 0.5;
        let settings = EvalSettings {
            meta_iterations: 5,
            ..EvalSettings::default()
        };
        let ok = evaluate_pipeline(&PipelineConfig::fixed_default(LearnerFamily::Linear), &bundle, &settings, 1);
        assert_eq!(ok.status, crate::pipeline::Status::Ok);
        let mut bad = PipelineConfig::fixed_default(LearnerFamily::Linear);
        bad.alpha = 2.0;
        let rec = evaluate_pipeline(&bad, &bundle, &settings, 1);
        assert_eq!(rec.status, crate::pipeline::Status::Failed);
        assert_eq!(rec.test_mse, None);
    }
}
