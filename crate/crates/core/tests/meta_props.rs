use autotsf::data::{TaskDataset, WindowPair};
use autotsf::learners::{mean_loss, LearnerSpec, OptimizerKind, ParameterVector, Reduction};
use autotsf::meta::{fine_tune, meta_loss, meta_train, MetaConfig};
use autotsf::rng::rng_for;
use proptest::prelude::*;
use rand::Rng as _;

fn pair(x: f64, y: f64) -> WindowPair<f64> {
    WindowPair { x: vec![x], y }
}

fn config(alpha: f64, beta: f64) -> MetaConfig<f64> {
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

/// Symbolic first-order update for the 1-input linear learner
/// `f(x) = w x + b` with one support pair and one query pair.
fn symbolic_update(theta: [f64; 2], s: (f64, f64), q: (f64, f64), alpha: f64, beta: f64) -> [f64; 2] {
    let [w, b] = theta;
    let rs = w * s.0 + b - s.1;
    let (w1, b1) = (w - alpha * 2.0 * rs * s.0, b - alpha * 2.0 * rs);
    let rq = w1 * q.0 + b1 - q.1;
    [w - beta * 2.0 * rq * q.0, b - beta * 2.0 * rq]
}

proptest! {
    #[test]
    fn first_order_update_matches_symbolic_form(
        w in -2.0f64..2.0, b in -2.0f64..2.0,
        sx in -2.0f64..2.0, sy in -2.0f64..2.0,
        qx in -2.0f64..2.0, qy in -2.0f64..2.0,
        alpha in 1e-4f64..0.5, beta in 1e-4f64..0.5,
    ) {
        let spec = LearnerSpec::linear(1);
        let task = TaskDataset { task_id: "t".into(), support: vec![pair(sx, sy)], query: vec![pair(qx, qy)] };
        let (theta, _) = meta_train(&spec, &config(alpha, beta), &[task], ParameterVector::from_vec(vec![w, b]), 0).unwrap();
        let want = symbolic_update([w, b], (sx, sy), (qx, qy), alpha, beta);
        prop_assert!((theta[0] - want[0]).abs() <= 1e-10 && (theta[1] - want[1]).abs() <= 1e-10);
    }

    #[test]
    fn convex_fine_tuning_never_increases_validation_loss(seed in any::<u64>(), gamma in 1e-4f64..1e-3) {
        let mut rng = rng_for(seed, 0);
        let spec = LearnerSpec::linear(3);
        let data: Vec<WindowPair<f64>> = (0..20)
            .map(|_| WindowPair { x: (0..3).map(|_| rng.random_range(-1.0..1.0)).collect(), y: rng.random_range(-1.0..1.0) })
            .collect();
        let mut theta = ParameterVector::from_vec((0..4).map(|_| rng.random_range(-2.0..2.0)).collect());
        let mut prev = mean_loss(&spec, &theta, &data).unwrap();
        for _ in 0..10 {
            theta = fine_tune(&spec, &theta, &data, gamma, 1, OptimizerKind::Sgd).unwrap();
            let l = mean_loss(&spec, &theta, &data).unwrap();
            prop_assert!(l <= prev);
            prev = l;
        }
    }
}

#[test]
fn meta_loss_adds_over_tasks() {
    let spec = LearnerSpec::linear(1);
    let theta = ParameterVector::from_vec(vec![0.5, -0.25]);
    let q1 = [pair(1.0, 2.0), pair(-1.0, 0.0)];
    let q2 = [pair(0.5, 1.0)];
    for r in [Reduction::Sum, Reduction::Mean] {
        let both = meta_loss(&spec, &[(theta.clone(), &q1[..]), (theta.clone(), &q2[..])], r).unwrap();
        let split = meta_loss(&spec, &[(theta.clone(), &q1[..])], r).unwrap()
            + meta_loss(&spec, &[(theta.clone(), &q2[..])], r).unwrap();
        assert_eq!(both, split);
    }
}

#[test]
fn meta_training_is_deterministic() {
    let spec = LearnerSpec::mlp(4, 2);
    let tasks: Vec<TaskDataset<f64>> = (0..3)
        .map(|k| TaskDataset {
            task_id: format!("t{k}"),
            support: (0..6).map(|i| WindowPair { x: vec![i as f64 * 0.1, k as f64 * 0.2], y: 0.3 }).collect(),
            query: (0..4).map(|i| WindowPair { x: vec![i as f64 * 0.2, 0.1], y: 0.1 * k as f64 }).collect(),
        })
        .collect();
    let mut cfg = config(0.01, 0.01);
    cfg.tasks_per_batch = 2;
    cfg.shots = Some(3);
    cfg.meta_iterations = 5;
    let init = autotsf::learners::init_params(&spec, 9);
    let a = meta_train(&spec, &cfg, &tasks, init.clone(), 4).unwrap();
    let b = meta_train(&spec, &cfg, &tasks, init, 4).unwrap();
    assert_eq!(a, b);
}
