mod common;

use common::*;
use gdl_core::nn::Mlp;
use gdl_core::rng::Rng;
use gdl_core::training::{train, Dataset, LossKind, Target, TrainConfig};
use proptest::prelude::*;
use rand::Rng as _;

fn regression_problem(r: &mut Rng) -> (Mlp, Dataset<Vec<f64>>) {
    let m = random_mlp(r, 3, 5, &SMOOTH);
    let pairs = (0..r.random_range(1..=8))
        .map(|_| (vector(r, m.in_dim(), 1.0), vector(r, m.out_dim(), 1.0)))
        .collect();
    (m, Dataset::regression(pairs).unwrap())
}

fn classification_problem(r: &mut Rng) -> (Mlp, Dataset<Vec<f64>>) {
    let classes = r.random_range(2..=4);
    let mut dims = vec![r.random_range(1..=4), r.random_range(1..=5)];
    dims.push(classes);
    let m = Mlp::init(&dims, pick(r, &SMOOTH), r.random()).unwrap();
    let samples = (0..r.random_range(1..=8))
        .map(|_| {
            (
                vector(r, dims[0], 1.0),
                Target::Class(r.random_range(0..classes)),
            )
        })
        .collect();
    (m, Dataset::new(samples).unwrap())
}

fn one_step(m: &Mlp, data: &Dataset<Vec<f64>>, loss: LossKind, lambda: f64, lr: f64) -> (f64, f64) {
    let cfg = TrainConfig {
        learning_rate: lr,
        l2_lambda: lambda,
        epochs: 2,
        seed: 0,
        loss,
    };
    let (_, trace) = train(m, data, &cfg).unwrap();
    (trace[0], trace[1])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    /// Some learning rate `1e-2 / 2^k` decreases the objective in one step.
    #[test]
    fn a_small_enough_step_descends(seed in any::<u64>(), classify in any::<bool>(), lambda in prop_oneof![Just(0.0), 0.0..0.01f64]) {
        let mut r = seeded(seed);
        let (m, data, loss) = if classify {
            let (m, d) = classification_problem(&mut r);
            (m, d, LossKind::SoftmaxCrossEntropy)
        } else {
            let (m, d) = regression_problem(&mut r);
            (m, d, LossKind::Mse)
        };
        let mut lr = 1e-2;
        let mut best = None;
        for _ in 0..30 {
            let (before, after) = one_step(&m, &data, loss, lambda, lr);
            if after <= before {
                best = Some((before, after));
                break;
            }
            lr /= 2.0;
        }
        prop_assert!(best.is_some(), "no step size descended");
    }

    #[test]
    fn training_is_deterministic(seed in any::<u64>()) {
        let mut r = seeded(seed);
        let (m, data) = regression_problem(&mut r);
        let cfg = TrainConfig { learning_rate: 0.01, epochs: 20, ..TrainConfig::default() };
        let (a, ta) = train(&m, &data, &cfg).unwrap();
        let (b, tb) = train(&m, &data, &cfg).unwrap();
        prop_assert_eq!(a, b);
        prop_assert_eq!(ta, tb);
    }

    #[test]
    fn trace_has_one_entry_per_epoch(seed in any::<u64>(), epochs in 0usize..15) {
        let mut r = seeded(seed);
        let (m, data) = regression_problem(&mut r);
        let cfg = TrainConfig { learning_rate: 0.01, epochs, ..TrainConfig::default() };
        let (trained, trace) = train(&m, &data, &cfg).unwrap();
        prop_assert_eq!(trace.len(), epochs);
        if epochs == 0 {
            prop_assert_eq!(trained, m);
        }
    }
}
