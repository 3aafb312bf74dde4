mod common;

use common::*;
use gdl_core::autodiff::Tape;
use gdl_core::nn::Mlp;
use gdl_core::rng::Rng;
use proptest::prelude::*;

/// A random MLP and an input at least `KINK_MARGIN` away from every ReLU kink.
fn mlp_and_smooth_input(r: &mut Rng) -> (Mlp, Vec<f64>) {
    let m = random_mlp(r, 3, 6, &ACTIVATIONS);
    loop {
        let x = vector(r, m.in_dim(), 2.0);
        if m.min_kink_distance(&x)
            .unwrap()
            .is_none_or(|d| d >= KINK_MARGIN)
        {
            return (m, x);
        }
    }
}

fn record(m: &Mlp, x: &[f64]) -> (Tape, Vec<gdl_core::autodiff::NodeId>) {
    let mut tape = Tape::new();
    let params = tape.param_slice(&m.parameters());
    let xs = tape.constants(x);
    let out = m.forward(&mut tape, &params, &xs).unwrap();
    (tape, out)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn mlp_gradients_match_central_differences(seed in any::<u64>()) {
        let mut r = seeded(seed);
        let (m, x) = mlp_and_smooth_input(&mut r);
        let c = vector(&mut r, m.out_dim(), 1.0);
        let err = model_gradient_mismatch(&m, &x, &c);
        prop_assert!(err < 1e-4, "relative error {err}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn recording_is_deterministic(seed in any::<u64>()) {
        let mut r = seeded(seed);
        let (m, x) = mlp_and_smooth_input(&mut r);
        let (a, out_a) = record(&m, &x);
        let (b, out_b) = record(&m, &x);
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(&out_a, &out_b);
        for &o in &out_a {
            prop_assert_eq!(a.backward(o).unwrap(), b.backward(o).unwrap());
        }
    }

    #[test]
    fn backward_is_linear_in_the_output(seed in any::<u64>(), alpha in -3.0..3.0f64, beta in -3.0..3.0f64) {
        let mut r = seeded(seed);
        let (m, x) = mlp_and_smooth_input(&mut r);
        let (mut tape, out) = record(&m, &x);
        let f = out[0];
        let g = tape.square(out[out.len() - 1]);
        let fa = tape.scale(f, alpha);
        let gb = tape.scale(g, beta);
        let combo = tape.add(fa, gb);
        let (df, dg, dc) = (tape.backward(f).unwrap(), tape.backward(g).unwrap(), tape.backward(combo).unwrap());
        for i in 0..dc.len() {
            let expected = alpha * df[i] + beta * dg[i];
            prop_assert!((dc[i] - expected).abs() <= 1e-12 * (1.0 + expected.abs()), "{} vs {}", dc[i], expected);
        }
    }

    #[test]
    fn backward_leaves_values_untouched(seed in any::<u64>()) {
        let mut r = seeded(seed);
        let (m, x) = mlp_and_smooth_input(&mut r);
        let (tape, out) = record(&m, &x);
        let before = tape.values(&out);
        tape.backward(out[0]).unwrap();
        prop_assert_eq!(before, tape.values(&out));
        prop_assert_eq!(tape.values(&out), m.eval(&x).unwrap());
    }
}
