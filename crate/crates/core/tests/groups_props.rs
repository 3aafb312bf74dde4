mod common;

use common::*;
use gdl_core::groups::{orbit, quotient_distance, symmetrize, GroupAction, GroupElement};
use gdl_core::nn::Mlp;
use gdl_core::rng::Rng;
use proptest::prelude::*;
use rand::Rng as _;

fn permutation_action(r: &mut Rng) -> GroupAction {
    let n = r.random_range(1..=4);
    if r.random() {
        GroupAction::full_permutation(n).unwrap()
    } else {
        GroupAction::cyclic_shift(n).unwrap()
    }
}

fn any_action(r: &mut Rng) -> GroupAction {
    if r.random_range(0..3) == 0 {
        GroupAction::periodic_translation(r.random_range(0.5..3.0), r.random_range(0..=3)).unwrap()
    } else {
        permutation_action(r)
    }
}

fn input_for(r: &mut Rng, g: &GroupAction) -> Vec<f64> {
    let n = g.dim().unwrap_or_else(|| r.random_range(1..=4));
    vector(r, n, 3.0)
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len()
        && a.iter()
            .zip(b)
            .all(|(x, y)| (x - y).abs() <= tol * (1.0 + y.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn action_axioms(seed in any::<u64>()) {
        let mut r = seeded(seed);
        let group = any_action(&mut r);
        let x = input_for(&mut r, &group);
        let elems = group.elements();
        let e = group.identity();
        prop_assert!(e.is_identity());
        prop_assert!(group.contains(&e));
        prop_assert_eq!(e.apply(&x).unwrap(), x.clone());
        let g = &elems[r.random_range(0..elems.len())];
        let h = &elems[r.random_range(0..elems.len())];
        prop_assert!(group.contains(&g.inverse()));
        prop_assert!(g.compose(&g.inverse()).unwrap().is_identity());
        prop_assert!(g.inverse().compose(g).unwrap().is_identity());
        // (g h) x = g (h x)
        let gh = g.compose(h).unwrap();
        prop_assert!(close(&gh.apply(&x).unwrap(), &g.apply(&h.apply(&x).unwrap()).unwrap(), 1e-12));
        if matches!(g, GroupElement::Permutation(_)) {
            prop_assert!(group.contains(&gh), "not closed under composition");
        }
    }

    #[test]
    fn orbits_partition_the_space(seed in any::<u64>()) {
        let mut r = seeded(seed);
        let group = permutation_action(&mut r);
        let x = input_for(&mut r, &group);
        let elems = group.elements();
        let g = &elems[r.random_range(0..elems.len())];
        let gx = g.apply(&x).unwrap();
        let (a, b) = (orbit(&x, &group).unwrap(), orbit(&gx, &group).unwrap());
        prop_assert_eq!(a.len(), b.len());
        prop_assert!(a.members.iter().all(|m| b.contains(m)));
        prop_assert_eq!(group.canonical_form(&x).unwrap(), group.canonical_form(&gx).unwrap());
    }

    #[test]
    fn translation_canonical_form_ignores_the_window(seed in any::<u64>(), steps in -50i64..50) {
        let mut r = seeded(seed);
        let period = r.random_range(0.5..3.0);
        let group = GroupAction::periodic_translation(period, 1).unwrap();
        let x = input_for(&mut r, &group);
        let gx = GroupElement::Translation { steps, period }.apply(&x).unwrap();
        prop_assert!(close(&group.canonical_form(&gx).unwrap(), &group.canonical_form(&x).unwrap(), 1e-9));
    }

    #[test]
    fn symmetrization_is_invariant_and_idempotent(seed in any::<u64>()) {
        let mut r = seeded(seed);
        let group = permutation_action(&mut r);
        let n = group.dim().unwrap();
        let f = Mlp::init(&[n, 4, 2], pick(&mut r, &SMOOTH), r.random()).unwrap();
        let once = symmetrize(|x: &[f64]| f.eval(x), &group);
        let twice = symmetrize(|x: &[f64]| once.eval(x), &group);
        let x = input_for(&mut r, &group);
        let base = once.eval(&x).unwrap();
        prop_assert!(close(&twice.eval(&x).unwrap(), &base, 1e-12));
        for g in group.elements() {
            prop_assert!(close(&once.eval(&g.apply(&x).unwrap()).unwrap(), &base, 1e-12));
        }
    }

    #[test]
    fn quotient_distance_is_a_lower_bound(seed in any::<u64>()) {
        let mut r = seeded(seed);
        let group = any_action(&mut r);
        let x = input_for(&mut r, &group);
        let y = vector(&mut r, x.len(), 3.0);
        let euclid = x.iter().zip(&y).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let d = quotient_distance(&x, &y, &group).unwrap();
        prop_assert!(d >= 0.0 && d <= euclid + 1e-12);
        prop_assert!(quotient_distance(&x, &x, &group).unwrap() == 0.0);
    }
}
