use gdl_core::analysis::{
    catoni_bound, kl_divergence, symmetrization_gap, symmetrize_distribution, DiscreteDistribution,
    SymmetrizationMap,
};
use proptest::prelude::*;

fn distribution(n: usize) -> impl Strategy<Value = DiscreteDistribution> {
    prop::collection::vec(0.01..1.0f64, n)
        .prop_map(|w| DiscreteDistribution::from_masses(&w).unwrap())
}

fn classes(n: usize) -> impl Strategy<Value = SymmetrizationMap> {
    prop::collection::vec(0..n, n).prop_map(|labels| SymmetrizationMap::from_labels(&labels))
}

fn problem() -> impl Strategy<
    Value = (
        DiscreteDistribution,
        DiscreteDistribution,
        SymmetrizationMap,
    ),
> {
    (1usize..8).prop_flat_map(|n| (distribution(n), distribution(n), classes(n)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn kl_is_nonnegative_and_zero_on_the_diagonal((q, p, _) in problem()) {
        prop_assert!(kl_divergence(&q, &p).unwrap() >= -1e-12);
        prop_assert!(kl_divergence(&q, &q).unwrap().abs() <= 1e-12);
    }

    /// Merging estimators into classes never increases KL.
    #[test]
    fn symmetrization_gap_is_nonnegative((q, p, map) in problem()) {
        prop_assert!(symmetrization_gap(&q, &p, &map).unwrap() >= -1e-12);
    }

    #[test]
    fn pushforward_keeps_class_masses((q, _, map) in problem()) {
        let pushed = symmetrize_distribution(&q, &map).unwrap();
        let reps = map.representatives();
        prop_assert_eq!(pushed.len(), reps.len());
        for (slot, &rep) in reps.iter().enumerate() {
            let mass: f64 = (0..q.len()).filter(|&i| map.class_of(i) == rep).map(|i| q.weights()[i]).sum();
            prop_assert!((pushed.weights()[slot] - mass).abs() <= 1e-12);
        }
        let identity = symmetrize_distribution(&q, &SymmetrizationMap::identity(q.len())).unwrap();
        prop_assert_eq!(identity.weights(), q.weights());
    }

    #[test]
    fn catoni_bound_lies_in_range(
        risk in 0.0..=1.0f64,
        kl in 0.0..50.0f64,
        n in 1usize..10_000,
        beta in 0.01..20.0f64,
        delta in 0.001..1.0f64,
    ) {
        let b = catoni_bound(risk, kl, n, beta, delta).unwrap();
        prop_assert!(b >= 0.0);
        prop_assert!(b <= 1.0 / (1.0 - (-beta).exp()) + 1e-12);
    }

    #[test]
    fn catoni_bound_grows_with_risk_and_kl(
        risk in 0.0..0.5f64,
        kl in 0.0..5.0f64,
        n in 1usize..1000,
        beta in 0.1..5.0f64,
    ) {
        let base = catoni_bound(risk, kl, n, beta, 0.1).unwrap();
        prop_assert!(catoni_bound(risk + 0.1, kl, n, beta, 0.1).unwrap() >= base);
        prop_assert!(catoni_bound(risk, kl + 1.0, n, beta, 0.1).unwrap() >= base);
    }
}
