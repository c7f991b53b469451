//! Products over linearly ordered index sets.
//!
//! A finite schedule assigns labels to exact rational keys and evaluates to the
//! ordered product with the smallest key leftmost. Infinite index sets are
//! reached through nested generators, whose net of finite products is followed
//! to its limit, or declared infinitely complete, in which case the product is
//! the oblique projection `P_J`.

mod generator;
mod key;
mod limit;
mod partition;
mod schedule;

pub use generator::{Alternating, Constant, Dyadic, FromFn, Growth, InfinitelyComplete, PatternFill, ScheduleGenerator};
pub use key::OrderKey;
pub use limit::{evaluate_finite, limit_product, LimitOptions, ProductMode, ProductResult};
pub use partition::{complete_interval_count, partition_incomplete, IntervalPart, IntervalPartition};
pub use schedule::{
    concat_product, finite_product, monotone_reindex, prefix_variation, FiniteSchedule, PrefixMode, QuotientPoint, QuotientSchedule,
};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::family::MatrixFamily;
    use crate::gate::CpGate;
    use crate::linalg::{Matrix, ToleranceConfig};
    use proptest::prelude::*;

    type M = Matrix<f64>;

    fn tol() -> ToleranceConfig<f64> {
        ToleranceConfig::default()
    }

    fn idempotent_pair() -> MatrixFamily<f64> {
        MatrixFamily::numbered(vec![
            M::from_f64_rows(&[&[1.0, 0.0], &[0.0, 0.0]]),
            M::from_f64_rows(&[&[1.0, 1.0], &[0.0, 0.0]]),
        ])
        .unwrap()
    }

    fn line(theta: f64) -> M {
        let (s, c) = theta.sin_cos();
        M::from_f64_rows(&[&[c * c, s * c], &[s * c, s * s]])
    }

    fn lines(degrees: &[f64]) -> MatrixFamily<f64> {
        MatrixFamily::numbered(degrees.iter().map(|d| line(d.to_radians())).collect()).unwrap()
    }

    fn key(n: i64, d: i64) -> OrderKey {
        OrderKey::new(n, d).unwrap()
    }

    fn sched(entries: &[(i64, i64, usize)]) -> FiniteSchedule {
        FiniteSchedule::new(entries.iter().map(|&(n, d, j)| (key(n, d), j)).collect()).unwrap()
    }

    #[test]
    fn finite_products_follow_key_order() {
        let fam = idempotent_pair();
        let a2 = fam.matrix(1).clone();
        let a1 = fam.matrix(0).clone();
        assert_eq!(finite_product(&sched(&[(1, 10, 0), (1, 2, 1)]), &fam).unwrap(), a2);
        assert_eq!(finite_product(&sched(&[(0, 1, 1), (1, 1, 0)]), &fam).unwrap(), a1);
        assert_eq!(finite_product(&FiniteSchedule::empty(), &fam).unwrap(), M::identity(2));
        assert!(matches!(FiniteSchedule::new(vec![(key(1, 1), 0), (key(1, 1), 1)]), Err(Error::UnorderedKeys { index: 1 })));
        assert!(finite_product(&sched(&[(0, 1, 5)]), &fam).is_err());
    }

    #[test]
    fn concatenation_examples() {
        let fam = idempotent_pair();
        assert_eq!(concat_product(&sched(&[(0, 1, 0)]), &sched(&[(1, 1, 1)]), &fam).unwrap(), fam.matrix(1).clone());
        let s2 = sched(&[(0, 1, 0), (3, 1, 1)]);
        assert_eq!(concat_product(&FiniteSchedule::empty(), &s2, &fam).unwrap(), finite_product(&s2, &fam).unwrap());
        assert!(matches!(concat_product(&sched(&[(2, 1, 0)]), &sched(&[(1, 1, 1)]), &fam), Err(Error::InterleavedKeys)));
    }

    #[test]
    fn complete_interval_examples() {
        let two = idempotent_pair();
        let one = MatrixFamily::numbered(vec![M::identity(2)]).unwrap();
        assert_eq!(complete_interval_count(&FiniteSchedule::from_word(&[0, 1, 0, 0, 1]), &two), 2);
        assert_eq!(complete_interval_count(&FiniteSchedule::from_word(&[0, 0, 0, 0]), &one), 4);
        assert_eq!(complete_interval_count(&FiniteSchedule::from_word(&[0, 0, 0]), &two), 0);
    }

    #[test]
    fn partition_examples() {
        let fam = idempotent_pair();
        let p = partition_incomplete(&FiniteSchedule::from_word(&[0, 1]), &fam);
        assert_eq!(p.parts.iter().map(|x| (x.start, x.end)).collect::<Vec<_>>(), vec![(0, 1), (1, 2)]);
        let p = partition_incomplete(&FiniteSchedule::from_word(&[0, 0]), &fam);
        assert_eq!(p.parts.len(), 1);
        assert!(p.all_incomplete());
        let s = FiniteSchedule::from_word(&[0, 1, 0, 0, 1]);
        let p = partition_incomplete(&s, &fam);
        assert!(p.parts.len() <= 6 && p.all_incomplete() && p.covers(5));
        let p = partition_incomplete(&FiniteSchedule::from_word(&[0, 1, 0]), &fam);
        assert_eq!(p.parts.len(), 3);
    }

    #[test]
    fn alternating_lines_converge_to_zero() {
        let fam = lines(&[0.0, 45.0]);
        let g = Alternating::new(vec![0, 1], 2, Growth::Left).unwrap();
        let r = limit_product(&g, &fam, &tol(), &LimitOptions::default()).unwrap();
        assert_eq!(r.mode, ProductMode::Limit);
        assert!(r.matrix.max_abs() < 1e-9);
        assert!(r.residual <= 1e-10);
        let summed: f64 = r.residuals.iter().sum();
        assert!(summed.is_finite() && summed < 2.0);
    }

    #[test]
    fn declared_complete_axis_projections_project_to_zero() {
        let fam = lines(&[0.0, 90.0]);
        let g = InfinitelyComplete(Dyadic::new(vec![0, 1]).unwrap());
        let r = limit_product(&g, &fam, &tol(), &LimitOptions::default()).unwrap();
        assert_eq!(r.mode, ProductMode::Projection);
        assert!(r.matrix.max_abs() < 1e-12);
    }

    #[test]
    fn projection_mode_absorbs_generators() {
        // Common fixed line and common invariant plane, not orthogonal.
        let frame = M::from_f64_rows(&[&[1.0, 0.0, 0.0], &[0.5, 1.0, 0.0], &[0.3, 0.0, 1.0]]);
        let inverse = M::from_f64_rows(&[&[1.0, 0.0, 0.0], &[-0.5, 1.0, 0.0], &[-0.3, 0.0, 1.0]]);
        let conj = |d: M| &(&frame * &d) * &inverse;
        let fam = MatrixFamily::numbered(vec![
            conj(M::from_f64_rows(&[&[1.0, 0.0, 0.0], &[0.0, 0.5, 0.2], &[0.0, 0.1, 0.3]])),
            conj(M::from_f64_rows(&[&[1.0, 0.0, 0.0], &[0.0, 0.2, 0.0], &[0.0, 0.3, 0.6]])),
        ])
        .unwrap();
        let g = InfinitelyComplete(Dyadic::new(vec![0, 1]).unwrap());
        let r = limit_product(&g, &fam, &tol(), &LimitOptions::default()).unwrap();
        let p = &r.matrix;
        assert!((&(p * p) - p).operator_norm() <= 1e-8);
        for a in fam.matrices() {
            assert!((&(p * a) - p).operator_norm() <= 1e-8);
        }
        let net = limit_product(&Dyadic::new(vec![0, 1]).unwrap(), &fam, &tol(), &LimitOptions { max_level: 18, ..Default::default() }).unwrap();
        assert!(net.matrix.within(p, 1e-8));
    }

    #[test]
    fn constant_generator_converges_at_level_one() {
        let fam = lines(&[0.0, 30.0]);
        let s = sched(&[(0, 1, 0), (1, 1, 1), (2, 1, 0)]);
        let r = limit_product(&Constant(s.clone()), &fam, &tol(), &LimitOptions::default()).unwrap();
        assert_eq!(r.converged_at, Some(1));
        assert_eq!(r.matrix, finite_product(&s, &fam).unwrap());
    }

    #[test]
    fn refuted_family_is_gated() {
        let fam = idempotent_pair();
        let g = Alternating::new(vec![0, 1], 1, Growth::Right).unwrap();
        assert!(matches!(limit_product(&g, &fam, &tol(), &LimitOptions::default()), Err(Error::Refused { .. })));
        let opts = LimitOptions { max_level: 20, gate: CpGate::allowing_refuted(), ..Default::default() };
        match limit_product(&g, &fam, &tol(), &opts) {
            Err(Error::NonConvergence { residuals, .. }) => assert!(residuals.iter().all(|&r| r > 0.5)),
            other => panic!("expected non-convergence, got {other:?}"),
        }
        let left = Alternating::new(vec![0, 1], 1, Growth::Left).unwrap();
        assert!(limit_product(&left, &fam, &tol(), &opts).is_ok());
    }

    #[test]
    fn non_nested_generator_is_rejected() {
        let fam = lines(&[0.0, 45.0]);
        let g = FromFn::new("shifting", |level| FiniteSchedule::from_word(&vec![level % 2; level + 1]));
        let err = limit_product(&g, &fam, &tol(), &LimitOptions { gate: CpGate::disabled(), ..Default::default() }).unwrap_err();
        assert!(matches!(err, Error::Invalid(_)));
    }

    #[test]
    fn prefix_variation_examples() {
        let fam = idempotent_pair();
        let (v, steps) = prefix_variation(&FiniteSchedule::from_word(&[0, 0, 0, 0]), &fam, PrefixMode::AtMost).unwrap();
        assert_eq!(v, 0.0);
        assert_eq!(steps.len(), 3);

        let lines = lines(&[0.0, 45.0]);
        let s = FiniteSchedule::from_word(&[0, 1, 0, 1]);
        let (v, _) = prefix_variation(&s, &lines, PrefixMode::AtMost).unwrap();
        let prefixes: Vec<M> = (1..=4).map(|i| lines.product(&s.labels()[..i])).collect();
        let oracle: f64 = prefixes.windows(2).map(|w| (&w[1] - &w[0]).operator_norm()).sum();
        assert!((v - oracle).abs() < 1e-14);

        let (below, _) = prefix_variation(&s, &lines, PrefixMode::Below).unwrap();
        let prefixes: Vec<M> = (0..4).map(|i| lines.product(&s.labels()[..i])).collect();
        let oracle: f64 = prefixes.windows(2).map(|w| (&w[1] - &w[0]).operator_norm()).sum();
        assert!((below - oracle).abs() < 1e-14);
    }

    #[test]
    fn reindex_examples() {
        let fam = idempotent_pair();
        let s = sched(&[(1, 10, 0), (2, 10, 1)]);
        let q = monotone_reindex(&s, |_| OrderKey::zero(), &fam).unwrap();
        assert_eq!(q.points.len(), 1);
        assert_eq!(q.points[0].matrix, fam.matrix(1).clone());
        let s = FiniteSchedule::from_word(&[0, 1, 1, 0, 1]);
        let q = monotone_reindex(&s, |k| k.clone(), &fam).unwrap();
        assert_eq!(q.product(), finite_product(&s, &fam).unwrap());
        assert!(matches!(monotone_reindex(&s, |k| k.neg(), &fam), Err(Error::NonMonotone { index: 0 })));
    }

    #[test]
    fn generators_are_nested() {
        let gens: Vec<Box<dyn ScheduleGenerator>> = vec![
            Box::new(Alternating::new(vec![0, 1, 2], 2, Growth::Left).unwrap()),
            Box::new(Alternating::new(vec![1, 0], 3, Growth::Right).unwrap()),
            Box::new(Dyadic::new(vec![0, 1]).unwrap()),
            Box::new(PatternFill::new(vec![0, 1, 2]).unwrap()),
        ];
        for g in &gens {
            for level in 0..8 {
                assert!(g.schedule(level).is_subset_of(&g.schedule(level + 1)), "{}", g.describe());
            }
        }
        let d = Dyadic::new(vec![0, 1, 2]).unwrap().schedule(2);
        assert_eq!(d.labels(), vec![0, 2, 1, 2, 0]);
        let f = PatternFill::new(vec![0, 1]).unwrap();
        assert_eq!(f.schedule(1).labels(), vec![0, 0, 1, 0]);
        assert_eq!(f.schedule(2).labels(), vec![0, 0, 1, 0, 0, 1, 1, 0, 1, 0]);
    }

    fn random_family(k: usize) -> impl Strategy<Value = MatrixFamily<f64>> {
        proptest::collection::vec(proptest::collection::vec(-1.0f64..1.0, 9), k)
            .prop_map(|ms| MatrixFamily::numbered(ms.into_iter().map(|d| M::new(3, 3, d).unwrap()).collect()).unwrap())
    }

    fn random_schedule(k: usize, max_len: usize) -> impl Strategy<Value = FiniteSchedule> {
        proptest::collection::btree_map(-1000i64..1000, 0..k, 0..max_len)
            .prop_map(|m| FiniteSchedule::new(m.into_iter().map(|(n, j)| (OrderKey::new(n, 7).unwrap(), j)).collect()).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn concatenation_matches_direct_product(fam in random_family(3), s in random_schedule(3, 12), cut in -1000i64..1000) {
            let (s1, s2) = s.split_at_key(&OrderKey::new(cut, 7).unwrap());
            let direct = finite_product(&s, &fam).unwrap();
            let split = concat_product(&s1, &s2, &fam).unwrap();
            prop_assert!((&direct - &split).operator_norm() <= 1e-12 * direct.operator_norm().max(1.0));
        }

        #[test]
        fn partition_respects_three_per_complete_interval(k in 2usize..5, word in proptest::collection::vec(0usize..4, 0..60)) {
            let word: Vec<usize> = word.into_iter().map(|j| j % k).collect();
            let fam = MatrixFamily::numbered(vec![M::identity(1); k]).unwrap();
            let s = FiniteSchedule::from_word(&word);
            let p = partition_incomplete(&s, &fam);
            let count = complete_interval_count(&s, &fam);
            prop_assert!(p.covers(word.len()));
            prop_assert!(p.all_incomplete());
            prop_assert!(p.parts.len() <= (3 * count).max(1));
        }

        #[test]
        fn suffix_variation_is_reversed_prefix_variation(angles in proptest::collection::vec(0.0f64..180.0, 2..4), word in proptest::collection::vec(0usize..3, 2..20)) {
            let fam = lines(&angles);
            let word: Vec<usize> = word.into_iter().map(|j| j % fam.len()).collect();
            let s = FiniteSchedule::from_word(&word);
            let (suffix, _) = prefix_variation(&s, &fam, PrefixMode::AtLeast).unwrap();
            let (prefix, _) = prefix_variation(&s.reversed(), &fam, PrefixMode::AtMost).unwrap();
            prop_assert!((suffix - prefix).abs() <= 1e-12);
        }

        #[test]
        fn reindexing_preserves_subset_products(fam in random_family(2), word in proptest::collection::vec(0usize..2, 1..16), buckets in 1i64..5, pick in proptest::collection::vec(any::<bool>(), 16)) {
            let s = FiniteSchedule::from_word(&word);
            let q = monotone_reindex(&s, |k| OrderKey::integer(k.numer().try_into().map(|n: i64| n / buckets).unwrap()), &fam).unwrap();
            let chosen: Vec<usize> = (0..q.points.len()).filter(|&i| pick[i]).collect();
            let preimage: Vec<usize> = chosen.iter().flat_map(|&i| q.points[i].fiber.0..q.points[i].fiber.1).map(|p| word[p]).collect();
            let lhs = q.product_of(&chosen).unwrap();
            let rhs = fam.product(&preimage);
            prop_assert!((&lhs - &rhs).operator_norm() <= 1e-12 * rhs.operator_norm().max(1.0));
        }
    }
}
