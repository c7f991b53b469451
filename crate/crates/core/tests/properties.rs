use cpm_core::contprod::{limit_product, Dyadic, InfinitelyComplete, LimitOptions, ProductMode};
use cpm_core::family::{
    cp_verdict, lcp_verdict, rcp_verdict, replay_word_witness, simulate_path, Budget, MatrixFamily, ProductSide, Status, Witness,
};
use cpm_core::gadgets::{line_projection, projection_family, subspace_projection};
use cpm_core::linalg::{Matrix, ToleranceConfig, Vector};
use proptest::prelude::*;

type M = Matrix<f64>;

fn tol() -> ToleranceConfig<f64> {
    ToleranceConfig::default()
}

fn budget() -> Budget {
    Budget { depth: 4, trials: 16, trial_length: 100, ..Budget::default() }
}

/// Rank-one oblique idempotent `u vᵀ / (vᵀ u)`.
fn rank_one_idempotent(u: [f64; 2], v: [f64; 2]) -> Option<M> {
    let d = u[0] * v[0] + u[1] * v[1];
    if d.abs() < 0.2 {
        return None;
    }
    Some(M::from_f64_rows(&[&[u[0] * v[0] / d, u[0] * v[1] / d], &[u[1] * v[0] / d, u[1] * v[1] / d]]))
}

fn small_family() -> impl Strategy<Value = MatrixFamily<f64>> {
    let entry = prop_oneof![Just(0.0), Just(1.0), Just(-1.0), Just(0.5), -1.5f64..1.5];
    let matrix = proptest::collection::vec(entry, 4).prop_map(|d| M::new(2, 2, d).unwrap());
    let idempotent = (any::<[i8; 2]>(), any::<[i8; 2]>()).prop_filter_map("well-conditioned", |(u, v)| {
        rank_one_idempotent([u[0] as f64 / 64.0, u[1] as f64 / 64.0], [v[0] as f64 / 64.0, v[1] as f64 / 64.0])
    });
    let member = prop_oneof![matrix, idempotent];
    proptest::collection::vec(member, 1..4).prop_map(|ms| MatrixFamily::numbered(ms).unwrap())
}

fn angles() -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(0.0f64..std::f64::consts::PI, 1..5)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn left_and_right_verdicts_are_dual(fam in small_family()) {
        let b = budget();
        prop_assert_eq!(lcp_verdict(&fam, &b, &tol()).status, rcp_verdict(&fam.transpose(), &b, &tol()).status);
        prop_assert_eq!(rcp_verdict(&fam, &b, &tol()).status, lcp_verdict(&fam.transpose(), &b, &tol()).status);
    }

    #[test]
    fn never_two_yes_and_one_no(fam in small_family()) {
        let r = cp_verdict(&fam, &budget(), &tol()).unwrap();
        let statuses = [r.lcp.status, r.rcp.status, r.transversality.status];
        let yes = statuses.iter().filter(|s| **s == Status::CertifiedYes).count();
        let no = statuses.iter().filter(|s| **s == Status::CertifiedNo).count();
        prop_assert!(!(yes == 2 && no == 1), "{statuses:?}");
        let all_yes = yes == 3;
        prop_assert_eq!(r.cp.status == Status::CertifiedYes, all_yes);
    }

    #[test]
    fn word_witnesses_replay(fam in small_family()) {
        for (v, side) in [(lcp_verdict(&fam, &budget(), &tol()), ProductSide::Left), (rcp_verdict(&fam, &budget(), &tol()), ProductSide::Right)] {
            if let (Status::CertifiedNo, Some(Witness::Word { prefix, period })) = (v.status, &v.witness) {
                let replay = replay_word_witness(&fam, prefix, period, side, &tol()).unwrap();
                prop_assert!(replay.reproduced, "{} {:?} {:?}", v.rule, period, replay);
            }
        }
    }

    #[test]
    fn line_projections_are_cp_and_norm_preserving(angles in angles(), seed in proptest::collection::vec((0usize..4, -1.0f64..1.0, -1.0f64..1.0), 1..2), word in proptest::collection::vec(0usize..4, 500)) {
        let fam = projection_family(&angles).unwrap();
        let r = cp_verdict(&fam, &budget(), &tol()).unwrap();
        prop_assert_eq!(r.cp.status, Status::CertifiedYes);
        let word: Vec<usize> = word.into_iter().map(|j| j % fam.len()).collect();
        let x0 = Vector::from_f64(&[seed[0].1, seed[0].2]);
        let path = simulate_path(&fam, &word, &x0).unwrap();
        for (i, &j) in word.iter().enumerate() {
            let (x, y) = (&path.points[i], &path.points[i + 1]);
            let identity = y.norm().powi(2) + (y - x).norm().powi(2) - x.norm().powi(2);
            prop_assert!(identity.abs() <= 1e-10, "step {i} label {j}");
        }
    }

    #[test]
    fn projection_limit_absorbs_generators(a in 0.0f64..3.1, b in 0.0f64..3.1, normal in proptest::collection::vec(-1.0f64..1.0, 3)) {
        prop_assume!((a - b).abs() > 0.05);
        prop_assume!(normal.iter().map(|x| x * x).sum::<f64>() > 0.1);
        let lift = |p: M| {
            let mut m = M::identity(3);
            m.set_block(0, 0, &p);
            m
        };
        let plane = subspace_projection(3, &[Vector::from_f64(&[normal[1], -normal[0], 0.0]), Vector::from_f64(&[normal[2], 0.0, -normal[0]])], &tol());
        prop_assume!(plane.is_ok());
        let fam = MatrixFamily::numbered(vec![lift(line_projection(a)), lift(line_projection(b)), plane.unwrap()]).unwrap();
        let g = InfinitelyComplete(Dyadic::new(vec![0, 1, 2]).unwrap());
        let r = limit_product(&g, &fam, &tol(), &LimitOptions::default()).unwrap();
        prop_assert_eq!(r.mode, ProductMode::Projection);
        for m in fam.matrices() {
            prop_assert!((&(&r.matrix * m) - &r.matrix).operator_norm() <= 1e-8);
        }
    }
}
