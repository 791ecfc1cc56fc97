use num_complex::Complex64;
use proptest::prelude::*;

use usd_cbs::criteria::{fourth_commutator_norm, laffey_test, three_commutator_test};
use usd_cbs::jordan::{diagonalizing_jordan_bases, extract_cbs, jordan_bases, JordanOutcome};
use usd_cbs::operator::{disjoint_supports, frobenius_norm, CMatrix, Projector};
use usd_cbs::oracle::{random_block_instance, random_cbs_instance};
use usd_cbs::random::{hermitian, isometry, psd, seeded};
use usd_cbs::reductions::{cbs_is_preserved, reduce_tau, reduce_tau0, ReductionKind};
use usd_cbs::Tolerances;

fn block_spec() -> impl Strategy<Value = Vec<(usize, usize)>> {
    let block = prop_oneof![
        Just((1, 1)),
        Just((1, 1)),
        Just((2, 0)),
        Just((0, 2)),
        Just((1, 0)),
        Just((0, 1)),
        Just((0, 0)),
    ];
    prop::collection::vec(block, 1..4)
}

fn wide_spec() -> impl Strategy<Value = Vec<(usize, usize)>> {
    prop::collection::vec((0usize..=2, 0usize..=2), 1..4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn symmetrized_operators_are_hermitian(seed in any::<u64>(), dim in 1usize..7) {
        let h = hermitian(dim, &mut seeded(seed));
        let m = h.matrix();
        prop_assert!(frobenius_norm(&(m - m.adjoint())) == 0.0);
        prop_assert!((h.spectral_norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn projector_and_complement_resolve_identity(seed in any::<u64>(), dim in 1usize..7, k in 0usize..7) {
        let k = k.min(dim);
        let p = Projector::from_orthonormal_columns(&isometry(dim, k, &mut seeded(seed)));
        let q = p.complement();
        prop_assert_eq!(p.rank() + q.rank(), dim);
        prop_assert!(frobenius_norm(&(p.matrix() + q.matrix() - CMatrix::identity(dim, dim))) < 1e-12);
    }

    #[test]
    fn support_overlap_is_symmetric(seed in any::<u64>(), dim in 2usize..7) {
        let tol = Tolerances::default();
        let mut rng = seeded(seed);
        let a = psd(dim, 1 + dim / 2, 0.1, 1.0, &mut rng);
        let b = psd(dim, dim / 2, 0.1, 1.0, &mut rng);
        let ab = disjoint_supports(&a, &b, &tol).unwrap();
        let ba = disjoint_supports(&b, &a, &tol).unwrap();
        prop_assert_eq!(ab.disjoint, ba.disjoint);
        prop_assert!((ab.max_overlap - ba.max_overlap).abs() < 1e-10);
    }

    #[test]
    fn commutator_norms_are_scale_invariant(seed in any::<u64>(), la in 1e-3f64..1e3, lb in 1e-3f64..1e3) {
        let tol = Tolerances::default();
        let mut rng = seeded(seed);
        let a = psd(4, 2, 0.1, 1.0, &mut rng);
        let b = psd(4, 2, 0.1, 1.0, &mut rng);
        let r = three_commutator_test(&a, &b, &tol).unwrap();
        let s = three_commutator_test(&a.scaled(la), &b.scaled(lb), &tol).unwrap();
        for (x, y) in r.norms.iter().zip(&s.norms) {
            prop_assert!((x.value - y.value).abs() <= 1e-10 * x.value.max(1e-3));
        }
        prop_assert_eq!(r.pass, s.pass);
    }

    #[test]
    fn constructed_pairs_satisfy_all_criteria(spec in block_spec(), seed in any::<u64>()) {
        let tol = Tolerances::default();
        let inst = random_block_instance(&spec, seed).unwrap();
        let (g1, g2) = &inst.pair;
        let three = three_commutator_test(g1.gamma(), g2.gamma(), &tol).unwrap();
        prop_assert!(three.pass && three.max_norm() < 1e-10, "{:?}", three);
        prop_assert!(laffey_test(g1.gamma(), g2.gamma(), &tol).unwrap().pass);
        prop_assert!(fourth_commutator_norm(g1.gamma(), g2.gamma()).unwrap() < 1e-8);
        prop_assert!(inst.truth_cbs.is_cbs_of(&[g1.gamma(), g2.gamma()], 1e-10));
    }

    #[test]
    fn jordan_pairs_of_random_subspaces(seed in any::<u64>(), dim in 1usize..9, ka in 0usize..9, kb in 0usize..9) {
        let tol = Tolerances::default();
        let mut rng = seeded(seed);
        let pa = Projector::from_orthonormal_columns(&isometry(dim, ka.min(dim), &mut rng));
        let pb = Projector::from_orthonormal_columns(&isometry(dim, kb.min(dim), &mut rng));
        let jp = jordan_bases(&pa, &pb, &tol).unwrap();
        let res = jp.residuals();
        prop_assert!(res.holds(1e-10), "{:?}", res);
        prop_assert_eq!(jp.alpha.ncols(), pa.rank());
        prop_assert_eq!(jp.beta.ncols(), pb.rank());
    }

    #[test]
    fn jordan_bases_recover_generating_angles(seed in any::<u64>()) {
        let tol = Tolerances::default();
        let inst = random_block_instance(&[(1, 1), (1, 1)], seed).unwrap();
        let (g1, g2) = &inst.pair;
        let JordanOutcome::Exists(djb) = diagonalizing_jordan_bases(g1.gamma(), g2.gamma(), &tol).unwrap() else {
            return Err(TestCaseError::fail("bases should exist"));
        };
        let mut want = inst.truth_angles.clone();
        want.sort_by(f64::total_cmp);
        let got = &djb.jordan.angles;
        prop_assert_eq!(got.len(), 2);
        for (w, g) in want.iter().zip(got) {
            prop_assert!((w - g).abs() < 1e-8, "{:?} vs {:?}", want, got);
        }
    }

    #[test]
    fn extracted_blocks_match_construction(seed in any::<u64>()) {
        let tol = Tolerances::default();
        let inst = random_block_instance(&[(1, 1), (1, 1)], seed).unwrap();
        let (g1, g2) = &inst.pair;
        let JordanOutcome::Exists(djb) = diagonalizing_jordan_bases(g1.gamma(), g2.gamma(), &tol).unwrap() else {
            return Err(TestCaseError::fail("bases should exist"));
        };
        let cbs = extract_cbs(&djb, 4, &tol).unwrap();
        prop_assert_eq!(cbs.len(), 2);
        for truth in &inst.truth_cbs.projectors {
            let best = cbs
                .projectors
                .iter()
                .map(|p| frobenius_norm(&(p.matrix() - truth.matrix())))
                .fold(f64::INFINITY, f64::min);
            prop_assert!(best < 1e-7, "{}", best);
        }
    }

    #[test]
    fn tau0_leaves_disjoint_supports(seed in any::<u64>(), dim in 2usize..7, r1 in 1usize..7, r2 in 1usize..7) {
        let tol = Tolerances::default();
        let mut rng = seeded(seed);
        let a = psd(dim, r1.min(dim), 0.1, 1.0, &mut rng).scaled(0.5 / dim as f64);
        let b = psd(dim, r2.min(dim), 0.1, 1.0, &mut rng).scaled(0.5 / dim as f64);
        let g1 = usd_cbs::reductions::WeightedState::new(a, &tol).unwrap();
        let g2 = usd_cbs::reductions::WeightedState::new(b, &tol).unwrap();
        let step = reduce_tau0(&g1, &g2, &tol).unwrap();
        let (o1, o2) = &step.output_pair;
        prop_assert!(disjoint_supports(o1.gamma(), o2.gamma(), &tol).unwrap().disjoint);
    }

    #[test]
    fn reductions_preserve_block_structures(spec in wide_spec(), seed in any::<u64>()) {
        let tol = Tolerances::default();
        let inst = random_cbs_instance(&spec, seed).unwrap();
        let (g1, g2) = &inst.pair;
        let t0 = reduce_tau0(g1, g2, &tol).unwrap();
        prop_assert!(cbs_is_preserved(&t0, &inst.truth_cbs, &tol).unwrap());
        for which in [ReductionKind::Tau1, ReductionKind::Tau2] {
            let step = reduce_tau(which, g1, g2, &tol).unwrap();
            prop_assert!(cbs_is_preserved(&step, &inst.truth_cbs, &tol).unwrap());
        }
    }
}

#[test]
fn complex_phases_do_not_disturb_the_criteria() {
    // conjugating a passing real pair by a diagonal phase unitary keeps it passing
    let tol = Tolerances::default();
    let inst = random_block_instance(&[(1, 1), (0, 2)], 3).unwrap();
    let phases = CMatrix::from_diagonal(&nalgebra::DVector::from_fn(4, |i, _| {
        Complex64::from_polar(1.0, 0.7 * i as f64)
    }));
    let a = inst.pair.0.gamma().conjugate(&phases);
    let b = inst.pair.1.gamma().conjugate(&phases);
    assert!(three_commutator_test(&a, &b, &tol).unwrap().pass);
}
