use aqrm_core::block::{build_hamiltonian, catalog_biases, j_catalog, recurrence_check, Basis, ModelParams};
use aqrm_core::boson::{Grade, GradedOp, NormalOp};
use aqrm_core::scalar::{rat, Scalar};
use aqrm_core::BlockOp;
use proptest::prelude::*;

fn arb_coeff() -> impl Strategy<Value = Scalar> {
    (-6i64..7, 1i64..5).prop_map(|(n, d)| Scalar::constant(rat(n, d)))
}

fn arb_symbolic_coeff() -> impl Strategy<Value = Scalar> {
    prop::collection::vec((-1i32..3, 0u32..3, -4i64..5, 1i64..4), 1..3)
        .prop_map(|t| Scalar::from_terms(t.into_iter().map(|(a, b, n, d)| (a, b, rat(n, d)))))
}

fn arb_normal(degree: u32, coeff: impl Strategy<Value = Scalar>) -> impl Strategy<Value = NormalOp<Scalar>> {
    prop::collection::vec((0..=degree, 0..=degree, coeff), 0..5)
        .prop_map(move |t| NormalOp::from_terms(t.into_iter().filter(|(m, n, _)| m + n <= degree)))
}

fn arb_graded(degree: u32) -> impl Strategy<Value = GradedOp<Scalar>> {
    (any::<bool>(), arb_normal(degree, arb_coeff()))
        .prop_map(|(odd, x)| GradedOp::new(if odd { Grade::Odd } else { Grade::Even }, x))
}

fn arb_symbolic_graded(degree: u32) -> impl Strategy<Value = GradedOp<Scalar>> {
    (any::<bool>(), arb_normal(degree, arb_symbolic_coeff()))
        .prop_map(|(odd, x)| GradedOp::new(if odd { Grade::Odd } else { Grade::Even }, x))
}

/// Block operators share one grade across entries, as products require.
fn arb_block(degree: u32) -> impl Strategy<Value = BlockOp<Scalar>> {
    let body = || arb_normal(degree, arb_symbolic_coeff());
    (any::<bool>(), [body(), body(), body(), body()]).prop_map(|(odd, xs)| {
        let grade = if odd { Grade::Odd } else { Grade::Even };
        let [a, b, c, d] = xs.map(|x| GradedOp::new(grade, x));
        BlockOp::new(a, b, c, d)
    })
}

fn degree(x: &GradedOp<Scalar>) -> usize {
    x.body().degree() as usize
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn matrix_oracle_exact(x in arb_graded(3), y in arb_graded(3)) {
        let n = 12;
        let block = n - degree(&x) - degree(&y);
        let lhs = x.product(&y).fock_matrix_exact(n).unwrap();
        let rhs = x.fock_matrix_exact(n).unwrap().matmul(&y.fock_matrix_exact(n).unwrap());
        for j in 0..=block {
            for k in 0..=block {
                prop_assert_eq!(lhs.signed_square(j, k), rhs.signed_square(j, k));
            }
        }
    }

    #[test]
    fn matrix_oracle_float(x in arb_graded(3), y in arb_graded(3)) {
        let n = 14;
        let block = n - degree(&x) - degree(&y);
        let lhs = x.product(&y).fock_matrix(n).unwrap();
        let rhs = x.fock_matrix(n).unwrap() * y.fock_matrix(n).unwrap();
        let scale = 1.0 + rhs.amax();
        for j in 0..=block {
            for k in 0..=block {
                prop_assert!((lhs[(j, k)] - rhs[(j, k)]).abs() <= 1e-12 * scale);
            }
        }
    }

    #[test]
    fn sigma_flip_is_an_involution(x in arb_normal(4, arb_symbolic_coeff())) {
        prop_assert_eq!(x.sigma_flip().sigma_flip(), x);
    }

    #[test]
    fn graded_product_is_associative(
        x in arb_symbolic_graded(2), y in arb_symbolic_graded(2), z in arb_symbolic_graded(2)
    ) {
        prop_assert_eq!(x.product(&y).product(&z), x.product(&y.product(&z)));
    }

    #[test]
    fn adjoint_reverses_products(x in arb_symbolic_graded(3), y in arb_symbolic_graded(3)) {
        prop_assert_eq!(x.product(&y).adjoint(), y.adjoint().product(&x.adjoint()));
        prop_assert_eq!(x.adjoint().adjoint(), x);
    }

    #[test]
    fn graded_json_round_trip(x in arb_symbolic_graded(4)) {
        let s = serde_json::to_string(&x).unwrap();
        let back: GradedOp<Scalar> = serde_json::from_str(&s).unwrap();
        prop_assert_eq!(back, x);
    }

    #[test]
    fn catalog_commutes_at_rational_parameters(gn in 1i64..9, gd in 1i64..5, dn in -8i64..9, dd in 1i64..5, k in 0usize..5) {
        let eps = catalog_biases()[k].clone();
        let p = ModelParams::numeric(rat(gn, gd), rat(dn, dd), eps.clone());
        let j = j_catalog(&ModelParams::symbolic(eps), Basis::Original)
            .unwrap()
            .substitute(Some(&rat(gn, gd)), Some(&rat(dn, dd)))
            .unwrap();
        prop_assert!(j.commutator(&build_hamiltonian(&p)).is_zero());
        prop_assert_eq!(j.adjoint(), j);
    }

    #[test]
    fn transform_basis_is_a_homomorphism(x in arb_block(2), y in arb_block(2)) {
        prop_assert_eq!(
            x.commutator(&y).transform_basis(),
            x.transform_basis().commutator(&y.transform_basis())
        );
    }

    #[test]
    fn block_json_round_trip(x in arb_block(3)) {
        let s = serde_json::to_string(&x).unwrap();
        let back: BlockOp<Scalar> = serde_json::from_str(&s).unwrap();
        prop_assert_eq!(back, x);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn recurrences_detect_exactly_the_nonzero_commutators(
        x in arb_block(2), gn in 1i64..6, dn in 1i64..6, twice_eps in -3i64..4
    ) {
        let p = ModelParams::numeric(rat(gn, 3), rat(dn, 4), rat(twice_eps, 2));
        let j = x.substitute(Some(&rat(gn, 3)), Some(&rat(dn, 4))).unwrap();
        let commutes = j.commutator(&build_hamiltonian(&p)).is_zero();
        let residuals = recurrence_check(&j, &p, j.degree() + 2);
        prop_assert_eq!(commutes, residuals.is_empty());
    }

    #[test]
    fn catalog_recurrences_vanish(gn in 1i64..6, dn in 1i64..6, k in 0usize..5) {
        let eps = catalog_biases()[k].clone();
        let p = ModelParams::numeric(rat(gn, 2), rat(dn, 3), eps.clone());
        let j = j_catalog(&p, Basis::Original).unwrap();
        prop_assert!(recurrence_check(&j, &p, 8).is_empty());
        let wrong = p.with_epsilon(&eps + rat(1, 3));
        prop_assert!(!recurrence_check(&j, &wrong, 8).is_empty());
    }
}
