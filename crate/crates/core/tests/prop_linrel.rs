use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use relpow::linalg::{span_defect, CMat, CVec};
use relpow::linrel::LinearRelation;

fn cplx() -> impl Strategy<Value = Complex64> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(re, im)| Complex64::new(re, im))
}

fn cmat(r: usize, c: usize) -> impl Strategy<Value = CMat> {
    prop::collection::vec(cplx(), r * c).prop_map(move |v| DMatrix::from_vec(r, c, v))
}

/// Generic relation on C^n with a graph of `k` random columns.
fn relation_nk(n: usize, k: usize) -> impl Strategy<Value = LinearRelation> {
    cmat(2 * n, k).prop_map(|g| LinearRelation::from_graph(&g).unwrap())
}

fn relation() -> impl Strategy<Value = LinearRelation> {
    (1usize..=4)
        .prop_flat_map(|n| (Just(n), 0usize..=2 * n))
        .prop_flat_map(|(n, k)| relation_nk(n, k))
}

fn pair_of_relations() -> impl Strategy<Value = (LinearRelation, LinearRelation)> {
    (1usize..=4)
        .prop_flat_map(|n| (Just(n), 0usize..=2 * n, 0usize..=2 * n))
        .prop_flat_map(|(n, k1, k2)| (relation_nk(n, k1), relation_nk(n, k2)))
}

fn same_span(a: &CMat, b: &CMat, tol: f64) -> bool {
    a.ncols() == b.ncols() && span_defect(a, b) <= tol && span_defect(b, a) <= tol
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn inverse_is_an_involution(a in relation()) {
        prop_assert!(a.inverse().inverse().equals(&a, 1e-10));
    }

    #[test]
    fn inverse_of_product((a, b) in pair_of_relations()) {
        let lhs = b.compose(&a).unwrap().inverse();
        let rhs = a.inverse().compose(&b.inverse()).unwrap();
        prop_assert!(lhs.equals(&rhs, 1e-8));
    }

    #[test]
    fn kernel_of_inverse_is_multivalued_part(a in relation()) {
        prop_assert!(same_span(&a.inverse().parts().kernel, &a.parts().mulpart, 1e-9));
    }

    #[test]
    fn combined_pairs_stay_in_graph(
        a in relation(),
        s in cplx(), e in cplx(),
        u in prop::collection::vec(cplx(), 8),
        v in prop::collection::vec(cplx(), 8),
    ) {
        prop_assume!(a.rank() > 0 && s.norm() + e.norm() > 1e-3);
        let n = a.dim();
        let g = a.graph();
        let k = a.rank();
        let p1 = g * CVec::from_column_slice(&u[..k]);
        let p2 = g * CVec::from_column_slice(&v[..k]);
        let comb = p1 * s + p2 * e;
        let x = comb.rows(0, n).into_owned();
        let y = comb.rows(n, n).into_owned();
        prop_assert!(a.contains_pair(&x, &y, 1e-10).unwrap().0);
        // x in D(A) so λx + ηx lies in the domain of the shifted sum λA + ηA ⊆ (λ+η)A
        prop_assume!((s + e).norm() > 1e-3);
        let sum = a.scalar_shift_mul(s, Complex64::new(0.0, 0.0))
            .add(&a.scalar_shift_mul(e, Complex64::new(0.0, 0.0)))
            .unwrap();
        let scaled = a.scalar_shift_mul(s + e, Complex64::new(0.0, 0.0));
        prop_assert!(sum.subset_of(&scaled, 1e-8).0);
    }

    #[test]
    fn shifted_powers_share_domains(a in relation(), lam in cplx(), n in 1usize..=4) {
        let shifted = a.scalar_shift_mul(Complex64::new(-1.0, 0.0), lam * 3.0);
        prop_assert!(same_span(&shifted.power_domain(n), &a.power_domain(n), 1e-8));
    }

    #[test]
    fn adjoint_is_an_involution(a in relation()) {
        prop_assert!(a.adjoint().adjoint().equals(&a, 1e-9));
    }

    #[test]
    fn adjoint_rank_is_complementary(a in relation()) {
        prop_assert_eq!(a.adjoint().rank() + a.rank(), 2 * a.dim());
    }
}
