use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use relpow::linalg::{op_norm, CMat, CVec};
use relpow::linrel::LinearRelation;
use relpow::resolvent::{c_resolvent, resolvent_power};

fn cplx() -> impl Strategy<Value = Complex64> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(re, im)| Complex64::new(re, im))
}

fn cmat(r: usize, c: usize) -> impl Strategy<Value = CMat> {
    prop::collection::vec(cplx(), r * c).prop_map(move |v| DMatrix::from_vec(r, c, v))
}

/// `{(Bx, Lx)}` with `B` of rank `r <= n`, so the relation is multivalued when `r < n`,
/// and a regularizer commuting with it: `I` or a resolvent `(λ0 - A)^{-1}`.
#[derive(Debug, Clone)]
struct Case {
    a: LinearRelation,
    c: CMat,
    x: CVec,
}

fn case() -> impl Strategy<Value = Case> {
    (1usize..=4)
        .prop_flat_map(|n| (Just(n), 0usize..=n, cmat(n, n), cmat(n, n), any::<bool>(), cmat(n, 1)))
        .prop_map(|(n, r, b, l, regular, x)| {
            let mut b = b;
            for j in r..n {
                b.column_mut(j).fill(Complex64::new(0.0, 0.0));
            }
            let a = LinearRelation::from_pencil(&b, &(l - CMat::identity(n, n) * Complex64::new(2.0, 0.0))).unwrap();
            let eye = CMat::identity(n, n);
            let c = if regular {
                eye
            } else {
                c_resolvent(&a, &eye, Complex64::new(5.0, 1.0)).unwrap_or(eye)
            };
            Case { a, c, x: x.column(0).into_owned() }
        })
}

fn resolvents(cs: &Case, lam: Complex64, mu: Complex64) -> Option<(CMat, CMat)> {
    let rl = c_resolvent(&cs.a, &cs.c, lam).ok()?;
    let rm = c_resolvent(&cs.a, &cs.c, mu).ok()?;
    // keep away from the spectrum, where the identities lose digits to conditioning
    (op_norm(&rl) < 1e4 && op_norm(&rm) < 1e4).then_some((rl, rm))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn resolvent_equation(cs in case(), lam in cplx(), mu in cplx()) {
        let (lam, mu) = (lam * 6.0, mu * 6.0);
        let Some((rl, rm)) = resolvents(&cs, lam, mu) else { return Ok(()); };
        let c = &cs.c;
        let lhs = &rl * c * &cs.x - &rm * c * &cs.x;
        let rhs = &rl * &rm * &cs.x * (mu - lam);
        let scale = (1.0 + op_norm(&rl)) * (1.0 + op_norm(&rm)) * (1.0 + op_norm(c)).powi(2);
        prop_assert!((lhs - rhs).norm() <= 1e-11 * scale * cs.x.norm().max(1e-300), "{scale}");
    }

    #[test]
    fn resolvents_commute(cs in case(), lam in cplx(), mu in cplx()) {
        let (lam, mu) = (lam * 6.0, mu * 6.0);
        let Some((rl, rm)) = resolvents(&cs, lam, mu) else { return Ok(()); };
        let scale = (1.0 + op_norm(&rl)) * (1.0 + op_norm(&rm));
        prop_assert!(op_norm(&(&rl * &rm - &rm * &rl)) <= 1e-12 * scale);
    }

    #[test]
    fn inclusion_chain(cs in case(), lam in cplx(), coef in prop::collection::vec(cplx(), 8)) {
        let lam = lam * 6.0;
        let Some((rl, _)) = resolvents(&cs, lam, lam) else { return Ok(()); };
        let (a, c) = (&cs.a, &cs.c);
        let n = a.dim();
        // a pair (x, y) of A
        let v = a.graph() * CVec::from_column_slice(&coef[..a.rank()]);
        let (x, y) = (v.rows(0, n).into_owned(), v.rows(n, n).into_owned());
        let lhs = &rl * &y;
        let rhs = &rl * &x * lam - c * &x;
        prop_assert!((lhs - rhs).norm() <= 1e-10 * (1.0 + op_norm(&rl) * (1.0 + lam.norm())));
        // (w, λ R w - C w) lies in the composition A ∘ (λ - A)^{-1}C
        let w = &cs.x;
        let inner = LinearRelation::from_matrix(&rl).unwrap();
        let comp = a.compose(&inner).unwrap();
        let img = &rl * w * lam - c * w;
        prop_assert!(comp.contains_pair(w, &img, 1e-8).unwrap().0);
    }

    #[test]
    fn derivative_formula(cs in case(), lam in cplx(), n in 1usize..=4) {
        let lam = lam * 6.0;
        let Some((rl, _)) = resolvents(&cs, lam, lam) else { return Ok(()); };
        prop_assume!(op_norm(&rl) < 50.0);
        // (n-1)-th central difference of λ -> R(λ)x against (-1)^{n-1}(n-1)! (λ-A)^{-n}C x
        let m = n - 1;
        let h = 1e-2;
        let mut fd = CVec::zeros(cs.x.len());
        for j in 0..=m {
            let w = (0..j).fold(1.0, |acc, i| acc * (m - i) as f64 / (i + 1) as f64);
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            let z = lam + Complex64::new((0.5 * m as f64 - j as f64) * h, 0.0);
            let Ok(r) = c_resolvent(&cs.a, &cs.c, z) else { return Ok(()); };
            fd += r * &cs.x * Complex64::new(sign * w / h.powi(m as i32), 0.0);
        }
        let fact: f64 = (1..n).map(|i| i as f64).product();
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        let want = resolvent_power(&cs.a, &cs.c, lam, n).unwrap() * &cs.x * Complex64::new(sign * fact, 0.0);
        // truncation O(h^2 ‖R‖^{n+2}) plus rounding amplified by h^{-m}
        let trunc = 1e-3 * (want.norm() + op_norm(&rl).powi(n as i32 + 2) * cs.x.norm());
        let round = 1e2 * f64::EPSILON * (1.0 + op_norm(&rl)) * cs.x.norm() / h.powi(m as i32);
        prop_assert!((fd - &want).norm() <= trunc + round, "n={n}");
    }
}
