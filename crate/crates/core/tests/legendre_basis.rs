mod common;

use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;
use stratsim::legendre::{
    legendre_eval, legendre_poly, phi_eval, poly_antiderivative, Interval, RationalPoly,
    DEFAULT_MAX_DEGREE,
};
use stratsim::Error;

fn r(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn poly(c: &[(i64, i64)]) -> RationalPoly {
    RationalPoly::from_coeffs(c.iter().map(|&(n, d)| r(n, d)).collect())
}

#[test]
fn low_degree_polynomials_match_closed_forms() {
    let expected = [
        poly(&[(1, 1)]),
        poly(&[(0, 1), (1, 1)]),
        poly(&[(-1, 2), (0, 1), (3, 2)]),
        poly(&[(0, 1), (-3, 2), (0, 1), (5, 2)]),
        poly(&[(3, 8), (0, 1), (-30, 8), (0, 1), (35, 8)]),
        poly(&[(0, 1), (15, 8), (0, 1), (-70, 8), (0, 1), (63, 8)]),
        poly(&[
            (-5, 16),
            (0, 1),
            (105, 16),
            (0, 1),
            (-315, 16),
            (0, 1),
            (231, 16),
        ]),
    ];
    for (n, want) in expected.iter().enumerate() {
        assert_eq!(&legendre_poly(n).unwrap(), want, "P_{n}");
    }
}

#[test]
fn polynomial_examples() {
    assert_eq!(legendre_poly(0).unwrap(), RationalPoly::one());
    assert_eq!(legendre_poly(2).unwrap().eval(&r(1, 1)), r(1, 1));
    assert_eq!(legendre_poly(5).unwrap().eval(&r(0, 1)), r(0, 1));
    assert!(matches!(
        legendre_poly(DEFAULT_MAX_DEGREE + 1),
        Err(Error::DegreeOverflow { .. })
    ));
}

#[test]
fn antiderivative_examples() {
    assert_eq!(
        poly_antiderivative(&poly(&[(1, 1)])),
        poly(&[(0, 1), (1, 1)])
    );
    assert_eq!(
        poly_antiderivative(&poly(&[(0, 1), (1, 1)])),
        poly(&[(0, 1), (0, 1), (1, 2)])
    );
    assert_eq!(
        poly_antiderivative(&poly(&[(0, 1), (0, 1), (3, 1)])),
        poly(&[(0, 1), (0, 1), (0, 1), (1, 1)])
    );
}

#[test]
fn phi_examples() {
    let iv = Interval::new(2.0, 6.0).unwrap();
    for s in [2.0, 3.3, 6.0] {
        assert!((phi_eval(0, s, &iv).unwrap() - 0.5).abs() < 1e-15);
    }
    assert!(phi_eval(1, 4.0, &iv).unwrap().abs() < 1e-15);
    assert!(matches!(phi_eval(2, 6.5, &iv), Err(Error::Domain { .. })));
    assert!(matches!(phi_eval(2, 1.9, &iv), Err(Error::Domain { .. })));
    assert!(matches!(
        Interval::new(1.0, 0.5),
        Err(Error::InvalidInterval { .. })
    ));
}

#[test]
fn phi_two_three_orthogonal() {
    let iv = Interval::new(0.3, 1.8).unwrap();
    let v = common::gl_integrate(64, iv.start(), iv.end(), |s| {
        phi_eval(2, s, &iv).unwrap() * phi_eval(3, s, &iv).unwrap()
    });
    assert!(v.abs() < 1e-12, "{v}");
}

#[test]
fn orthonormal_under_gauss_quadrature() {
    for delta in [1e-3, 1.0, 10.0] {
        let iv = Interval::new(0.25, 0.25 + delta).unwrap();
        for j in 0..=12 {
            for k in 0..=12 {
                let v = common::gl_integrate(64, iv.start(), iv.end(), |s| {
                    phi_eval(j, s, &iv).unwrap() * phi_eval(k, s, &iv).unwrap()
                });
                let want = if j == k { 1.0 } else { 0.0 };
                assert!((v - want).abs() <= 1e-10, "Δ={delta} j={j} k={k}: {v}");
            }
        }
    }
}

#[test]
fn basis_integrals_exact() {
    // ∫_t^T φ_j = √(Δ(2j+1))/2 · ∫_{-1}^{1} P_j, and ∫P_j = 2δ_{j0} exactly.
    let (lo, hi) = (r(-1, 1), r(1, 1));
    for j in 0..=20 {
        let v = legendre_poly(j).unwrap().definite_integral(&lo, &hi);
        assert_eq!(v, if j == 0 { r(2, 1) } else { r(0, 1) }, "j = {j}");
    }
}

proptest! {
    #[test]
    fn float_recurrence_matches_exact(n in 0usize..=30, num in -1000i64..=1000) {
        let x = r(num, 1000);
        let exact = legendre_poly(n).unwrap().eval(&x);
        let xf = num as f64 / 1000.0;
        let e: f64 = num_traits::ToPrimitive::to_f64(&exact).unwrap();
        prop_assert!((legendre_eval(n, xf) - e).abs() < 1e-13);
        prop_assert!((common::legendre(n, xf).0 - e).abs() < 1e-13);
    }

    #[test]
    fn bonnet_recurrence_holds(n in 1usize..40) {
        let x = RationalPoly::x();
        let lhs = legendre_poly(n + 1).unwrap().scale(&r(n as i64 + 1, 1));
        let rhs = &(&x * &legendre_poly(n).unwrap()).scale(&r(2 * n as i64 + 1, 1))
            - &legendre_poly(n - 1).unwrap().scale(&r(n as i64, 1));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn antiderivative_differentiates_back(c in proptest::collection::vec(-50i64..50, 0..8)) {
        let p = RationalPoly::from_integers(&c);
        let a = poly_antiderivative(&p);
        prop_assert!(a.coeffs().first().is_none_or(|c0| *c0 == r(0, 1)));
        for (i, ci) in p.coeffs().iter().enumerate() {
            prop_assert_eq!(&a.coeffs()[i + 1] * r(i as i64 + 1, 1), ci.clone());
        }
    }

    #[test]
    fn phi_squared_integrates_to_one(j in 0usize..16, t in -5.0f64..5.0, delta in 1e-3f64..20.0) {
        let iv = Interval::new(t, t + delta).unwrap();
        let v = common::gl_integrate(40, t, t + delta, |s| phi_eval(j, s, &iv).unwrap().powi(2));
        prop_assert!((v - 1.0).abs() < 1e-10);
    }
}
