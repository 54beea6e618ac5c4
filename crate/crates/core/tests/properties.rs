//! Randomized structural properties over small polynomial functionals.

use proptest::prelude::*;
use wiener_chaos::chaos::{chaos_to_poly, expectation_exact, l2_inner, l2_inner_chaos, poly_to_chaos};
use wiener_chaos::gaussian_core::{isonormal_map, isserlis_moment, isserlis_moment_recursive, CovMatrix};
use wiener_chaos::operators::{derivative, directional_derivative, divergence, ou_semigroup, HField};
use wiener_chaos::{Chaos, HVec, MultiIndex, Poly};

const D: usize = 2;

fn small_poly() -> impl Strategy<Value = Poly> {
    prop::collection::vec(((0u32..4, 0u32..4), -2.0f64..2.0), 1..6).prop_map(|terms| {
        Poly::from_terms(D, terms.into_iter().map(|((a, b), c)| (MultiIndex::from_dense(&[a, b]), c))).unwrap()
    })
}

fn hvec() -> impl Strategy<Value = HVec> {
    prop::collection::vec(-2.0f64..2.0, D).prop_map(|v| HVec::new(v).unwrap())
}

fn field() -> impl Strategy<Value = HField<f64>> {
    prop::collection::vec(small_poly(), D).prop_map(|c| HField::from_components(c).unwrap())
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #[test]
    fn isonormal_is_linear_and_isometric(h in hvec(), k in hvec(), a in -3.0f64..3.0) {
        let lhs = isonormal_map(&h.combine(a, &k, 1.0));
        let rhs = &isonormal_map(&h).scale(a) + &isonormal_map(&k);
        prop_assert!(lhs.max_abs_diff(&rhs) < 1e-12);
        let ip = l2_inner(&isonormal_map(&h), &isonormal_map(&k)).unwrap();
        prop_assert!(close(ip, h.dot(&k)));
    }

    #[test]
    fn isserlis_routes_agree(r in -0.9f64..0.9, idx in prop::collection::vec(0usize..2, 0..9)) {
        let cov = CovMatrix::new(vec![vec![1.0, r], vec![r, 1.0]]).unwrap();
        let a = isserlis_moment(&cov, &idx).unwrap();
        let b = isserlis_moment_recursive(&cov, &idx).unwrap();
        prop_assert!(close(a, b));
    }

    #[test]
    fn chaos_round_trip_and_parseval(f in small_poly()) {
        let c = poly_to_chaos(&f);
        prop_assert!(chaos_to_poly(&c).max_abs_diff(&f) < 1e-10);
        prop_assert!(close(c.norm_sq(), expectation_exact(&(&f * &f))));
        let by_order: f64 = c.chaos_norms_sq().values().sum();
        prop_assert!(close(by_order, c.norm_sq()));
    }

    #[test]
    fn inner_product_routes_agree(f in small_poly(), g in small_poly()) {
        prop_assert!(close(l2_inner(&f, &g).unwrap(), l2_inner_chaos(&f, &g).unwrap()));
    }

    #[test]
    fn distinct_chaos_orders_are_orthogonal(f in small_poly(), n in 0usize..4, m in 0usize..4) {
        prop_assume!(n != m);
        let c = poly_to_chaos(&f);
        let a = chaos_to_poly(&c.project(n));
        let b = chaos_to_poly(&c.project(m));
        prop_assert!(l2_inner(&a, &b).unwrap().abs() < 1e-9 * (1.0 + c.norm_sq()));
    }

    #[test]
    fn second_directional_derivatives_commute(f in small_poly(), h in hvec(), k in hvec()) {
        let hk = directional_derivative(&directional_derivative(&f, &k), &h);
        let kh = directional_derivative(&directional_derivative(&f, &h), &k);
        prop_assert!(hk.max_abs_diff(&kh) < 1e-10);
    }

    #[test]
    fn divergence_has_mean_zero(u in field()) {
        prop_assert!(expectation_exact(&divergence(&u)).abs() < 1e-9);
    }

    #[test]
    fn duality(f in small_poly(), u in field()) {
        let lhs = expectation_exact(&(&f * &divergence(&u)));
        let rhs = expectation_exact(&derivative(&f).inner(&u));
        prop_assert!(close(lhs, rhs));
    }

    #[test]
    fn ou_semigroup_contracts(f in small_poly(), t in 0.0f64..3.0) {
        let c = poly_to_chaos(&f);
        let tf = ou_semigroup(&f, t);
        prop_assert!(tf.norm_sq() <= c.norm_sq() * (1.0 + 1e-12));
        prop_assert!(close(tf.mean(), c.mean()));
    }

    #[test]
    fn polynomial_json_round_trip(f in small_poly()) {
        let back = Poly::from_json(&f.to_json()).unwrap();
        prop_assert_eq!(back, f.clone());
        let c = poly_to_chaos(&f);
        prop_assert_eq!(Chaos::from_json(&c.to_json()).unwrap(), c);
    }
}
