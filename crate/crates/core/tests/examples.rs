//! Worked examples for each public operation, checked against closed forms
//! computed independently here.

use approx::assert_relative_eq;
use statrs::distribution::{Continuous, ContinuousCDF, Normal};
use wiener_chaos::brownian::{
    derivative_of_skorokhod_residual, extended_isometry, ito_integral, skorokhod_integral, StepProcess, TimeGrid,
};
use wiener_chaos::chaos::{chaos_to_poly, expectation_exact, l2_inner, poly_to_chaos, project_chaos, ChaosExpansion};
use wiener_chaos::density::{density_estimate, shift_weight};
use wiener_chaos::gaussian_core::{
    gaussian_moment, isonormal_map, isserlis_moment, isserlis_moment_recursive, pair_partitions, CovMatrix,
};
use wiener_chaos::gaussian_measure::GaussianMeasureFD;
use wiener_chaos::hermite::{hermite_eval, HermiteTable};
use wiener_chaos::mc::{estimate_expectation, z_test_compare, EstimateReport, McConfig};
use wiener_chaos::operators::{
    chain_rule_apply, derivative, directional_derivative, divergence, identity_residual, iterated_derivative,
    malliavin_matrix, nondegeneracy_report, ou_semigroup, sobolev_norm_sq, spectral_apply, HField, IdentityId,
    IdentityInput, NondegeneracyConfig,
};
use wiener_chaos::{Chaos, Cov, HVec, MultiIndex, Poly};

fn xi(d: usize, i: usize) -> Poly {
    Poly::variable(d, i)
}

fn c(d: usize, v: f64) -> Poly {
    Poly::constant(d, v)
}

#[test]
fn pair_partitions_of_four_five_zero() {
    let p4 = pair_partitions(4).unwrap();
    assert_eq!(p4, vec![vec![(0, 1), (2, 3)], vec![(0, 2), (1, 3)], vec![(0, 3), (1, 2)]]);
    assert!(pair_partitions(5).unwrap().is_empty());
    assert_eq!(pair_partitions(0).unwrap(), vec![Vec::<(usize, usize)>::new()]);
    assert!(pair_partitions(26).is_err());
}

#[test]
fn isserlis_examples() {
    let i2 = Cov::identity(2);
    assert_eq!(isserlis_moment(&i2, &[0, 0, 1, 1]).unwrap(), 1.0);
    assert_eq!(isserlis_moment_recursive(&i2, &[0, 0, 1, 1]).unwrap(), 1.0);
    assert_eq!(isserlis_moment_recursive(&i2, &[]).unwrap(), 1.0);
    let s = 1.7f64;
    let one = CovMatrix::new(vec![vec![s * s]]).unwrap();
    assert_relative_eq!(isserlis_moment(&one, &[0, 0, 0, 0]).unwrap(), 3.0 * s.powi(4), max_relative = 1e-15);
    assert_eq!(isserlis_moment(&one, &[0, 0, 0]).unwrap(), 0.0);
    let rho = CovMatrix::new(vec![vec![1.0, 0.3], vec![0.3, 1.0]]).unwrap();
    assert_eq!(isserlis_moment_recursive(&rho, &[0, 1]).unwrap(), 0.3);
    assert!(isserlis_moment(&i2, &[0, 2]).is_err());
}

#[test]
fn covariance_validation() {
    assert!(CovMatrix::new(vec![vec![1.0, 0.5], vec![0.4, 1.0]]).is_err());
    assert!(CovMatrix::new(vec![vec![1.0, 2.0], vec![2.0, 1.0]]).is_err());
    assert!(CovMatrix::<f64>::new(vec![]).is_err());
}

#[test]
fn gaussian_moment_examples() {
    assert_eq!(gaussian_moment(1.0f64, 6), 15.0);
    assert_eq!(gaussian_moment(2.0f64, 2), 4.0);
    assert_eq!(gaussian_moment(1.0f64, 7), 0.0);
}

#[test]
fn isonormal_examples() {
    assert_eq!(isonormal_map(&HVec::basis(2, 0)), xi(2, 0));
    assert!(isonormal_map(&HVec::zeros(3)).is_zero());
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let w = isonormal_map(&HVec::new(vec![r, r]).unwrap());
    assert_relative_eq!(expectation_exact(&(&w * &w)), 1.0, epsilon = 1e-15);
}

#[test]
fn hermite_examples() {
    assert_eq!(hermite_eval(2, 3.0f64).unwrap(), 4.0);
    assert_relative_eq!(hermite_eval(5, 1.0f64).unwrap(), 0.05, epsilon = 1e-16);
    assert_eq!(hermite_eval(0, 123.0f64).unwrap(), 1.0);
    let t = HermiteTable::<f64>::new(10);
    let h3 = t.monomial_coeffs(3).unwrap();
    let want3 = [0.0, -0.5, 0.0, 1.0 / 6.0];
    for (a, b) in h3.iter().zip(want3) {
        assert_relative_eq!(*a, b, epsilon = 1e-16);
    }
    let h4 = t.monomial_coeffs(4).unwrap();
    let want4 = [1.0 / 8.0, 0.0, -0.25, 0.0, 1.0 / 24.0];
    for (a, b) in h4.iter().zip(want4) {
        assert_relative_eq!(*a, b, epsilon = 1e-16);
    }
    assert_eq!(t.monomial_coeffs(0).unwrap(), &[1.0]);
    let t = HermiteTable::<f64>::new(25);
    assert_eq!(t.generating_partial_sum(0.0, 7.0, 25).unwrap(), 1.0);
    assert!((t.generating_partial_sum(0.5, 1.0, 25).unwrap() - 0.375f64.exp()).abs() < 1e-10);
    assert!((t.generating_partial_sum(1.0, 0.0, 25).unwrap() - (-0.5f64).exp()).abs() < 1e-8);
}

#[test]
fn polynomial_products() {
    assert_eq!(&xi(1, 0) * &xi(1, 0), xi(1, 0).powi(2));
    let p = &(&xi(1, 0) + &c(1, 1.0)) * &(&xi(1, 0) - &c(1, 1.0));
    assert_eq!(p, &xi(1, 0).powi(2) - &c(1, 1.0));
    // H₂·H₁ = (x² - 1)/2 · x
    let h2 = (&xi(1, 0).powi(2) - &c(1, 1.0)).scale(0.5);
    let got = &h2 * &xi(1, 0);
    let want = (&xi(1, 0).powi(3) - &xi(1, 0)).scale(0.5);
    assert!(got.max_abs_diff(&want) < 1e-16);
}

#[test]
fn chaos_examples() {
    let x = poly_to_chaos(&xi(1, 0));
    assert_eq!(x.coeff(&MultiIndex::single(0, 1)), 1.0);
    let sq = poly_to_chaos(&xi(1, 0).powi(2));
    assert_relative_eq!(sq.coeff(&MultiIndex::single(0, 2)), 2f64.sqrt(), epsilon = 1e-15);
    assert_relative_eq!(sq.coeff(&MultiIndex::zero()), 1.0, epsilon = 1e-15);
    let cross = poly_to_chaos(&(&xi(2, 0) * &xi(2, 1)));
    assert_eq!(cross.coeff(&MultiIndex::from_dense(&[1, 1])), 1.0);

    let phi2 = chaos_to_poly(&Chaos::basis_element(1, MultiIndex::single(0, 2)));
    let want = (&xi(1, 0).powi(2) - &c(1, 1.0)).scale(1.0 / 2f64.sqrt());
    assert!(phi2.max_abs_diff(&want) < 1e-15);
    assert_eq!(chaos_to_poly(&Chaos::basis_element(1, MultiIndex::zero())), c(1, 1.0));
}

#[test]
fn expectation_and_inner_examples() {
    assert_eq!(expectation_exact(&xi(1, 0).powi(4)), 3.0);
    assert_eq!(expectation_exact(&(&xi(2, 0) * &xi(2, 1))), 0.0);
    assert_eq!(expectation_exact(&(&xi(2, 0).powi(2) * &xi(2, 1).powi(2))), 1.0);
    let a = MultiIndex::from_dense(&[2, 1]);
    let b = MultiIndex::from_dense(&[1, 2]);
    let pa = chaos_to_poly(&ChaosExpansion::<f64>::basis_element(2, a.clone()));
    let pb = chaos_to_poly(&ChaosExpansion::<f64>::basis_element(2, b));
    assert_relative_eq!(l2_inner(&pa, &pa).unwrap(), 1.0, epsilon = 1e-14);
    assert!(l2_inner(&pa, &pb).unwrap().abs() < 1e-14);
    assert_eq!(l2_inner(&xi(2, 0), &xi(2, 1)).unwrap(), 0.0);
    assert_eq!(l2_inner(&xi(1, 0).powi(2), &xi(1, 0).powi(2)).unwrap(), 3.0);
}

#[test]
fn projection_examples() {
    let f = xi(1, 0).powi(2);
    assert_relative_eq!(project_chaos(&f, 0).coeff(&MultiIndex::zero()), 1.0, epsilon = 1e-15);
    assert_relative_eq!(
        project_chaos(&f, 2).coeff(&MultiIndex::single(0, 2)),
        2f64.sqrt(),
        epsilon = 1e-15
    );
    assert!(project_chaos(&f, 1).is_zero());
}

#[test]
fn derivative_examples() {
    let h = HVec::new(vec![0.3, -1.2]).unwrap();
    let dw = derivative(&isonormal_map(&h));
    assert_eq!(dw.component(0), &c(2, 0.3));
    assert_eq!(dw.component(1), &c(2, -1.2));
    assert!(derivative(&c(2, 5.0)).components().iter().all(Poly::is_zero));
    let f = &xi(2, 0).powi(2) * &xi(2, 1);
    let df = derivative(&f);
    assert_eq!(df.component(0), &(&xi(2, 0) * &xi(2, 1)).scale(2.0));
    assert_eq!(df.component(1), &xi(2, 0).powi(2));

    assert_eq!(directional_derivative(&xi(1, 0).powi(2), &HVec::basis(1, 0)), xi(1, 0).scale(2.0));
    let k = HVec::new(vec![2.0, 0.5]).unwrap();
    assert_eq!(directional_derivative(&isonormal_map(&k), &h), c(2, h.dot(&k)));
    assert!(directional_derivative(&f, &HVec::zeros(2)).is_zero());
}

#[test]
fn iterated_derivative_examples() {
    let d2 = iterated_derivative(&(&xi(2, 0) * &xi(2, 1)), 2).unwrap();
    assert_eq!(d2.get(&[0, 1]), &c(2, 1.0));
    assert_eq!(d2.get(&[1, 0]), &c(2, 1.0));
    assert!(d2.get(&[0, 0]).is_zero() && d2.get(&[1, 1]).is_zero());
    let w = isonormal_map(&HVec::new(vec![1.0, 2.0]).unwrap());
    assert!(iterated_derivative(&w, 2).unwrap().entries().iter().all(Poly::is_zero));
    let d3 = iterated_derivative(&xi(1, 0).powi(3), 3).unwrap();
    assert_eq!(d3.get(&[0, 0, 0]), &c(1, 6.0));
}

#[test]
fn divergence_examples() {
    assert_eq!(divergence(&HField::constant(&HVec::basis(2, 0))), xi(2, 0));
    let u = HField::from_components(vec![xi(2, 0), Poly::zero(2)]).unwrap();
    assert_eq!(divergence(&u), &xi(2, 0).powi(2) - &c(2, 1.0));
    let u = HField::from_components(vec![xi(2, 1), Poly::zero(2)]).unwrap();
    assert_eq!(divergence(&u), &xi(2, 0) * &xi(2, 1));
}

#[test]
fn spectral_examples() {
    let alpha = MultiIndex::from_dense(&[2, 1]);
    let phi = chaos_to_poly(&Chaos::basis_element(2, alpha.clone()));
    let l = spectral_apply(&phi, |n| -(n as f64));
    assert_relative_eq!(l.coeff(&alpha), -3.0, epsilon = 1e-14);
    let f = &xi(2, 0).powi(3) + &xi(2, 1);
    assert!(ou_semigroup(&f, 0.0).max_abs_diff(&poly_to_chaos(&f)) == 0.0);
    let t = ou_semigroup(&xi(1, 0).powi(2), 2f64.ln());
    assert_relative_eq!(t.coeff(&MultiIndex::single(0, 2)), 0.25 * 2f64.sqrt(), epsilon = 1e-15);
    assert_relative_eq!(t.coeff(&MultiIndex::zero()), 1.0, epsilon = 1e-15);
}

#[test]
fn sobolev_examples() {
    let s = sobolev_norm_sq(&xi(1, 0), 1);
    assert_eq!(s, vec![1.0, 1.0]);
    let phi2 = chaos_to_poly(&Chaos::basis_element(1, MultiIndex::single(0, 2)));
    let s = sobolev_norm_sq(&phi2, 1);
    assert_relative_eq!(s[0], 1.0, epsilon = 1e-14);
    assert_relative_eq!(s[1], 2.0, epsilon = 1e-14);
    let phi3 = chaos_to_poly(&Chaos::basis_element(1, MultiIndex::single(0, 3)));
    assert_relative_eq!(sobolev_norm_sq(&phi3, 2)[2], 6.0, epsilon = 1e-13);
}

#[test]
fn chain_rule_examples() {
    let phi = Poly::variable(1, 0).powi(2);
    let g = chain_rule_apply(&phi, &[xi(1, 0)]).unwrap();
    assert_eq!(g, xi(1, 0).powi(2));
    assert_eq!(derivative(&g).component(0), &xi(1, 0).scale(2.0));
    let konst = Poly::constant(2, 4.0);
    let g = chain_rule_apply(&konst, &[xi(1, 0), xi(1, 0).powi(2)]).unwrap();
    assert!(derivative(&g).components().iter().all(Poly::is_zero));
}

#[test]
fn malliavin_matrix_examples() {
    let id = malliavin_matrix(&[xi(2, 0), xi(2, 1)]).unwrap();
    assert_eq!(id.get(0, 0), &c(2, 1.0));
    assert!(id.get(0, 1).is_zero());
    let sq = malliavin_matrix(&[xi(1, 0).powi(2)]).unwrap();
    assert_eq!(sq.get(0, 0), &xi(1, 0).powi(2).scale(4.0));
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let w = isonormal_map(&HVec::new(vec![r, r]).unwrap());
    let g = malliavin_matrix(&[w]).unwrap();
    assert!(g.get(0, 0).max_abs_diff(&c(2, 1.0)) < 1e-15);
}

#[test]
fn nondegeneracy_of_square() {
    let cfg = McConfig::new(200_000, 9);
    let nd = NondegeneracyConfig {
        epsilons: vec![0.01],
        ..NondegeneracyConfig::default()
    };
    let r = nondegeneracy_report(&[xi(1, 0).powi(2)], &cfg, &nd).unwrap();
    let n = Normal::new(0.0, 1.0).unwrap();
    let exact = n.cdf(0.05) - n.cdf(-0.05);
    let (_, est) = &r.prob_below[0];
    assert!(z_test_compare(exact, est, &cfg).pass, "{} vs {exact}", est.mean);
}

#[test]
fn identity_examples() {
    let ibp = IdentityInput::Ibp {
        f: xi(1, 0).powi(2),
        h: HVec::basis(1, 0),
    };
    assert_eq!(identity_residual(IdentityId::Ibp, &ibp).unwrap(), 0.0);
    let phi2 = chaos_to_poly(&Chaos::basis_element(1, MultiIndex::single(0, 2)));
    let dl = IdentityInput::DeltaDL { f: phi2 };
    assert!(identity_residual(IdentityId::DeltaDL, &dl).unwrap() < 1e-15);
    let e1 = HField::constant(&HVec::basis(1, 0));
    let energy = IdentityInput::Energy { u: e1.clone(), v: e1 };
    assert_eq!(identity_residual(IdentityId::Energy, &energy).unwrap(), 0.0);
    assert!(identity_residual(IdentityId::Duality, &ibp).is_err());
}

#[test]
fn brownian_examples() {
    let g = TimeGrid::new(4).unwrap();
    assert_eq!(g.brownian_increment::<f64>(1).unwrap(), xi(4, 0).scale(0.5));
    let one = StepProcess::<f64>::deterministic(g, &[1.0; 4]).unwrap();
    assert_eq!(ito_integral(&one).unwrap(), g.brownian_at(4).unwrap());
    assert_eq!(skorokhod_integral(&one), g.brownian_at(4).unwrap());

    let adapted = StepProcess::new(g, (0..4).map(|k| g.brownian_at::<f64>(k).unwrap()).collect()).unwrap();
    assert!(adapted.is_adapted());
    for cell in 0..4 {
        assert!(derivative_of_skorokhod_residual(&adapted, cell).unwrap() < 1e-14);
    }
    let ahead = StepProcess::new(g, vec![g.brownian_at::<f64>(4).unwrap(); 4]).unwrap();
    assert!(!ahead.is_adapted());
    let last = StepProcess::new(g, vec![xi(4, 3); 4]).unwrap();
    for cell in 0..4 {
        assert!(derivative_of_skorokhod_residual(&last, cell).unwrap() < 1e-14);
    }
    assert!(one.is_adapted());

    let iso = extended_isometry(&adapted, &adapted).unwrap();
    assert_eq!(iso.correction, 0.0);
    assert!(iso.residual() < 1e-14);
    assert!(expectation_exact(&skorokhod_integral(&ahead)).abs() < 1e-15);
}

#[test]
fn density_weight_of_rotated_linear_functional() {
    let h = HVec::new(vec![0.6, 0.8]).unwrap();
    let w = shift_weight(&isonormal_map(&h)).unwrap();
    for x in [[0.1, -0.3], [1.5, 2.0]] {
        let want = 0.6 * x[0] + 0.8 * x[1];
        assert_relative_eq!(w.eval(&x, 1e-12).unwrap(), want, epsilon = 1e-14);
    }
}

#[test]
fn density_of_standard_normal() {
    let n = Normal::new(0.0, 1.0).unwrap();
    let cfg = McConfig::new(200_000, 5);
    let est = density_estimate(&xi(1, 0), &[-1.0, 0.0, 1.0], &cfg).unwrap();
    for p in &est.points {
        let exact = n.pdf(p.x);
        let r = EstimateReport {
            mean: p.p_hat,
            std_error: p.se,
            n_used: 0,
            n_rejected: 0,
        };
        assert!(z_test_compare(exact, &r, &cfg).pass, "x={} p={} exact={exact}", p.x, p.p_hat);
    }
    assert_eq!(est.rejection_fraction, 0.0);
}

#[test]
fn near_singular_functional_is_flagged() {
    // ‖∇F‖² = 4e-12 ξ² drops under the singularity threshold for |ξ| < 1/2
    let f = xi(1, 0).powi(2).scale(1e-6);
    let est = density_estimate(&f, &[1e-6], &McConfig::new(10_000, 1)).unwrap();
    assert!(!est.reliable);
    assert!(est.rejection_fraction > 0.3 && est.rejection_fraction < 0.46);
    // nothing survives when the gradient is tiny everywhere
    let flat = xi(1, 0).scale(1e-7);
    assert!(density_estimate(&flat, &[0.0], &McConfig::new(1_000, 1)).is_err());
}

#[test]
fn mc_examples() {
    let cfg = McConfig::new(200_000, 17);
    let k = estimate_expectation(1, &cfg, |_| 3.0).unwrap();
    assert_eq!((k.mean, k.std_error), (3.0, 0.0));
    let sq = estimate_expectation(1, &cfg, |x| x[0] * x[0]).unwrap();
    assert!(z_test_compare(1.0, &sq, &cfg).pass);
    let q = estimate_expectation(1, &cfg, |x| x[0].powi(4)).unwrap();
    assert!(z_test_compare(3.0, &q, &cfg).pass);
    let est = |m: f64, se: f64| EstimateReport {
        mean: m,
        std_error: se,
        n_used: 1000,
        n_rejected: 0,
    };
    let z = z_test_compare(1.0, &est(1.001, 0.001), &cfg);
    assert!(z.pass);
    assert_relative_eq!(z.z, 1.0, epsilon = 1e-9);
    let z = z_test_compare(0.0, &est(0.5, 0.01), &cfg);
    assert!(!z.pass);
    assert_relative_eq!(z.z, 50.0, epsilon = 1e-9);
}

#[test]
fn gaussian_measure_isometries_mc() {
    let g = GaussianMeasureFD::centered(vec![vec![4.0, 0.0], vec![0.0, 1.0]]).unwrap();
    let h = g.cameron_martin_embed(&[2.0, 0.0]).unwrap().unwrap();
    let cfg = McConfig::new(100_000, 23);
    let var = estimate_expectation(2, &cfg, |y| {
        let mut x = [0.0; 2];
        g.transform(y, &mut x);
        g.hhat_eval(&h, &x).unwrap().powi(2)
    })
    .unwrap();
    assert!(z_test_compare(h.norm * h.norm, &var, &cfg).pass);
    let mean_rho = estimate_expectation(2, &cfg, |y| {
        let mut x = [0.0; 2];
        g.transform(y, &mut x);
        g.cm_density(&h, &x).unwrap()
    })
    .unwrap();
    assert!(z_test_compare(1.0, &mean_rho, &cfg).pass);
}
