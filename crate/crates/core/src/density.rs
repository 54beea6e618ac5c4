//! Density of a polynomial functional `F` through
//! `p(x) = E[1_{F > x} δ(DF / ‖DF‖²)]`.
//!
//! The weight `δ(DF/‖DF‖²)` is built symbolically. With `g = ∇F` and
//! `S = ‖g‖²`, the quotient rule gives
//!
//! ```text
//! δ(g/S) = (S (Σ ξ_i g_i - ΔF) + Σ g_i ∂_i S) / S²
//! ```
//!
//! and it is evaluated wherever `S > 0`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mc::{estimate_many, McConfig};
use crate::poly::PolyFunctional;
use crate::scalar::Real;

/// Samples with `‖∇F‖²` below this are rejected.
pub const SINGULAR_EPS: f64 = 1e-12;
/// Rejection fraction above which an estimate is flagged unreliable.
pub const MAX_REJECTION_FRACTION: f64 = 0.01;

/// `δ(DF/‖DF‖²)` as `numerator / ‖∇F‖⁴`.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityWeight<T> {
    gradient: Vec<PolyFunctional<T>>,
    grad_norm_sq: PolyFunctional<T>,
    numerator: PolyFunctional<T>,
}

impl<T: Real> DensityWeight<T> {
    /// Numerators of `u_i = ∂_i F / ‖∇F‖²`.
    pub fn gradient(&self) -> &[PolyFunctional<T>] {
        &self.gradient
    }

    /// `‖∇F‖²`, the common denominator of the `u_i`.
    pub fn grad_norm_sq(&self) -> &PolyFunctional<T> {
        &self.grad_norm_sq
    }

    pub fn numerator(&self) -> &PolyFunctional<T> {
        &self.numerator
    }

    /// `‖∇F‖⁴`.
    pub fn denominator(&self) -> PolyFunctional<T> {
        &self.grad_norm_sq * &self.grad_norm_sq
    }

    /// `u(x)`, or `None` where `‖∇F(x)‖²` is below `eps`.
    pub fn field_at(&self, x: &[T], eps: T) -> Option<Vec<T>> {
        let s = self.grad_norm_sq.eval(x);
        (s >= eps).then(|| self.gradient.iter().map(|g| g.eval(x) / s).collect())
    }

    /// The weight at `x`, or `None` where `‖∇F(x)‖²` is below `eps`.
    pub fn eval(&self, x: &[T], eps: T) -> Option<T> {
        let s = self.grad_norm_sq.eval(x);
        if s < eps {
            return None;
        }
        Some(self.numerator.eval(x) / (s * s))
    }
}

/// Closed form of `δ(DF/‖DF‖²)`.
pub fn shift_weight<T: Real>(f: &PolyFunctional<T>) -> Result<DensityWeight<T>> {
    let d = f.dim();
    let gradient = f.gradient();
    if gradient.iter().all(PolyFunctional::is_zero) {
        return Err(Error::ConstantFunctional);
    }
    let s = gradient
        .iter()
        .fold(PolyFunctional::zero(d), |acc, g| &acc + &(g * g));
    let mut drift = PolyFunctional::zero(d);
    let mut correction = PolyFunctional::zero(d);
    for (i, g) in gradient.iter().enumerate() {
        drift = &drift + &(g * &PolyFunctional::variable(d, i));
        drift = &drift - &g.partial(i);
        correction = &correction + &(g * &s.partial(i));
    }
    let numerator = &(&s * &drift) + &correction;
    Ok(DensityWeight {
        gradient,
        grad_norm_sq: s,
        numerator,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityPoint {
    pub x: f64,
    pub p_hat: f64,
    pub se: f64,
    pub n_rejected: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityEstimate {
    pub points: Vec<DensityPoint>,
    pub n_samples: u64,
    pub n_rejected: u64,
    pub rejection_fraction: f64,
    /// `false` when more than 1% of samples hit the singular set.
    pub reliable: bool,
    /// Sample kurtosis of the weight, an integrability diagnostic.
    pub weight_kurtosis: f64,
}

impl DensityEstimate {
    /// CSV with columns `x,p_hat,se,n_rejected`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,p_hat,se,n_rejected\n");
        for p in &self.points {
            let _ = writeln!(out, "{},{},{},{}", p.x, p.p_hat, p.se, p.n_rejected);
        }
        out
    }
}

/// Monte Carlo estimate of the density of `F` at each point of `xs`.
pub fn density_estimate(f: &PolyFunctional<f64>, xs: &[f64], cfg: &McConfig) -> Result<DensityEstimate> {
    if xs.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    let weight = shift_weight(f)?;
    let k = xs.len();
    // outputs: one per x, then raw moments w, w², w³, w⁴
    let reports = estimate_many(f.dim(), k + 4, cfg, |xi, out| {
        let Some(w) = weight.eval(xi, SINGULAR_EPS) else {
            return false;
        };
        let fx = f.eval(xi);
        for (o, &x) in out[..k].iter_mut().zip(xs) {
            *o = if fx > x { w } else { 0.0 };
        }
        out[k] = w;
        out[k + 1] = w * w;
        out[k + 2] = w * w * w;
        out[k + 3] = w * w * w * w;
        true
    })?;
    let n_rejected = reports[0].n_rejected;
    let n_samples = cfg.n_samples as u64;
    let rejection_fraction = n_rejected as f64 / n_samples as f64;
    let (m1, m2, m3, m4) = (
        reports[k].mean,
        reports[k + 1].mean,
        reports[k + 2].mean,
        reports[k + 3].mean,
    );
    let var = m2 - m1 * m1;
    let central4 = m4 - 4.0 * m1 * m3 + 6.0 * m1 * m1 * m2 - 3.0 * m1.powi(4);
    let weight_kurtosis = if var > 0.0 { central4 / (var * var) } else { f64::NAN };
    Ok(DensityEstimate {
        points: xs
            .iter()
            .zip(&reports[..k])
            .map(|(&x, r)| DensityPoint {
                x,
                p_hat: r.mean,
                se: r.std_error,
                n_rejected,
            })
            .collect(),
        n_samples,
        n_rejected,
        rejection_fraction,
        reliable: rejection_fraction <= MAX_REJECTION_FRACTION,
        weight_kurtosis,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn normal_pdf(x: f64, sigma: f64) -> f64 {
        (-(x * x) / (2.0 * sigma * sigma)).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt())
    }

    #[test]
    fn linear_weight_is_the_variable() {
        let w = shift_weight(&PolyFunctional::<f64>::variable(1, 0)).unwrap();
        for x in [-1.3, 0.2, 2.5] {
            assert!((w.eval(&[x], 1e-12).unwrap() - x).abs() < 1e-14);
        }
    }

    #[test]
    fn square_weight_closed_form() {
        let f = PolyFunctional::<f64>::variable(1, 0).powi(2);
        let w = shift_weight(&f).unwrap();
        for x in [-2.0, -0.3, 0.7, 1.9] {
            let want = 0.5 + 1.0 / (2.0 * x * x);
            assert!((w.eval(&[x], 1e-12).unwrap() - want).abs() < 1e-12);
        }
        assert!(w.eval(&[0.0], 1e-12).is_none());
    }

    #[test]
    fn constant_has_no_weight() {
        assert!(matches!(
            shift_weight(&PolyFunctional::<f64>::constant(2, 1.0)),
            Err(Error::ConstantFunctional)
        ));
    }

    #[test]
    fn scaled_normal_density() {
        let f = PolyFunctional::<f64>::variable(1, 0).scale(2.0);
        let est = density_estimate(&f, &[0.0], &McConfig::new(200_000, 11)).unwrap();
        let p = est.points[0];
        assert!((p.p_hat - normal_pdf(0.0, 2.0)).abs() <= 4.0 * p.se);
        assert_eq!(est.n_rejected, 0);
        assert!(est.reliable);
        assert!(est.to_csv().starts_with("x,p_hat,se,n_rejected\n0,"));
    }
}
