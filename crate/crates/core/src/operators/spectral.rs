//! Spectral multipliers `Σ_n m(n) J_n F`: the Ornstein-Uhlenbeck generator and
//! semigroup, and the Cauchy generator and semigroup.

use crate::chaos::{poly_to_chaos, ChaosExpansion};
use crate::poly::PolyFunctional;
use crate::scalar::Real;

/// `Σ_n m(n) J_n F`.
pub fn spectral_apply<T: Real, M: Fn(usize) -> T>(f: &PolyFunctional<T>, multiplier: M) -> ChaosExpansion<T> {
    poly_to_chaos(f).map_orders(multiplier)
}

pub fn spectral_apply_chaos<T: Real, M: Fn(usize) -> T>(c: &ChaosExpansion<T>, multiplier: M) -> ChaosExpansion<T> {
    c.map_orders(multiplier)
}

/// `L F = -Σ n J_n F`.
pub fn ou_generator<T: Real>(f: &PolyFunctional<T>) -> ChaosExpansion<T> {
    spectral_apply(f, |n| -T::from_count(n))
}

/// `T_t F = Σ e^{-nt} J_n F`.
pub fn ou_semigroup<T: Real>(f: &PolyFunctional<T>, t: T) -> ChaosExpansion<T> {
    spectral_apply(f, |n| (-T::from_count(n) * t).exp())
}

/// `C F = -Σ √n J_n F`.
pub fn cauchy_generator<T: Real>(f: &PolyFunctional<T>) -> ChaosExpansion<T> {
    spectral_apply(f, |n| -T::from_count(n).sqrt())
}

/// `P_t F = Σ e^{-√n t} J_n F`.
pub fn cauchy_semigroup<T: Real>(f: &PolyFunctional<T>, t: T) -> ChaosExpansion<T> {
    spectral_apply(f, |n| (-T::from_count(n).sqrt() * t).exp())
}
