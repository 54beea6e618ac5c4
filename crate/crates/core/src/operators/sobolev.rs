//! `E‖D^j F‖²` for `j = 0..=k`, by the chaos formula and by direct
//! differentiation.

use crate::chaos::{expectation_exact, poly_to_chaos};
use crate::error::Result;
use crate::poly::PolyFunctional;
use crate::scalar::Real;

use super::iterated_derivative;

fn falling_factorial<T: Real>(n: usize, k: usize) -> T {
    (0..k).fold(T::one(), |acc, i| acc * T::from_count(n - i))
}

/// `(E[F²], E‖DF‖², .., E‖D^k F‖²)` with
/// `E‖D^j F‖² = Σ_{n ≥ j} n!/(n-j)! ‖J_n F‖²`.
pub fn sobolev_norm_sq<T: Real>(f: &PolyFunctional<T>, k: usize) -> Vec<T> {
    let norms = poly_to_chaos(f).chaos_norms_sq();
    (0..=k)
        .map(|j| {
            norms
                .iter()
                .filter(|(&n, _)| n >= j)
                .fold(T::zero(), |acc, (&n, &v)| acc + falling_factorial::<T>(n, j) * v)
        })
        .collect()
}

/// Same vector, summing `E[entry²]` over the entries of each `D^j F`.
pub fn sobolev_norm_sq_direct<T: Real>(f: &PolyFunctional<T>, k: usize) -> Result<Vec<T>> {
    let mut out = vec![expectation_exact(&(f * f))];
    for j in 1..=k {
        let tensor = iterated_derivative(f, j)?;
        out.push(expectation_exact(&tensor.norm_sq()));
    }
    Ok(out)
}
