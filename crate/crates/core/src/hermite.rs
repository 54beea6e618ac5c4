//! Hermite polynomials normalized with leading coefficient `1/n!`:
//! `H_0 = 1`, `H_1 = x`, `H_2 = (x² - 1)/2`, `H_3 = (x³ - 3x)/6`, ...
//!
//! They satisfy `(n+1) H_{n+1}(x) = x H_n(x) - H_{n-1}(x)` and `H_n' = H_{n-1}`,
//! and `E[H_n(ξ) H_m(ξ)] = δ_{nm} / n!` for a standard Gaussian `ξ`.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::scalar::{factorial, Real};

/// Default degree cap for [`HermiteTable`].
pub const DEFAULT_MAX_DEGREE: usize = 30;

/// Monomial coefficients of `H_0..H_max`, built once by the three-term
/// recurrence. `coeffs[n][k]` is the coefficient of `x^k` in `H_n`.
#[derive(Clone, Debug)]
pub struct HermiteTable<T> {
    coeffs: Vec<Vec<T>>,
}

impl<T: Real> Default for HermiteTable<T> {
    fn default() -> Self {
        Self::new(DEFAULT_MAX_DEGREE)
    }
}

impl<T: Real> HermiteTable<T> {
    pub fn new(max_degree: usize) -> Self {
        let mut coeffs: Vec<Vec<T>> = Vec::with_capacity(max_degree + 1);
        coeffs.push(vec![T::one()]);
        if max_degree >= 1 {
            coeffs.push(vec![T::zero(), T::one()]);
        }
        for n in 1..max_degree {
            let inv = T::one() / T::from_count(n + 1);
            let mut next = vec![T::zero(); n + 2];
            for (k, &c) in coeffs[n].iter().enumerate() {
                next[k + 1] += c * inv;
            }
            for (k, &c) in coeffs[n - 1].iter().enumerate() {
                next[k] -= c * inv;
            }
            coeffs.push(next);
        }
        Self { coeffs }
    }

    pub fn max_degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    fn check(&self, n: usize) -> Result<()> {
        if n > self.max_degree() {
            Err(Error::DegreeTooHigh {
                degree: n,
                cap: self.max_degree(),
            })
        } else {
            Ok(())
        }
    }

    /// Coefficients of `H_n` in the monomial basis, lowest power first.
    pub fn monomial_coeffs(&self, n: usize) -> Result<&[T]> {
        self.check(n)?;
        Ok(&self.coeffs[n])
    }

    /// `H_n(x)` by the recurrence, not through the monomial coefficients.
    pub fn eval(&self, n: usize, x: T) -> Result<T> {
        self.check(n)?;
        Ok(eval_by_recurrence(n, x))
    }

    /// `Σ_{n ≤ N} t^n H_n(x)`, which tends to `exp(t x - t²/2)`.
    pub fn generating_partial_sum(&self, t: T, x: T, terms: usize) -> Result<T> {
        self.check(terms)?;
        let mut sum = T::zero();
        let mut tn = T::one();
        let (mut prev, mut cur) = (T::zero(), T::one());
        for n in 0..=terms {
            sum += tn * cur;
            tn *= t;
            let next = (x * cur - prev) / T::from_count(n + 1);
            prev = cur;
            cur = next;
        }
        Ok(sum)
    }

    /// Coefficients of the orthonormal `Φ_n = √(n!) H_n` in the monomial basis.
    pub fn phi_monomial_coeffs(&self, n: usize) -> Result<Vec<T>> {
        let scale = factorial::<T>(n as u32).sqrt();
        Ok(self.monomial_coeffs(n)?.iter().map(|&c| c * scale).collect())
    }

    /// Rows `b[k]` with `x^k = Σ_j b[k][j] Φ_j(x)` for `k ≤ max_k`, from the
    /// triangular inverse of the `Φ` coefficient matrix.
    pub fn monomial_to_phi(&self, max_k: usize) -> Result<Vec<Vec<T>>> {
        self.check(max_k)?;
        let a: Vec<Vec<T>> = (0..=max_k)
            .map(|n| self.phi_monomial_coeffs(n))
            .collect::<Result<_>>()?;
        let mut b: Vec<Vec<T>> = Vec::with_capacity(max_k + 1);
        for k in 0..=max_k {
            // Φ_k = a[k][k] x^k + Σ_{i<k} a[k][i] x^i
            let mut row = vec![T::zero(); k + 1];
            row[k] = T::one();
            for i in 0..k {
                let c = a[k][i];
                if c == T::zero() {
                    continue;
                }
                for (j, &bij) in b[i].iter().enumerate() {
                    row[j] -= c * bij;
                }
            }
            let lead = a[k][k];
            for v in &mut row {
                *v /= lead;
            }
            b.push(row);
        }
        Ok(b)
    }
}

fn eval_by_recurrence<T: Real>(n: usize, x: T) -> T {
    let (mut prev, mut cur) = (T::zero(), T::one());
    for k in 0..n {
        let next = (x * cur - prev) / T::from_count(k + 1);
        prev = cur;
        cur = next;
    }
    cur
}

/// `H_n(x)` with the default table cap.
pub fn hermite_eval<T: Real>(n: usize, x: T) -> Result<T> {
    if n > DEFAULT_MAX_DEGREE {
        return Err(Error::DegreeTooHigh {
            degree: n,
            cap: DEFAULT_MAX_DEGREE,
        });
    }
    Ok(eval_by_recurrence(n, x))
}

/// Gauss–Hermite nodes and weights for the standard Gaussian measure
/// (Golub–Welsch). The rule integrates polynomials of degree `< 2n` exactly;
/// the weights sum to one.
pub fn gauss_hermite(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 {
        return Err(Error::ZeroDimension);
    }
    let jacobi = DMatrix::from_fn(n, n, |i, j| {
        if i.abs_diff(j) == 1 {
            (i.max(j) as f64).sqrt()
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(jacobi);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|k| (eig.eigenvalues[k], eig.eigenvectors[(0, k)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = pairs.iter().map(|p| p.1).sum();
    Ok(pairs.into_iter().map(|(x, w)| (x, w / total)).unzip())
}
