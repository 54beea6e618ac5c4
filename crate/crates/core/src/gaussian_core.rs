//! The finite-dimensional isonormal Gaussian space `H = R^d`, `W(h) = Σ h_i ξ_i`,
//! and joint Gaussian moments by pair-partition enumeration.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::poly::PolyFunctional;
use crate::scalar::{double_factorial, Real};

/// Largest set size [`pair_partitions`] will enumerate.
pub const PAIR_PARTITION_CAP: usize = 24;

/// Dimension `d >= 1` of the Hilbert space and number of driving Gaussians.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HilbertDim(usize);

impl HilbertDim {
    pub fn new(d: usize) -> Result<Self> {
        if d == 0 {
            Err(Error::ZeroDimension)
        } else {
            Ok(Self(d))
        }
    }

    pub fn get(self) -> usize {
        self.0
    }
}

/// Element of `H = R^d`, given by its coordinates in the basis `{e_i}`.
#[derive(Clone, Debug, PartialEq)]
pub struct HVector<T>(Vec<T>);

impl<T: Real> HVector<T> {
    pub fn new(coords: Vec<T>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::ZeroDimension);
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self(coords))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(vec![T::zero(); dim])
    }

    /// `e_i`, zero-based.
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut v = vec![T::zero(); dim];
        v[i] = T::one();
        Self(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[T] {
        &self.0
    }

    pub fn dot(&self, other: &Self) -> T {
        assert_eq!(self.dim(), other.dim());
        self.0
            .iter()
            .zip(&other.0)
            .fold(T::zero(), |acc, (&a, &b)| acc + a * b)
    }

    pub fn norm(&self) -> T {
        self.dot(self).sqrt()
    }

    /// `a * self + b * other`.
    pub fn combine(&self, a: T, other: &Self, b: T) -> Self {
        Self(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(&x, &y)| a * x + b * y)
                .collect(),
        )
    }
}

/// Symmetric positive semidefinite covariance matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CovMatrix<T> {
    entries: Vec<Vec<T>>,
}

impl<T: Real> CovMatrix<T> {
    /// Validates squareness, symmetry and positive semidefiniteness (both up
    /// to a tolerance relative to the largest entry).
    pub fn new(entries: Vec<Vec<T>>) -> Result<Self> {
        let n = entries.len();
        if n == 0 {
            return Err(Error::ZeroDimension);
        }
        for row in &entries {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: row.len(),
                });
            }
            if row.iter().any(|c| !c.is_finite()) {
                return Err(Error::NonFinite);
            }
        }
        let scale = entries
            .iter()
            .flatten()
            .fold(1.0f64, |m, c| m.max(c.abs().as_f64()));
        let mut gap = 0.0f64;
        for i in 0..n {
            for j in 0..i {
                gap = gap.max((entries[i][j] - entries[j][i]).abs().as_f64());
            }
        }
        if gap > 1e-10 * scale {
            return Err(Error::NotSymmetric { gap });
        }
        let m = DMatrix::from_fn(n, n, |i, j| entries[i][j].as_f64());
        let min_eig = SymmetricEigen::new(m).eigenvalues.min();
        if min_eig < -1e-10 * scale {
            return Err(Error::NotPsd { min_eig });
        }
        Ok(Self { entries })
    }

    pub fn identity(n: usize) -> Self {
        let entries = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { T::one() } else { T::zero() })
                    .collect()
            })
            .collect();
        Self { entries }
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.entries[i][j]
    }

    pub fn rows(&self) -> &[Vec<T>] {
        &self.entries
    }

    fn check_indices(&self, indices: &[usize]) -> Result<()> {
        for &i in indices {
            if i >= self.dim() {
                return Err(Error::IndexOutOfRange {
                    index: i,
                    dim: self.dim(),
                });
            }
        }
        Ok(())
    }
}

/// A partition of `{0..n}` into unordered pairs `(i, j)` with `i < j`.
pub type PairPartition = Vec<(usize, usize)>;

/// All partitions of `{0, .., n-1}` into disjoint pairs.
///
/// The smallest unpaired element is matched with each remaining element in
/// increasing order, so the output order is canonical. Odd `n` gives no
/// partitions; `n = 0` gives the single empty partition.
pub fn pair_partitions(n: usize) -> Result<Vec<PairPartition>> {
    if n > PAIR_PARTITION_CAP {
        return Err(Error::TooManyElements {
            n,
            cap: PAIR_PARTITION_CAP,
        });
    }
    if n % 2 == 1 {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    let remaining: Vec<usize> = (0..n).collect();
    let mut current = Vec::with_capacity(n / 2);
    extend_partitions(&remaining, &mut current, &mut out);
    Ok(out)
}

fn extend_partitions(remaining: &[usize], current: &mut PairPartition, out: &mut Vec<PairPartition>) {
    let Some((&first, rest)) = remaining.split_first() else {
        out.push(current.clone());
        return;
    };
    for (k, &partner) in rest.iter().enumerate() {
        let mut next: Vec<usize> = Vec::with_capacity(rest.len() - 1);
        next.extend_from_slice(&rest[..k]);
        next.extend_from_slice(&rest[k + 1..]);
        current.push((first, partner));
        extend_partitions(&next, current, out);
        current.pop();
    }
}

/// `E[ξ_{i_1} .. ξ_{i_n}]` for a centered Gaussian vector with covariance
/// `cov`, as the sum over pair partitions of products of covariances.
/// Indices may repeat.
pub fn isserlis_moment<T: Real>(cov: &CovMatrix<T>, indices: &[usize]) -> Result<T> {
    cov.check_indices(indices)?;
    let partitions = pair_partitions(indices.len())?;
    Ok(partitions.iter().fold(T::zero(), |acc, part| {
        acc + part
            .iter()
            .fold(T::one(), |p, &(a, b)| p * cov.get(indices[a], indices[b]))
    }))
}

/// Same moment by the recursion `F(i_1..i_n) = Σ_j c_{i_1 i_j} F(.. without i_1, i_j ..)`.
pub fn isserlis_moment_recursive<T: Real>(cov: &CovMatrix<T>, indices: &[usize]) -> Result<T> {
    cov.check_indices(indices)?;
    if indices.len() > PAIR_PARTITION_CAP {
        return Err(Error::TooManyElements {
            n: indices.len(),
            cap: PAIR_PARTITION_CAP,
        });
    }
    Ok(moment_recursion(cov, indices))
}

fn moment_recursion<T: Real>(cov: &CovMatrix<T>, indices: &[usize]) -> T {
    match indices {
        [] => T::one(),
        [_] => T::zero(),
        [first, rest @ ..] => {
            if rest.len() % 2 == 0 {
                return T::zero();
            }
            let mut acc = T::zero();
            let mut sub = Vec::with_capacity(rest.len() - 1);
            for j in 0..rest.len() {
                let c = cov.get(*first, rest[j]);
                if c == T::zero() {
                    continue;
                }
                sub.clear();
                sub.extend_from_slice(&rest[..j]);
                sub.extend_from_slice(&rest[j + 1..]);
                acc += c * moment_recursion(cov, &sub);
            }
            acc
        }
    }
}

/// `E[X^n]` for `X ~ N(0, σ²)`: `(n-1)!! σ^n` for even `n`, zero for odd `n`.
pub fn gaussian_moment<T: Real>(sigma: T, n: u32) -> T {
    if n % 2 == 1 {
        T::zero()
    } else {
        double_factorial::<T>(n as i64 - 1) * sigma.powi(n as i32)
    }
}

/// `W(h) = Σ ⟨h, e_i⟩ ξ_i`.
pub fn isonormal_map<T: Real>(h: &HVector<T>) -> PolyFunctional<T> {
    PolyFunctional::linear(h.coords())
}
