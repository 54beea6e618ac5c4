//! Wiener-chaos view of polynomial functionals.
//!
//! The orthonormal basis is `Φ_α = √(α!) Π_i H_{α_i}(ξ_i)`. Conversions to and
//! from the monomial basis are exact triangular changes of basis, one
//! coordinate at a time.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::gaussian_core::gaussian_moment;
use crate::hermite::HermiteTable;
use crate::poly::{Basis, MultiIndex, PolyFunctional, TermsDocument};
use crate::scalar::Real;

/// Coefficients of a functional in the `Φ_α` basis.
#[derive(Clone, Debug, PartialEq)]
pub struct ChaosExpansion<T> {
    dim: usize,
    terms: BTreeMap<MultiIndex, T>,
}

impl<T: Real> ChaosExpansion<T> {
    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            terms: BTreeMap::new(),
        }
    }

    /// The single basis element `Φ_α`.
    pub fn basis_element(dim: usize, alpha: MultiIndex) -> Self {
        let mut c = Self::zero(dim);
        c.terms.insert(alpha, T::one());
        c
    }

    pub fn from_terms<I: IntoIterator<Item = (MultiIndex, T)>>(dim: usize, terms: I) -> Result<Self> {
        // reuse the monomial checks on coordinates and degree
        let as_poly = PolyFunctional::from_terms(dim, terms)?;
        Ok(Self {
            dim,
            terms: as_poly.terms().map(|(a, c)| (a.clone(), c)).collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, T)> + '_ {
        self.terms.iter().map(|(a, &c)| (a, c))
    }

    pub fn coeff(&self, alpha: &MultiIndex) -> T {
        self.terms.get(alpha).copied().unwrap_or_else(T::zero)
    }

    /// `E[F]`, the coefficient of `Φ_0`.
    pub fn mean(&self) -> T {
        self.coeff(&MultiIndex::zero())
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// `‖F‖²_{L²} = Σ c_α²`.
    pub fn norm_sq(&self) -> T {
        self.terms.values().fold(T::zero(), |acc, &c| acc + c * c)
    }

    /// `Σ a_α b_α`.
    pub fn dot(&self, other: &Self) -> T {
        self.terms
            .iter()
            .filter_map(|(a, &c)| other.terms.get(a).map(|&e| c * e))
            .fold(T::zero(), |acc, v| acc + v)
    }

    /// `n ↦ ‖J_n F‖²` over the chaos orders present.
    pub fn chaos_norms_sq(&self) -> BTreeMap<usize, T> {
        let mut out = BTreeMap::new();
        for (a, &c) in &self.terms {
            *out.entry(a.order()).or_insert_with(T::zero) += c * c;
        }
        out
    }

    pub fn max_order(&self) -> usize {
        self.terms.keys().map(MultiIndex::order).max().unwrap_or(0)
    }

    /// `J_n F`.
    pub fn project(&self, n: usize) -> Self {
        Self {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .filter(|(a, _)| a.order() == n)
                .map(|(a, &c)| (a.clone(), c))
                .collect(),
        }
    }

    /// `Σ_n m(n) J_n F`.
    pub fn map_orders<M: Fn(usize) -> T>(&self, multiplier: M) -> Self {
        let tol = T::prune_threshold();
        Self {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .map(|(a, &c)| (a.clone(), c * multiplier(a.order())))
                .filter(|(_, c)| c.abs() >= tol)
                .collect(),
        }
    }

    /// `self + s * other`.
    pub fn axpy(&self, s: T, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut terms = self.terms.clone();
        for (a, &c) in &other.terms {
            *terms.entry(a.clone()).or_insert_with(T::zero) += s * c;
        }
        let tol = T::prune_threshold();
        terms.retain(|_, c| c.abs() >= tol);
        Self {
            dim: self.dim,
            terms,
        }
    }

    pub fn scale(&self, s: T) -> Self {
        self.map_orders(|_| s)
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.axpy(-T::one(), other)
            .terms
            .values()
            .fold(T::zero(), |m, c| m.max(c.abs()))
    }

    pub fn to_poly(&self) -> PolyFunctional<T> {
        chaos_to_poly(self)
    }

    pub fn to_document(&self) -> TermsDocument {
        TermsDocument::from_terms(self.dim, Basis::Chaos, self.terms())
    }

    pub fn from_document(doc: &TermsDocument) -> Result<Self> {
        if doc.basis != Basis::Chaos {
            return Err(Error::Format("expected basis \"chaos\"".into()));
        }
        Self::from_terms(doc.dim, doc.parsed_terms()?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_document()).expect("document serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: TermsDocument =
            serde_json::from_str(s).map_err(|e| Error::Format(e.to_string()))?;
        Self::from_document(&doc)
    }
}

/// Applies a one-dimensional change of basis coordinate by coordinate.
/// `table[k][j]` is the coefficient of the `j`-th target element in the
/// expansion of the `k`-th source element.
fn change_basis<'a, T: Real>(
    terms: impl Iterator<Item = (&'a MultiIndex, T)>,
    table: &[Vec<T>],
) -> BTreeMap<MultiIndex, T> {
    let mut out: BTreeMap<MultiIndex, T> = BTreeMap::new();
    for (alpha, c) in terms {
        let mut partial: Vec<(Vec<(usize, u32)>, T)> = vec![(Vec::new(), c)];
        for (coord, k) in alpha.iter() {
            let row = &table[k as usize];
            let mut next = Vec::with_capacity(partial.len() * row.len());
            for (beta, v) in &partial {
                for (j, &w) in row.iter().enumerate() {
                    if w == T::zero() {
                        continue;
                    }
                    let mut b = beta.clone();
                    if j > 0 {
                        b.push((coord, j as u32));
                    }
                    next.push((b, *v * w));
                }
            }
            partial = next;
        }
        for (beta, v) in partial {
            // coordinates were visited in increasing order, so beta is sorted
            *out.entry(MultiIndex::from_pairs(beta)).or_insert_with(T::zero) += v;
        }
    }
    let tol = T::prune_threshold();
    out.retain(|_, c| c.abs() >= tol);
    out
}

fn max_single_degree<'a, T: 'a>(terms: impl Iterator<Item = (&'a MultiIndex, T)>) -> usize {
    terms
        .flat_map(|(a, _)| a.iter().map(|(_, k)| k as usize))
        .max()
        .unwrap_or(0)
}

/// Exact coefficients `c_α` with `F = Σ c_α Φ_α`.
pub fn poly_to_chaos<T: Real>(f: &PolyFunctional<T>) -> ChaosExpansion<T> {
    let k = max_single_degree(f.terms());
    let table = HermiteTable::<T>::new(k.max(1))
        .monomial_to_phi(k)
        .expect("degree within table");
    ChaosExpansion {
        dim: f.dim(),
        terms: change_basis(f.terms(), &table),
    }
}

/// Inverse of [`poly_to_chaos`].
pub fn chaos_to_poly<T: Real>(c: &ChaosExpansion<T>) -> PolyFunctional<T> {
    let k = max_single_degree(c.terms());
    let hermite = HermiteTable::<T>::new(k.max(1));
    let table: Vec<Vec<T>> = (0..=k)
        .map(|n| hermite.phi_monomial_coeffs(n).expect("degree within table"))
        .collect();
    let terms = change_basis(c.terms(), &table);
    PolyFunctional::from_terms(c.dim(), terms).expect("basis change preserves shape")
}

/// `E[F]` from the moments of independent standard Gaussians.
pub fn expectation_exact<T: Real>(f: &PolyFunctional<T>) -> T {
    f.terms().fold(T::zero(), |acc, (alpha, c)| {
        acc + c * alpha
            .iter()
            .fold(T::one(), |p, (_, k)| p * gaussian_moment(T::one(), k))
    })
}

/// `E[F G]` as the expectation of the product polynomial.
pub fn l2_inner<T: Real>(f: &PolyFunctional<T>, g: &PolyFunctional<T>) -> Result<T> {
    if f.dim() != g.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            got: g.dim(),
        });
    }
    Ok(expectation_exact(&(f * g)))
}

/// `E[F G]` as the dot product of chaos coefficients.
pub fn l2_inner_chaos<T: Real>(f: &PolyFunctional<T>, g: &PolyFunctional<T>) -> Result<T> {
    if f.dim() != g.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            got: g.dim(),
        });
    }
    Ok(poly_to_chaos(f).dot(&poly_to_chaos(g)))
}

/// `J_n F`.
pub fn project_chaos<T: Real>(f: &PolyFunctional<T>, n: usize) -> ChaosExpansion<T> {
    poly_to_chaos(f).project(n)
}
