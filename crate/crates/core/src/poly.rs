//! Polynomial functionals `p(ξ_1, .., ξ_d)` stored in the monomial basis.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{factorial, Real};

/// Largest total degree accepted by the fallible constructors and [`PolyFunctional::try_mul`].
pub const DEGREE_CAP: usize = 24;

/// Finitely supported map `coordinate -> degree`.
///
/// Stored as a sorted vector of `(coordinate, degree)` pairs with every degree
/// positive, so equal multi-indices compare and hash equal. Coordinates are
/// zero-based.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiIndex(Vec<(usize, u32)>);

impl MultiIndex {
    /// The empty multi-index (the constant monomial).
    pub fn zero() -> Self {
        Self(Vec::new())
    }

    /// `e_i`, degree one in coordinate `i`.
    pub fn unit(coord: usize) -> Self {
        Self(vec![(coord, 1)])
    }

    pub fn single(coord: usize, degree: u32) -> Self {
        if degree == 0 {
            Self::zero()
        } else {
            Self(vec![(coord, degree)])
        }
    }

    /// Builds a multi-index from arbitrary pairs; repeated coordinates add up
    /// and zero degrees are dropped.
    pub fn from_pairs<I: IntoIterator<Item = (usize, u32)>>(pairs: I) -> Self {
        let mut map = BTreeMap::new();
        for (c, k) in pairs {
            *map.entry(c).or_insert(0u32) += k;
        }
        Self(map.into_iter().filter(|&(_, k)| k > 0).collect())
    }

    /// From a dense degree vector.
    pub fn from_dense(degrees: &[u32]) -> Self {
        Self(
            degrees
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(c, &k)| (c, k))
                .collect(),
        )
    }

    pub fn to_dense(&self, dim: usize) -> Vec<u32> {
        let mut out = vec![0; dim];
        for &(c, k) in &self.0 {
            out[c] = k;
        }
        out
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, u32)> + '_ {
        self.0.iter().copied()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// `|α| = Σ α_i`.
    pub fn order(&self) -> usize {
        self.0.iter().map(|&(_, k)| k as usize).sum()
    }

    /// `α! = Π α_i!`.
    pub fn factorial<T: Real>(&self) -> T {
        self.0
            .iter()
            .fold(T::one(), |acc, &(_, k)| acc * factorial::<T>(k))
    }

    pub fn degree_of(&self, coord: usize) -> u32 {
        self.0
            .iter()
            .find(|&&(c, _)| c == coord)
            .map_or(0, |&(_, k)| k)
    }

    pub fn max_coord(&self) -> Option<usize> {
        self.0.last().map(|&(c, _)| c)
    }

    /// Multi-index of the product of two monomials.
    pub fn plus(&self, other: &Self) -> Self {
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            let (a, b) = (self.0[i], other.0[j]);
            match a.0.cmp(&b.0) {
                std::cmp::Ordering::Less => {
                    out.push(a);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push((a.0, a.1 + b.1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.0[i..]);
        out.extend_from_slice(&other.0[j..]);
        Self(out)
    }

    /// Lowers the degree of `coord` by one. Returns the old degree alongside,
    /// or `None` when the coordinate is absent.
    pub fn lower(&self, coord: usize) -> Option<(Self, u32)> {
        let pos = self.0.iter().position(|&(c, _)| c == coord)?;
        let k = self.0[pos].1;
        let mut v = self.0.clone();
        if k == 1 {
            v.remove(pos);
        } else {
            v[pos].1 = k - 1;
        }
        Some((Self(v), k))
    }

    /// `Π x_i^{α_i}` at a point.
    pub fn monomial_value<T: Real>(&self, x: &[T]) -> T {
        self.0
            .iter()
            .fold(T::one(), |acc, &(c, k)| acc * x[c].powi(k as i32))
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (n, (c, k)) in self.iter().enumerate() {
            if n > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}:{}", c + 1, k)?;
        }
        write!(f, ")")
    }
}

/// Polynomial in the independent standard Gaussians `ξ_1..ξ_d`, in the
/// monomial basis. Zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyFunctional<T> {
    dim: usize,
    terms: BTreeMap<MultiIndex, T>,
}

impl<T: Real> PolyFunctional<T> {
    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(dim: usize, c: T) -> Self {
        let mut p = Self::zero(dim);
        p.add_term(MultiIndex::zero(), c);
        p
    }

    /// The coordinate functional `ξ_i` (zero-based `i`).
    pub fn variable(dim: usize, coord: usize) -> Self {
        assert!(coord < dim, "coordinate {coord} out of range for dimension {dim}");
        let mut p = Self::zero(dim);
        p.add_term(MultiIndex::unit(coord), T::one());
        p
    }

    pub fn monomial(dim: usize, alpha: MultiIndex, c: T) -> Self {
        let mut p = Self::zero(dim);
        p.add_term(alpha, c);
        p
    }

    /// Linear functional `Σ a_i ξ_i`.
    pub fn linear(coeffs: &[T]) -> Self {
        let mut p = Self::zero(coeffs.len());
        for (i, &a) in coeffs.iter().enumerate() {
            p.add_term(MultiIndex::unit(i), a);
        }
        p
    }

    /// Checked constructor: coordinates must be below `dim` and the total
    /// degree within [`DEGREE_CAP`].
    pub fn from_terms<I: IntoIterator<Item = (MultiIndex, T)>>(dim: usize, terms: I) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        let mut p = Self::zero(dim);
        for (alpha, c) in terms {
            if let Some(m) = alpha.max_coord() {
                if m >= dim {
                    return Err(Error::IndexOutOfRange { index: m, dim });
                }
            }
            if alpha.order() > DEGREE_CAP {
                return Err(Error::DegreeTooHigh {
                    degree: alpha.order(),
                    cap: DEGREE_CAP,
                });
            }
            if !c.is_finite() {
                return Err(Error::NonFinite);
            }
            p.add_term(alpha, c);
        }
        p.prune();
        Ok(p)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, T)> + '_ {
        self.terms.iter().map(|(a, &c)| (a, c))
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, alpha: &MultiIndex) -> T {
        self.terms.get(alpha).copied().unwrap_or_else(T::zero)
    }

    pub fn constant_term(&self) -> T {
        self.coeff(&MultiIndex::zero())
    }

    /// Total degree; the zero polynomial has degree 0.
    pub fn degree(&self) -> usize {
        self.terms.keys().map(MultiIndex::order).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(MultiIndex::is_zero)
    }

    /// Coordinates that appear in at least one monomial.
    pub fn coords_used(&self) -> BTreeSet<usize> {
        self.terms
            .keys()
            .flat_map(|a| a.iter().map(|(c, _)| c))
            .collect()
    }

    pub(crate) fn add_term(&mut self, alpha: MultiIndex, c: T) {
        if c == T::zero() {
            return;
        }
        let e = self.terms.entry(alpha).or_insert_with(T::zero);
        *e += c;
    }

    pub(crate) fn prune(&mut self) {
        let tol = T::prune_threshold();
        self.terms.retain(|_, c| c.abs() >= tol);
    }

    fn assert_same_dim(&self, other: &Self) {
        assert_eq!(
            self.dim, other.dim,
            "polynomial functionals over different dimensions"
        );
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        Ok(())
    }

    pub fn scale(&self, s: T) -> Self {
        let mut p = Self::zero(self.dim);
        for (a, &c) in &self.terms {
            p.add_term(a.clone(), c * s);
        }
        p.prune();
        p
    }

    /// `self + s * other`.
    pub fn axpy(&self, s: T, other: &Self) -> Self {
        self.assert_same_dim(other);
        let mut p = self.clone();
        for (a, &c) in &other.terms {
            p.add_term(a.clone(), s * c);
        }
        p.prune();
        p
    }

    /// Product with dimension and degree checks.
    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let degree = self.degree() + other.degree();
        if !self.is_zero() && !other.is_zero() && degree > DEGREE_CAP {
            return Err(Error::DegreeTooHigh {
                degree,
                cap: DEGREE_CAP,
            });
        }
        Ok(self.mul_unchecked(other))
    }

    fn mul_unchecked(&self, other: &Self) -> Self {
        let mut p = Self::zero(self.dim);
        for (a, &c) in &self.terms {
            for (b, &e) in &other.terms {
                p.add_term(a.plus(b), c * e);
            }
        }
        p.prune();
        p
    }

    pub fn powi(&self, n: u32) -> Self {
        let mut acc = Self::constant(self.dim, T::one());
        let mut base = self.clone();
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// `∂F/∂ξ_i`.
    pub fn partial(&self, coord: usize) -> Self {
        let mut p = Self::zero(self.dim);
        for (a, &c) in &self.terms {
            if let Some((lowered, k)) = a.lower(coord) {
                p.add_term(lowered, c * T::from_count(k as usize));
            }
        }
        p.prune();
        p
    }

    /// `∇F` as the list of partial derivatives.
    pub fn gradient(&self) -> Vec<Self> {
        (0..self.dim).map(|i| self.partial(i)).collect()
    }

    pub fn eval(&self, x: &[T]) -> T {
        debug_assert!(x.len() >= self.dim);
        self.terms
            .iter()
            .fold(T::zero(), |acc, (a, &c)| acc + c * a.monomial_value(x))
    }

    /// Substitutes `ξ_i ↦ inner[i]`, giving a functional over the inner
    /// polynomials' dimension.
    pub fn compose(&self, inner: &[PolyFunctional<T>]) -> Result<Self> {
        if inner.len() != self.dim {
            return Err(Error::ArityMismatch {
                expected: self.dim,
                got: inner.len(),
            });
        }
        let out_dim = match inner.first() {
            Some(p) => p.dim,
            None => return Err(Error::ZeroDimension),
        };
        for p in inner {
            if p.dim != out_dim {
                return Err(Error::DimensionMismatch {
                    expected: out_dim,
                    got: p.dim,
                });
            }
        }
        // powers[i][k] = inner[i]^k, grown on demand
        let mut powers: Vec<Vec<Self>> = inner
            .iter()
            .map(|_| vec![Self::constant(out_dim, T::one())])
            .collect();
        let mut out = Self::zero(out_dim);
        for (alpha, &c) in &self.terms {
            let mut term = Self::constant(out_dim, c);
            for (i, k) in alpha.iter() {
                while powers[i].len() <= k as usize {
                    let next = &powers[i][powers[i].len() - 1] * &inner[i];
                    powers[i].push(next);
                }
                term = &term * &powers[i][k as usize];
            }
            for (b, e) in term.terms {
                out.add_term(b, e);
            }
        }
        out.prune();
        Ok(out)
    }

    /// Substitutes `ξ = A y + b` where `A` is `dim x m` row-major.
    pub fn substitute_affine(&self, a: &[Vec<T>], b: &[T]) -> Result<Self> {
        if a.len() != self.dim || b.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: a.len(),
            });
        }
        let inner: Vec<Self> = a
            .iter()
            .zip(b)
            .map(|(row, &shift)| {
                let mut p = Self::linear(row);
                p.add_term(MultiIndex::zero(), shift);
                p.prune();
                p
            })
            .collect();
        self.compose(&inner)
    }

    /// Re-embeds into a space of dimension `dim >= self.dim()`.
    pub fn with_dim(&self, dim: usize) -> Result<Self> {
        if let Some(&m) = self.coords_used().iter().next_back() {
            if m >= dim {
                return Err(Error::IndexOutOfRange { index: m, dim });
            }
        }
        Ok(Self {
            dim,
            terms: self.terms.clone(),
        })
    }

    /// Largest absolute coefficient difference against `other`.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        let diff = self - other;
        diff.terms
            .values()
            .fold(T::zero(), |m, c| m.max(c.abs()))
    }

    pub fn max_abs_coeff(&self) -> T {
        self.terms.values().fold(T::zero(), |m, c| m.max(c.abs()))
    }

    pub fn to_document(&self) -> TermsDocument {
        TermsDocument::from_terms(self.dim, Basis::Monomial, self.terms())
    }

    pub fn from_document(doc: &TermsDocument) -> Result<Self> {
        if doc.basis != Basis::Monomial {
            return Err(Error::Format("expected basis \"monomial\"".into()));
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

impl<T: Real> fmt::Display for PolyFunctional<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (n, (a, c)) in self.terms.iter().enumerate() {
            if n > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c}")?;
            for (i, k) in a.iter() {
                if k == 1 {
                    write!(f, "*x{}", i + 1)?;
                } else {
                    write!(f, "*x{}^{}", i + 1, k)?;
                }
            }
        }
        Ok(())
    }
}

impl<T: Real> Add for &PolyFunctional<T> {
    type Output = PolyFunctional<T>;
    fn add(self, rhs: Self) -> PolyFunctional<T> {
        self.axpy(T::one(), rhs)
    }
}

impl<T: Real> Sub for &PolyFunctional<T> {
    type Output = PolyFunctional<T>;
    fn sub(self, rhs: Self) -> PolyFunctional<T> {
        self.axpy(-T::one(), rhs)
    }
}

/// Panics when the dimensions differ; use [`PolyFunctional::try_mul`] for a
/// checked product.
impl<T: Real> Mul for &PolyFunctional<T> {
    type Output = PolyFunctional<T>;
    fn mul(self, rhs: Self) -> PolyFunctional<T> {
        self.assert_same_dim(rhs);
        self.mul_unchecked(rhs)
    }
}

impl<T: Real> Neg for &PolyFunctional<T> {
    type Output = PolyFunctional<T>;
    fn neg(self) -> PolyFunctional<T> {
        self.scale(-T::one())
    }
}

/// Which basis a [`TermsDocument`] is written in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    Monomial,
    Chaos,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermDocument {
    /// `[[coordinate, degree], ..]` with one-based coordinates.
    pub alpha: Vec<[u64; 2]>,
    pub c: f64,
}

/// JSON wire form shared by polynomial functionals and chaos expansions:
/// `{"dim":d, "basis":"monomial"|"chaos", "terms":[{"alpha":[[i,k],..], "c":x}]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermsDocument {
    pub dim: usize,
    pub basis: Basis,
    pub terms: Vec<TermDocument>,
}

impl TermsDocument {
    pub(crate) fn from_terms<'a, T: Real>(
        dim: usize,
        basis: Basis,
        terms: impl Iterator<Item = (&'a MultiIndex, T)>,
    ) -> Self {
        Self {
            dim,
            basis,
            terms: terms
                .map(|(a, c)| TermDocument {
                    alpha: a.iter().map(|(i, k)| [i as u64 + 1, k as u64]).collect(),
                    c: c.as_f64(),
                })
                .collect(),
        }
    }

    pub(crate) fn parsed_terms<T: Real>(&self) -> Result<Vec<(MultiIndex, T)>> {
        self.terms
            .iter()
            .map(|t| {
                let mut pairs = Vec::with_capacity(t.alpha.len());
                for &[i, k] in &t.alpha {
                    if i == 0 || i as usize > self.dim {
                        return Err(Error::Format(format!(
                            "coordinate {i} outside 1..={}",
                            self.dim
                        )));
                    }
                    let k = u32::try_from(k).map_err(|_| Error::Format("degree overflow".into()))?;
                    pairs.push((i as usize - 1, k));
                }
                let c = T::from_f64(t.c).ok_or(Error::NonFinite)?;
                Ok((MultiIndex::from_pairs(pairs), c))
            })
            .collect()
    }
}
