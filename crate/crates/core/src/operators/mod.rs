//! Derivative, divergence and Ornstein-Uhlenbeck type operators on
//! polynomial functionals and `H`-valued fields.

mod identities;
mod matrix;
mod nondegeneracy;
mod sobolev;
mod spectral;

pub use identities::{identity_residual, identity_residual_by_name, IdentityId, IdentityInput};
pub use matrix::{malliavin_matrix, HSMatrix, MalliavinMatrix};
pub use nondegeneracy::{nondegeneracy_report, NondegeneracyConfig, NondegeneracyReport};
pub use sobolev::{sobolev_norm_sq, sobolev_norm_sq_direct};
pub use spectral::{
    cauchy_generator, cauchy_semigroup, ou_generator, ou_semigroup, spectral_apply,
    spectral_apply_chaos,
};

use crate::error::{Error, Result};
use crate::gaussian_core::HVector;
use crate::poly::PolyFunctional;
use crate::scalar::Real;

/// `H`-valued polynomial random variable in canonical coordinates
/// `u = Σ_i u_i e_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct HField<T> {
    comps: Vec<PolyFunctional<T>>,
}

impl<T: Real> HField<T> {
    pub fn zero(dim: usize) -> Self {
        Self {
            comps: vec![PolyFunctional::zero(dim); dim],
        }
    }

    /// From coordinate functionals `u_i`; all must live in dimension `comps.len()`.
    pub fn from_components(comps: Vec<PolyFunctional<T>>) -> Result<Self> {
        let d = comps.len();
        if d == 0 {
            return Err(Error::ZeroDimension);
        }
        for c in &comps {
            if c.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: c.dim(),
                });
            }
        }
        Ok(Self { comps })
    }

    /// Canonicalizes `Σ_j F_j h_j`.
    pub fn from_pairs(dim: usize, pairs: &[(PolyFunctional<T>, HVector<T>)]) -> Result<Self> {
        let mut comps = vec![PolyFunctional::zero(dim); dim];
        for (f, h) in pairs {
            if f.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: f.dim(),
                });
            }
            if h.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: h.dim(),
                });
            }
            for (i, &hi) in h.coords().iter().enumerate() {
                if hi != T::zero() {
                    comps[i] = comps[i].axpy(hi, f);
                }
            }
        }
        Ok(Self { comps })
    }

    /// The deterministic field `h`.
    pub fn constant(h: &HVector<T>) -> Self {
        let d = h.dim();
        Self {
            comps: h
                .coords()
                .iter()
                .map(|&c| PolyFunctional::constant(d, c))
                .collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.comps.len()
    }

    pub fn component(&self, i: usize) -> &PolyFunctional<T> {
        &self.comps[i]
    }

    pub fn components(&self) -> &[PolyFunctional<T>] {
        &self.comps
    }

    /// `⟨u, v⟩_H` as a functional.
    pub fn inner(&self, other: &Self) -> PolyFunctional<T> {
        assert_eq!(self.dim(), other.dim());
        self.comps
            .iter()
            .zip(&other.comps)
            .fold(PolyFunctional::zero(self.dim()), |acc, (a, b)| &acc + &(a * b))
    }

    /// `⟨u, h⟩_H`.
    pub fn inner_vec(&self, h: &HVector<T>) -> PolyFunctional<T> {
        self.comps
            .iter()
            .zip(h.coords())
            .fold(PolyFunctional::zero(self.dim()), |acc, (a, &c)| acc.axpy(c, a))
    }

    /// `D^h u = Σ_i (D^h u_i) e_i`.
    pub fn directional_derivative(&self, h: &HVector<T>) -> Self {
        Self {
            comps: self
                .comps
                .iter()
                .map(|c| directional_derivative(c, h))
                .collect(),
        }
    }

    /// `Du` as the matrix `[∂_j u_i]`.
    pub fn derivative(&self) -> HSMatrix<T> {
        HSMatrix::from_entries(self.comps.iter().map(PolyFunctional::gradient).collect())
    }

    pub fn scale(&self, s: T) -> Self {
        Self {
            comps: self.comps.iter().map(|c| c.scale(s)).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            comps: self
                .comps
                .iter()
                .zip(&other.comps)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.comps
            .iter()
            .zip(&other.comps)
            .fold(T::zero(), |m, (a, b)| m.max(a.max_abs_diff(b)))
    }
}

/// `DF = Σ_i (∂F/∂ξ_i) e_i`.
pub fn derivative<T: Real>(f: &PolyFunctional<T>) -> HField<T> {
    HField {
        comps: f.gradient(),
    }
}

/// `D^h F = ⟨DF, h⟩_H`.
pub fn directional_derivative<T: Real>(f: &PolyFunctional<T>, h: &HVector<T>) -> PolyFunctional<T> {
    assert_eq!(f.dim(), h.dim(), "direction lives in another dimension");
    h.coords()
        .iter()
        .enumerate()
        .filter(|(_, &c)| c != T::zero())
        .fold(PolyFunctional::zero(f.dim()), |acc, (i, &c)| {
            acc.axpy(c, &f.partial(i))
        })
}

/// `D^k F` as a dense rank-`k` tensor of functionals, row-major over
/// `(i_1, .., i_k)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DerivativeTensor<T> {
    dim: usize,
    rank: usize,
    entries: Vec<PolyFunctional<T>>,
}

impl<T: Real> DerivativeTensor<T> {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn get(&self, index: &[usize]) -> &PolyFunctional<T> {
        assert_eq!(index.len(), self.rank);
        let flat = index.iter().fold(0, |acc, &i| acc * self.dim + i);
        &self.entries[flat]
    }

    pub fn entries(&self) -> &[PolyFunctional<T>] {
        &self.entries
    }

    /// `‖D^k F‖²` as the functional `Σ entries²`.
    pub fn norm_sq(&self) -> PolyFunctional<T> {
        self.entries
            .iter()
            .fold(PolyFunctional::zero(self.dim), |acc, e| &acc + &(e * e))
    }
}

/// `D^k F` with entries `∂^k F / ∂ξ_{i_1} .. ∂ξ_{i_k}`.
pub fn iterated_derivative<T: Real>(f: &PolyFunctional<T>, k: usize) -> Result<DerivativeTensor<T>> {
    if k == 0 {
        return Err(Error::InvalidConfig("derivative order must be at least 1".into()));
    }
    let d = f.dim();
    let mut entries = vec![f.clone()];
    for _ in 0..k {
        entries = entries
            .iter()
            .flat_map(|e| (0..d).map(move |j| e.partial(j)))
            .collect();
    }
    Ok(DerivativeTensor {
        dim: d,
        rank: k,
        entries,
    })
}

/// `δ(u) = Σ_i u_i ξ_i - Σ_i ∂_i u_i`.
pub fn divergence<T: Real>(u: &HField<T>) -> PolyFunctional<T> {
    let d = u.dim();
    let mut out = PolyFunctional::zero(d);
    for (i, ui) in u.comps.iter().enumerate() {
        out = &out + &(ui * &PolyFunctional::variable(d, i));
        out = &out - &ui.partial(i);
    }
    out
}

/// `φ(F^1, .., F^m)` for a polynomial `φ` in `m` variables.
pub fn chain_rule_apply<T: Real>(
    phi: &PolyFunctional<T>,
    inner: &[PolyFunctional<T>],
) -> Result<PolyFunctional<T>> {
    phi.compose(inner)
}

/// `Σ_i ∂_iφ(F) DF^i`, the right-hand side of the chain rule.
pub fn chain_rule_derivative<T: Real>(
    phi: &PolyFunctional<T>,
    inner: &[PolyFunctional<T>],
) -> Result<HField<T>> {
    let dim = inner.first().map(PolyFunctional::dim).ok_or(Error::ZeroDimension)?;
    let mut acc = HField::zero(dim);
    for (i, fi) in inner.iter().enumerate() {
        let outer = phi.partial(i).compose(inner)?;
        let dfi = derivative(fi);
        let term = HField {
            comps: dfi.comps.iter().map(|c| &outer * c).collect(),
        };
        acc = acc.add(&term);
    }
    Ok(acc)
}
