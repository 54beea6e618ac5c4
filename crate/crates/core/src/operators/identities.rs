//! Exact residuals of the integration-by-parts, duality and generator
//! identities on polynomial inputs.

use std::fmt;
use std::str::FromStr;

use crate::chaos::{chaos_to_poly, expectation_exact, poly_to_chaos, ChaosExpansion};
use crate::error::{Error, Result};
use crate::gaussian_core::{isonormal_map, HVector};
use crate::poly::{MultiIndex, PolyFunctional};
use crate::scalar::Real;

use super::{cauchy_generator, derivative, directional_derivative, divergence, ou_generator, HField};

/// Names of the checked identities.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum IdentityId {
    /// `E⟨DF, h⟩ = E[W(h) F]`
    Ibp,
    /// `E[⟨DF, h⟩ G] = E[F G W(h)] - E[F ⟨DG, h⟩]`
    IbpProduct,
    /// `E[F δ(u)] = E⟨DF, u⟩`
    Duality,
    /// `D^h δ(u) = ⟨u, h⟩ + δ(D^h u)`
    Commute,
    /// `E[δ(u) δ(v)] = E⟨u, v⟩ + E Tr(Du Dv)`
    Energy,
    /// `δ D F = -L F`
    DeltaDL,
    /// `L F = Σ_j D^{e_j} D^{e_j} F - Σ_j (D^{e_j} F) W(e_j)`
    LSecondOrder,
    /// `Tr(AB)` by diagonal sum and by basis pairing; `‖A‖²_HS = Tr(A Aᵀ)`
    TraceForm,
    /// `L Φ_α = -|α| Φ_α`
    LEigen,
    /// `‖F‖² + ‖CF‖² = Σ (1+n) ‖J_n F‖² = ‖F‖² + E‖DF‖²`
    CauchyNorm,
}

impl IdentityId {
    pub const ALL: [IdentityId; 10] = [
        IdentityId::Ibp,
        IdentityId::IbpProduct,
        IdentityId::Duality,
        IdentityId::Commute,
        IdentityId::Energy,
        IdentityId::DeltaDL,
        IdentityId::LSecondOrder,
        IdentityId::TraceForm,
        IdentityId::LEigen,
        IdentityId::CauchyNorm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            IdentityId::Ibp => "IBP",
            IdentityId::IbpProduct => "IBP-PRODUCT",
            IdentityId::Duality => "DUALITY",
            IdentityId::Commute => "COMMUTE",
            IdentityId::Energy => "ENERGY",
            IdentityId::DeltaDL => "DELTA-D-L",
            IdentityId::LSecondOrder => "L-SECOND-ORDER",
            IdentityId::TraceForm => "TRACE-FORM",
            IdentityId::LEigen => "L-EIGEN",
            IdentityId::CauchyNorm => "CAUCHY-NORM",
        }
    }
}

impl fmt::Display for IdentityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for IdentityId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        IdentityId::ALL
            .into_iter()
            .find(|id| id.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownIdentity(s.to_string()))
    }
}

/// Inputs for one instance of an identity.
#[derive(Clone, Debug)]
pub enum IdentityInput<T> {
    Ibp { f: PolyFunctional<T>, h: HVector<T> },
    IbpProduct { f: PolyFunctional<T>, g: PolyFunctional<T>, h: HVector<T> },
    Duality { f: PolyFunctional<T>, u: HField<T> },
    Commute { u: HField<T>, h: HVector<T> },
    Energy { u: HField<T>, v: HField<T> },
    DeltaDL { f: PolyFunctional<T> },
    LSecondOrder { f: PolyFunctional<T> },
    TraceForm { u: HField<T>, v: HField<T> },
    LEigen { dim: usize, alpha: MultiIndex },
    CauchyNorm { f: PolyFunctional<T> },
}

impl<T: Real> IdentityInput<T> {
    pub fn id(&self) -> IdentityId {
        match self {
            IdentityInput::Ibp { .. } => IdentityId::Ibp,
            IdentityInput::IbpProduct { .. } => IdentityId::IbpProduct,
            IdentityInput::Duality { .. } => IdentityId::Duality,
            IdentityInput::Commute { .. } => IdentityId::Commute,
            IdentityInput::Energy { .. } => IdentityId::Energy,
            IdentityInput::DeltaDL { .. } => IdentityId::DeltaDL,
            IdentityInput::LSecondOrder { .. } => IdentityId::LSecondOrder,
            IdentityInput::TraceForm { .. } => IdentityId::TraceForm,
            IdentityInput::LEigen { .. } => IdentityId::LEigen,
            IdentityInput::CauchyNorm { .. } => IdentityId::CauchyNorm,
        }
    }
}

fn shape_err(id: IdentityId, reason: impl Into<String>) -> Error {
    Error::IdentityShape {
        identity: id.name(),
        reason: reason.into(),
    }
}

fn same_dim(id: IdentityId, dims: &[usize]) -> Result<()> {
    if dims.windows(2).any(|w| w[0] != w[1]) {
        return Err(shape_err(id, format!("inputs live in dimensions {dims:?}")));
    }
    Ok(())
}

/// `|LHS - RHS|` for expectation identities, or the largest coefficient of
/// `LHS - RHS` for symbolic ones.
pub fn identity_residual<T: Real>(id: IdentityId, input: &IdentityInput<T>) -> Result<T> {
    if input.id() != id {
        return Err(shape_err(id, format!("got inputs for {}", input.id())));
    }
    match input {
        IdentityInput::Ibp { f, h } => {
            same_dim(id, &[f.dim(), h.dim()])?;
            let lhs = expectation_exact(&directional_derivative(f, h));
            let rhs = expectation_exact(&(&isonormal_map(h) * f));
            Ok((lhs - rhs).abs())
        }
        IdentityInput::IbpProduct { f, g, h } => {
            same_dim(id, &[f.dim(), g.dim(), h.dim()])?;
            let lhs = expectation_exact(&(&directional_derivative(f, h) * g));
            let fg = f * g;
            let rhs = expectation_exact(&(&fg * &isonormal_map(h)))
                - expectation_exact(&(f * &directional_derivative(g, h)));
            Ok((lhs - rhs).abs())
        }
        IdentityInput::Duality { f, u } => {
            same_dim(id, &[f.dim(), u.dim()])?;
            let lhs = expectation_exact(&(f * &divergence(u)));
            let rhs = expectation_exact(&derivative(f).inner(u));
            Ok((lhs - rhs).abs())
        }
        IdentityInput::Commute { u, h } => {
            same_dim(id, &[u.dim(), h.dim()])?;
            let lhs = directional_derivative(&divergence(u), h);
            let rhs = &u.inner_vec(h) + &divergence(&u.directional_derivative(h));
            Ok(lhs.max_abs_diff(&rhs))
        }
        IdentityInput::Energy { u, v } => {
            same_dim(id, &[u.dim(), v.dim()])?;
            let lhs = expectation_exact(&(&divergence(u) * &divergence(v)));
            let rhs = expectation_exact(&u.inner(v))
                + expectation_exact(&u.derivative().trace_product(&v.derivative()));
            Ok((lhs - rhs).abs())
        }
        IdentityInput::DeltaDL { f } => {
            let lhs = divergence(&derivative(f));
            let rhs = chaos_to_poly(&ou_generator(f)).scale(-T::one());
            Ok(lhs.max_abs_diff(&rhs))
        }
        IdentityInput::LSecondOrder { f } => {
            let d = f.dim();
            let mut rhs = PolyFunctional::zero(d);
            for j in 0..d {
                let dj = f.partial(j);
                rhs = &rhs + &dj.partial(j);
                rhs = &rhs - &(&dj * &PolyFunctional::variable(d, j));
            }
            let lhs = chaos_to_poly(&ou_generator(f));
            Ok(lhs.max_abs_diff(&rhs))
        }
        IdentityInput::TraceForm { u, v } => {
            same_dim(id, &[u.dim(), v.dim()])?;
            let a = u.derivative();
            let b = v.derivative();
            let r1 = a.trace_product(&b).max_abs_diff(&a.trace_product_basis(&b));
            let r2 = a.hs_norm_sq().max_abs_diff(&a.trace_product(&a.transpose()));
            Ok(r1.max(r2))
        }
        IdentityInput::LEigen { dim, alpha } => {
            if alpha.max_coord().is_some_and(|m| m >= *dim) {
                return Err(shape_err(id, "multi-index exceeds dimension"));
            }
            let phi = chaos_to_poly(&ChaosExpansion::basis_element(*dim, alpha.clone()));
            let lhs = chaos_to_poly(&ou_generator(&phi));
            let rhs = phi.scale(-T::from_count(alpha.order()));
            Ok(lhs.max_abs_diff(&rhs))
        }
        IdentityInput::CauchyNorm { f } => {
            let c = poly_to_chaos(f);
            let weighted = c
                .chaos_norms_sq()
                .iter()
                .fold(T::zero(), |acc, (&n, &v)| acc + (T::one() + T::from_count(n)) * v);
            let spectral = c.norm_sq() + cauchy_generator(f).norm_sq();
            let df = derivative(f);
            let direct = expectation_exact(&(f * f)) + expectation_exact(&df.inner(&df));
            Ok((spectral - weighted).abs().max((weighted - direct).abs()))
        }
    }
}

/// [`identity_residual`] addressed by name.
pub fn identity_residual_by_name<T: Real>(name: &str, input: &IdentityInput<T>) -> Result<T> {
    identity_residual(name.parse()?, input)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xi(d: usize, i: usize) -> PolyFunctional<f64> {
        PolyFunctional::variable(d, i)
    }

    #[test]
    fn names_round_trip() {
        for id in IdentityId::ALL {
            assert_eq!(id.name().parse::<IdentityId>().unwrap(), id);
        }
        assert!(matches!(
            "NOPE".parse::<IdentityId>(),
            Err(Error::UnknownIdentity(_))
        ));
    }

    #[test]
    fn ibp_example() {
        let f = xi(1, 0).powi(2);
        let r = identity_residual(
            IdentityId::Ibp,
            &IdentityInput::Ibp {
                f,
                h: HVector::basis(1, 0),
            },
        )
        .unwrap();
        assert_eq!(r, 0.0);
    }

    #[test]
    fn delta_d_l_example() {
        let phi2 = chaos_to_poly(&ChaosExpansion::<f64>::basis_element(1, MultiIndex::single(0, 2)));
        let dd = divergence(&derivative(&phi2));
        assert!(dd.max_abs_diff(&phi2.scale(2.0)) < 1e-14);
        let r = identity_residual(IdentityId::DeltaDL, &IdentityInput::DeltaDL { f: phi2 }).unwrap();
        assert!(r < 1e-14);
    }

    #[test]
    fn energy_example() {
        let e1 = HField::constant(&HVector::<f64>::basis(1, 0));
        let r = identity_residual(
            IdentityId::Energy,
            &IdentityInput::Energy {
                u: e1.clone(),
                v: e1,
            },
        )
        .unwrap();
        assert_eq!(r, 0.0);
    }

    #[test]
    fn mismatched_inputs_are_rejected() {
        let input = IdentityInput::DeltaDL { f: xi(1, 0) };
        assert!(matches!(
            identity_residual(IdentityId::Ibp, &input),
            Err(Error::IdentityShape { .. })
        ));
        assert!(matches!(
            identity_residual_by_name("FOO", &input),
            Err(Error::UnknownIdentity(_))
        ));
        let bad = IdentityInput::Ibp {
            f: xi(2, 0),
            h: HVector::basis(3, 0),
        };
        assert!(identity_residual(IdentityId::Ibp, &bad).is_err());
    }
}
