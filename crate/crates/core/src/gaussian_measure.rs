//! Gaussian measures `N(a, Q)` on `ℝ^m`, their Cameron–Martin space
//! `Q^{1/2}(ℝ^m)`, and the gradients `∇_H = Q∇` and `M = Q^{1/2}∇`.
//!
//! Everything here is `f64`. Square roots and pseudo-inverses come from the
//! spectral decomposition of `Q`; eigenvalues at or below [`EIGEN_FLOOR`]
//! are treated as kernel directions.
//!
//! The maps `ĥ`, `𝒲_z` and `ρ_h` are evaluated at `x - a`, which is the
//! usual convention for a centered measure and reduces to it when `a = 0`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::chaos::expectation_exact;
use crate::error::{Error, Result};
use crate::gaussian_core::CovMatrix;
use crate::mc::{estimate_many, EstimateReport, McConfig};
use crate::poly::PolyFunctional;

pub const EIGEN_FLOOR: f64 = 1e-12;

/// Wire format of a measure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureDescriptor {
    pub mean: Vec<f64>,
    pub cov: Vec<Vec<f64>>,
}

#[derive(Clone, Debug)]
pub struct GaussianMeasureFD {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<f64>,
    sqrt_cov: DMatrix<f64>,
    inv_sqrt_cov: DMatrix<f64>,
    inv_cov: DMatrix<f64>,
}

/// An element `h = Q^{1/2} z` of the Cameron–Martin space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CMVector {
    pub h: Vec<f64>,
    pub z: Vec<f64>,
    /// `‖h‖_H = ‖z‖`.
    pub norm: f64,
}

/// `∇f`, `∇_H f = Q∇f` and `Mf = Q^{1/2}∇f` at one point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gradients {
    pub grad: Vec<f64>,
    pub grad_h: Vec<f64>,
    pub m: Vec<f64>,
}

fn to_vec(v: &DVector<f64>) -> Vec<f64> {
    v.iter().copied().collect()
}

fn to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

fn max_abs(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0, |m, c| m.max(c.abs()))
}

impl GaussianMeasureFD {
    pub fn new(mean: Vec<f64>, cov: Vec<Vec<f64>>) -> Result<Self> {
        let m = cov.len();
        CovMatrix::new(cov.clone())?;
        if mean.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: mean.len(),
            });
        }
        if mean.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite);
        }
        let q = DMatrix::from_fn(m, m, |i, j| 0.5 * (cov[i][j] + cov[j][i]));
        let eig = SymmetricEigen::new(q.clone());
        let lambda = eig.eigenvalues.map(|l| if l > EIGEN_FLOOR { l } else { 0.0 });
        let v = eig.eigenvectors;
        let spectral = |g: &dyn Fn(f64) -> f64| {
            let diag = DMatrix::from_diagonal(&lambda.map(|l| if l > 0.0 { g(l) } else { 0.0 }));
            &v * diag * v.transpose()
        };
        let sqrt_cov = spectral(&f64::sqrt);
        let inv_sqrt_cov = spectral(&|l| 1.0 / l.sqrt());
        let inv_cov = spectral(&|l| 1.0 / l);
        Ok(Self {
            mean: DVector::from_vec(mean),
            cov: q,
            eigenvalues: lambda,
            eigenvectors: v,
            sqrt_cov,
            inv_sqrt_cov,
            inv_cov,
        })
    }

    pub fn centered(cov: Vec<Vec<f64>>) -> Result<Self> {
        let m = cov.len();
        Self::new(vec![0.0; m], cov)
    }

    pub fn standard(m: usize) -> Result<Self> {
        Self::centered(CovMatrix::<f64>::identity(m).rows().to_vec())
    }

    pub fn from_descriptor(d: &MeasureDescriptor) -> Result<Self> {
        Self::new(d.mean.clone(), d.cov.clone())
    }

    pub fn descriptor(&self) -> MeasureDescriptor {
        MeasureDescriptor {
            mean: self.mean(),
            cov: self.cov(),
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let d: MeasureDescriptor = serde_json::from_str(s).map_err(|e| Error::Format(e.to_string()))?;
        Self::from_descriptor(&d)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.descriptor()).expect("descriptor serializes")
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> Vec<f64> {
        to_vec(&self.mean)
    }

    pub fn cov(&self) -> Vec<Vec<f64>> {
        to_rows(&self.cov)
    }

    /// Eigenvalues of `Q`, floored to zero, in the order of [`Self::eigenvectors`].
    pub fn eigenvalues(&self) -> Vec<f64> {
        to_vec(&self.eigenvalues)
    }

    /// Columns are the eigenvectors.
    pub fn eigenvectors(&self) -> Vec<Vec<f64>> {
        to_rows(&self.eigenvectors)
    }

    pub fn sqrt_cov(&self) -> Vec<Vec<f64>> {
        to_rows(&self.sqrt_cov)
    }

    /// Pseudo-inverse of `Q^{1/2}`.
    pub fn inv_sqrt_cov(&self) -> Vec<Vec<f64>> {
        to_rows(&self.inv_sqrt_cov)
    }

    pub fn kernel_dim(&self) -> usize {
        self.eigenvalues.iter().filter(|&&l| l == 0.0).count()
    }

    pub fn is_nondegenerate(&self) -> bool {
        self.kernel_dim() == 0
    }

    pub fn is_centered(&self) -> bool {
        self.mean.iter().all(|&c| c == 0.0)
    }

    fn require_nondegenerate(&self) -> Result<()> {
        match self.kernel_dim() {
            0 => Ok(()),
            k => Err(Error::DegenerateMeasure { kernel_dim: k }),
        }
    }

    fn vector(&self, x: &[f64]) -> Result<DVector<f64>> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(DVector::from_column_slice(x))
    }

    fn centered_at(&self, x: &[f64]) -> Result<DVector<f64>> {
        Ok(self.vector(x)? - &self.mean)
    }

    /// `x = a + Q^{1/2} ξ`.
    pub fn transform(&self, xi: &[f64], out: &mut [f64]) {
        let m = self.dim();
        for (i, o) in out.iter_mut().enumerate().take(m) {
            *o = self.mean[i] + (0..m).map(|j| self.sqrt_cov[(i, j)] * xi[j]).sum::<f64>();
        }
    }

    /// `exp(i⟨f,a⟩ - ½⟨Qf,f⟩)`.
    pub fn char_function(&self, f: &[f64]) -> Result<Complex64> {
        let f = self.vector(f)?;
        let phase = f.dot(&self.mean);
        let decay = -0.5 * f.dot(&(&self.cov * &f));
        Ok(Complex64::new(0.0, phase).exp() * decay.exp())
    }

    /// Monte Carlo estimates of the real and imaginary parts of `E[e^{i⟨f,x⟩}]`.
    pub fn char_function_mc(&self, f: &[f64], cfg: &McConfig) -> Result<(EstimateReport, EstimateReport)> {
        let f = self.vector(f)?;
        let m = self.dim();
        let r = estimate_many(m, 2, cfg, |xi, out| {
            let mut x = vec![0.0; m];
            self.transform(xi, &mut x);
            let t: f64 = x.iter().zip(f.iter()).map(|(a, b)| a * b).sum();
            out[0] = t.cos();
            out[1] = t.sin();
            true
        })?;
        Ok((r[0], r[1]))
    }

    /// `h` with its preimage under `Q^{1/2}`, or `None` when `h` has a
    /// component along the kernel of `Q`.
    pub fn cameron_martin_embed(&self, h: &[f64]) -> Result<Option<CMVector>> {
        let hv = self.vector(h)?;
        let tol = 1e-10 * max_abs(&hv).max(1.0);
        for (k, &l) in self.eigenvalues.iter().enumerate() {
            if l == 0.0 && self.eigenvectors.column(k).dot(&hv).abs() > tol {
                return Ok(None);
            }
        }
        let z = &self.inv_sqrt_cov * &hv;
        Ok(Some(CMVector {
            h: h.to_vec(),
            norm: z.norm(),
            z: to_vec(&z),
        }))
    }

    /// The Cameron–Martin vector `Q^{1/2} z`.
    pub fn cameron_martin_from_preimage(&self, z: &[f64]) -> Result<CMVector> {
        let zv = self.vector(z)?;
        let h = &self.sqrt_cov * &zv;
        self.cameron_martin_embed(h.as_slice())?.ok_or(Error::NotInCameronMartin)
    }

    /// `ĥ(x) = ⟨Q^{-1}h, x - a⟩`.
    pub fn hhat_eval(&self, h: &CMVector, x: &[f64]) -> Result<f64> {
        self.require_nondegenerate()?;
        let hv = self.vector(&h.h)?;
        Ok((&self.inv_cov * hv).dot(&self.centered_at(x)?))
    }

    /// `ρ_h(x) = exp(ĥ(x) - ½‖h‖²_H)`, the density of `N(a + h, Q)` against `N(a, Q)`.
    pub fn cm_density(&self, h: &CMVector, x: &[f64]) -> Result<f64> {
        Ok((self.hhat_eval(h, x)? - 0.5 * h.norm * h.norm).exp())
    }

    /// `𝒲_z(x) = ⟨Q^{-1/2} z, x - a⟩`.
    pub fn white_noise_eval(&self, z: &[f64], x: &[f64]) -> Result<f64> {
        self.require_nondegenerate()?;
        let zv = self.vector(z)?;
        Ok((&self.inv_sqrt_cov * zv).dot(&self.centered_at(x)?))
    }

    pub fn gradients(&self, f: &PolyFunctional<f64>, x: &[f64]) -> Result<Gradients> {
        self.require_nondegenerate()?;
        self.check_poly(f)?;
        self.vector(x)?;
        let grad = DVector::from_iterator(self.dim(), f.gradient().iter().map(|g| g.eval(x)));
        Ok(Gradients {
            grad_h: to_vec(&(&self.cov * &grad)),
            m: to_vec(&(&self.sqrt_cov * &grad)),
            grad: to_vec(&grad),
        })
    }

    /// `max |∇_H f - Q^{1/2} M f|` and `|‖∇_H f‖_H - ‖Mf‖|` at `x`.
    pub fn gradient_relation_residuals(&self, f: &PolyFunctional<f64>, x: &[f64]) -> Result<(f64, f64)> {
        let g = self.gradients(f, x)?;
        let grad_h = DVector::from_vec(g.grad_h);
        let m = DVector::from_vec(g.m);
        let composed = max_abs(&(&grad_h - &self.sqrt_cov * &m));
        let h_norm = (&self.inv_sqrt_cov * &grad_h).norm();
        Ok((composed, (h_norm - m.norm()).abs()))
    }

    fn check_poly(&self, f: &PolyFunctional<f64>) -> Result<()> {
        if f.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: f.dim(),
            });
        }
        Ok(())
    }

    /// `f(a + shift + Q^{1/2} y)` as a polynomial in `y`.
    fn pull_back(&self, f: &PolyFunctional<f64>, shift: &DVector<f64>) -> Result<PolyFunctional<f64>> {
        let b = to_vec(&(&self.mean + shift));
        f.substitute_affine(&self.sqrt_cov(), &b)
    }

    /// `E_γ[f]` by exact moments.
    pub fn expectation(&self, f: &PolyFunctional<f64>) -> Result<f64> {
        self.check_poly(f)?;
        Ok(expectation_exact(&self.pull_back(f, &DVector::zeros(self.dim()))?))
    }

    /// `E_γ[f(· + h)]` and `E_γ[f ρ_h]`, both exact.
    ///
    /// The second is computed as `E[g(y) e^{⟨z,y⟩}] e^{-‖z‖²/2}` with
    /// `g(y) = f(a + Q^{1/2} y)`, expanding the exponential into its
    /// moment series coordinate by coordinate.
    pub fn change_of_variables(&self, f: &PolyFunctional<f64>, h: &CMVector) -> Result<(f64, f64)> {
        self.require_nondegenerate()?;
        self.check_poly(f)?;
        let hv = self.vector(&h.h)?;
        let shifted = expectation_exact(&self.pull_back(f, &hv)?);
        let g = self.pull_back(f, &DVector::zeros(self.dim()))?;
        let mut weighted = 0.0;
        for (alpha, c) in g.terms() {
            let mut prod = c;
            for (i, &zi) in h.z.iter().enumerate() {
                prod *= tilted_moment(zi, alpha.degree_of(i));
            }
            weighted += prod;
        }
        Ok((shifted, weighted))
    }

    pub fn change_of_variables_residual(&self, f: &PolyFunctional<f64>, h: &CMVector) -> Result<f64> {
        let (a, b) = self.change_of_variables(f, h)?;
        Ok((a - b).abs())
    }

    /// `|E_γ[⟨Q^{1/2}∇f, z⟩] - E_γ[f 𝒲_z]|`, both sides exact.
    pub fn gaussian_ibp_residual(&self, f: &PolyFunctional<f64>, z: &[f64]) -> Result<f64> {
        self.require_nondegenerate()?;
        self.check_poly(f)?;
        let zv = self.vector(z)?;
        let m = self.dim();
        let h = &self.sqrt_cov * &zv;
        let lhs_poly = f
            .gradient()
            .iter()
            .enumerate()
            .fold(PolyFunctional::zero(m), |acc, (i, g)| acc.axpy(h[i], g));
        let w = &self.inv_sqrt_cov * &zv;
        let shift = -w.dot(&self.mean);
        let mut wz = PolyFunctional::linear(w.as_slice());
        wz = &wz + &PolyFunctional::constant(m, shift);
        let rhs_poly = f * &wz;
        let zero = DVector::zeros(m);
        let lhs = expectation_exact(&self.pull_back(&lhs_poly, &zero)?);
        let rhs = expectation_exact(&self.pull_back(&rhs_poly, &zero)?);
        Ok((lhs - rhs).abs())
    }
}

/// `E[Y^k e^{zY}] e^{-z²/2}` for a standard Gaussian `Y`, summed as
/// `e^{-z²/2} Σ_j z^j/j! E[Y^{k+j}]`.
fn tilted_moment(z: f64, k: u32) -> f64 {
    let k = k as usize;
    // term_j = z^j/j! (k+j-1)!! for k+j even; step j -> j+2 multiplies by
    // z² (k+j+1) / ((j+1)(j+2))
    let start = k % 2;
    let mut term = z.powi(start as i32) * crate::scalar::double_factorial::<f64>(k as i64 + start as i64 - 1);
    let mut sum = 0.0;
    let mut j = start;
    while j < 2000 {
        sum += term;
        let next = term * z * z * (k + j + 1) as f64 / ((j + 1) * (j + 2)) as f64;
        if next.abs() <= 1e-18 * sum.abs() && j > k + 2 {
            break;
        }
        term = next;
        j += 2;
    }
    sum * (-0.5 * z * z).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn diag(d: &[f64]) -> GaussianMeasureFD {
        let m = d.len();
        let cov = (0..m)
            .map(|i| (0..m).map(|j| if i == j { d[i] } else { 0.0 }).collect())
            .collect();
        GaussianMeasureFD::centered(cov).unwrap()
    }

    fn x(m: usize, i: usize) -> PolyFunctional<f64> {
        PolyFunctional::variable(m, i)
    }

    #[test]
    fn char_function_examples() {
        let g = GaussianMeasureFD::standard(2).unwrap();
        assert_eq!(g.char_function(&[0.0, 0.0]).unwrap(), Complex64::new(1.0, 0.0));
        let c = g.char_function(&[1.0, 0.0]).unwrap();
        assert_relative_eq!(c.re, (-0.5f64).exp(), epsilon = 1e-15);
        assert_relative_eq!(c.im, 0.0);
        let shifted = GaussianMeasureFD::new(vec![1.0, 0.0], g.cov()).unwrap();
        let c = shifted.char_function(&[1.0, 0.0]).unwrap();
        let want = Complex64::new(-0.5, 1.0).exp();
        assert!((c - want).norm() < 1e-15);
    }

    #[test]
    fn embed_examples() {
        let g = diag(&[4.0, 1.0]);
        let h = g.cameron_martin_embed(&[2.0, 0.0]).unwrap().unwrap();
        assert_relative_eq!(h.z[0], 1.0, epsilon = 1e-14);
        assert_relative_eq!(h.z[1], 0.0, epsilon = 1e-14);
        assert_relative_eq!(h.norm, 1.0, epsilon = 1e-14);
        let zero = g.cameron_martin_embed(&[0.0, 0.0]).unwrap().unwrap();
        assert_eq!(zero.norm, 0.0);

        let deg = diag(&[1.0, 0.0]);
        assert_eq!(deg.kernel_dim(), 1);
        assert!(deg.cameron_martin_embed(&[0.0, 1.0]).unwrap().is_none());
        assert!(deg.cameron_martin_embed(&[3.0, 0.0]).unwrap().is_some());
        assert!(matches!(
            deg.white_noise_eval(&[1.0, 0.0], &[1.0, 1.0]),
            Err(Error::DegenerateMeasure { kernel_dim: 1 })
        ));
    }

    #[test]
    fn hhat_and_white_noise() {
        let g = diag(&[4.0, 1.0]);
        let h = g.cameron_martin_embed(&[2.0, 0.0]).unwrap().unwrap();
        assert_relative_eq!(g.hhat_eval(&h, &[1.0, 1.0]).unwrap(), 0.5, epsilon = 1e-15);
        assert_relative_eq!(g.white_noise_eval(&h.z, &[1.0, 1.0]).unwrap(), 0.5, epsilon = 1e-15);
        assert_eq!(g.white_noise_eval(&[0.0, 0.0], &[3.0, -1.0]).unwrap(), 0.0);
    }

    #[test]
    fn density_examples() {
        let g = GaussianMeasureFD::standard(1).unwrap();
        let h = g.cameron_martin_embed(&[1.0]).unwrap().unwrap();
        assert_relative_eq!(g.cm_density(&h, &[0.3]).unwrap(), (0.3f64 - 0.5).exp(), epsilon = 1e-15);
        let (lhs, rhs) = g.change_of_variables(&PolyFunctional::constant(1, 1.0), &h).unwrap();
        assert_relative_eq!(lhs, 1.0);
        assert_relative_eq!(rhs, 1.0, epsilon = 1e-14);
        let (lhs, rhs) = g.change_of_variables(&x(1, 0), &h).unwrap();
        assert_relative_eq!(lhs, 1.0);
        assert_relative_eq!(rhs, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn tilted_moments_match_shifted_moments() {
        // E[Y^k e^{zY}] e^{-z²/2} = E[(Y+z)^k]
        for &z in &[-1.5, 0.0, 0.4, 2.0] {
            for k in 0..8u32 {
                let f = PolyFunctional::<f64>::linear(&[1.0]).substitute_affine(&[vec![1.0]], &[z]).unwrap();
                let want = expectation_exact(&f.powi(k));
                assert_relative_eq!(tilted_moment(z, k), want, max_relative = 1e-13, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn gradient_examples() {
        let g = diag(&[4.0, 1.0]);
        let gr = g.gradients(&x(2, 0), &[0.3, -0.2]).unwrap();
        assert_eq!(gr.grad, vec![1.0, 0.0]);
        assert_relative_eq!(gr.grad_h[0], 4.0, epsilon = 1e-14);
        assert_relative_eq!(gr.m[0], 2.0, epsilon = 1e-14);
        let (a, b) = g.gradient_relation_residuals(&x(2, 0).powi(3), &[0.3, -0.2]).unwrap();
        assert!(a < 1e-14 && b < 1e-14);
    }

    #[test]
    fn ibp_examples() {
        let g = GaussianMeasureFD::standard(1).unwrap();
        assert!(g.gaussian_ibp_residual(&x(1, 0).powi(2), &[1.0]).unwrap() < 1e-15);
        assert!(g.gaussian_ibp_residual(&PolyFunctional::constant(1, 2.0), &[1.0]).unwrap() < 1e-15);
        let q = GaussianMeasureFD::centered(vec![vec![2.0, 0.5], vec![0.5, 1.0]]).unwrap();
        let f = &(&x(2, 0).powi(3) * &x(2, 1)) + &x(2, 1).powi(2);
        assert!(q.gaussian_ibp_residual(&f, &[0.7, -1.1]).unwrap() < 1e-12);
    }

    #[test]
    fn descriptor_roundtrip_rejects_unknown_keys() {
        let g = GaussianMeasureFD::from_json(r#"{"mean":[0,1],"cov":[[2,0],[0,1]]}"#).unwrap();
        assert_eq!(g.mean(), vec![0.0, 1.0]);
        assert!(GaussianMeasureFD::from_json(&g.to_json()).is_ok());
        assert!(GaussianMeasureFD::from_json(r#"{"mean":[0],"cov":[[1]],"x":1}"#).is_err());
        assert!(GaussianMeasureFD::from_json(r#"{"mean":[0],"cov":[[-1]]}"#).is_err());
    }

    #[test]
    fn char_function_mc_agrees() {
        let g = GaussianMeasureFD::new(vec![0.5, -0.2], vec![vec![1.0, 0.3], vec![0.3, 0.5]]).unwrap();
        let f = [0.8, -0.4];
        let exact = g.char_function(&f).unwrap();
        let cfg = McConfig::new(50_000, 3);
        let (re, im) = g.char_function_mc(&f, &cfg).unwrap();
        assert!((re.mean - exact.re).abs() <= 4.0 * re.std_error);
        assert!((im.mean - exact.im).abs() <= 4.0 * im.std_error);
    }
}
