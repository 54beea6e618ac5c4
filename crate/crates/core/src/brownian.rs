//! Brownian motion on `[0, 1]` over a uniform grid of `n` cells.
//!
//! `H = L²(0,1)` is truncated to step functions on the grid with orthonormal
//! basis `e_c = 1_{[c·dt, (c+1)·dt)} / √dt`, and `W(e_c) = ξ_c`. Cells are
//! zero-based; `B_{t_k}` uses grid times `t_k = k·dt`, `k = 0..=n`.
//!
//! The pointwise derivative `D_t F` for `t` in cell `c` is `∂_c F / √dt`, so
//! that `D_t B_s = 1_{[0,s]}(t)` holds exactly on grid points.

use std::fmt::Write as _;

use crate::chaos::expectation_exact;
use crate::error::{Error, Result};
use crate::mc::{GaussianSampler, McConfig};
use crate::operators::{divergence, HField};
use crate::poly::PolyFunctional;
use crate::scalar::Real;

/// Largest grid accepted for symbolic step processes.
pub const SYMBOLIC_CELL_CAP: usize = 16;
/// Largest grid accepted for sampled paths.
pub const SAMPLED_CELL_CAP: usize = 1 << 14;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TimeGrid {
    n_cells: usize,
}

impl TimeGrid {
    pub fn new(n_cells: usize) -> Result<Self> {
        if n_cells == 0 {
            return Err(Error::ZeroDimension);
        }
        if n_cells > SAMPLED_CELL_CAP {
            return Err(Error::InvalidConfig(format!(
                "at most {SAMPLED_CELL_CAP} cells, got {n_cells}"
            )));
        }
        Ok(Self { n_cells })
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn dt<T: Real>(&self) -> T {
        T::one() / T::from_count(self.n_cells)
    }

    pub fn sqrt_dt<T: Real>(&self) -> T {
        self.dt::<T>().sqrt()
    }

    pub fn time<T: Real>(&self, k: usize) -> T {
        T::from_count(k) * self.dt::<T>()
    }

    /// Grid index `k` with `t = k·dt`, or an error if `t` is off the grid.
    pub fn grid_index(&self, t: f64) -> Result<usize> {
        let x = t * self.n_cells as f64;
        let k = x.round();
        if !(0.0..=self.n_cells as f64).contains(&k) || (x - k).abs() > 1e-9 {
            return Err(Error::NotGridAligned(t));
        }
        Ok(k as usize)
    }

    fn check_symbolic(&self) -> Result<()> {
        if self.n_cells > SYMBOLIC_CELL_CAP {
            return Err(Error::InvalidConfig(format!(
                "symbolic paths allow at most {SYMBOLIC_CELL_CAP} cells, got {}",
                self.n_cells
            )));
        }
        Ok(())
    }

    /// Cell values of `1_{[s, t)}`; both ends must be grid points.
    pub fn indicator<T: Real>(&self, s: f64, t: f64) -> Result<Vec<T>> {
        let (a, b) = (self.grid_index(s)?, self.grid_index(t)?);
        Ok((0..self.n_cells)
            .map(|c| if c >= a && c < b { T::one() } else { T::zero() })
            .collect())
    }

    /// `B_{t_k} - B_{t_{k-1}} = √dt ξ_{k-1}` for `k = 1..=n`.
    pub fn brownian_increment<T: Real>(&self, k: usize) -> Result<PolyFunctional<T>> {
        self.check_symbolic()?;
        if k == 0 || k > self.n_cells {
            return Err(Error::IndexOutOfRange {
                index: k,
                dim: self.n_cells,
            });
        }
        Ok(PolyFunctional::variable(self.n_cells, k - 1).scale(self.sqrt_dt()))
    }

    /// `B_{t_k} = √dt Σ_{c<k} ξ_c` for `k = 0..=n`.
    pub fn brownian_at<T: Real>(&self, k: usize) -> Result<PolyFunctional<T>> {
        self.check_symbolic()?;
        if k > self.n_cells {
            return Err(Error::IndexOutOfRange {
                index: k,
                dim: self.n_cells,
            });
        }
        let coeffs: Vec<T> = (0..self.n_cells)
            .map(|c| if c < k { self.sqrt_dt() } else { T::zero() })
            .collect();
        Ok(PolyFunctional::linear(&coeffs))
    }

    /// `∫ f dB = Σ_c f_c √dt ξ_c` for a deterministic step function.
    pub fn wiener_integral<T: Real>(&self, f: &[T]) -> Result<PolyFunctional<T>> {
        self.check_symbolic()?;
        if f.len() != self.n_cells {
            return Err(Error::DimensionMismatch {
                expected: self.n_cells,
                got: f.len(),
            });
        }
        let s = self.sqrt_dt::<T>();
        let coeffs: Vec<T> = f.iter().map(|&v| v * s).collect();
        Ok(PolyFunctional::linear(&coeffs))
    }

    /// `D_t F` for `t` in `cell`.
    pub fn malliavin_derivative_at<T: Real>(&self, f: &PolyFunctional<T>, cell: usize) -> Result<PolyFunctional<T>> {
        if cell >= self.n_cells {
            return Err(Error::IndexOutOfRange {
                index: cell,
                dim: self.n_cells,
            });
        }
        Ok(f.partial(cell).scale(T::one() / self.sqrt_dt::<T>()))
    }

    /// Sampled Brownian paths as CSV with columns `sample,t,b_t`.
    pub fn sample_paths_csv(&self, cfg: &McConfig, n_paths: usize) -> String {
        let sampler = GaussianSampler::new(cfg.seed, self.n_cells);
        let s = self.sqrt_dt::<f64>();
        let mut out = String::from("sample,t,b_t\n");
        let mut idx = 0usize;
        sampler.for_each_in(0, n_paths as u64, |xi| {
            let mut b = 0.0;
            let _ = writeln!(out, "{idx},0,0");
            for (c, &z) in xi.iter().enumerate() {
                b += s * z;
                let _ = writeln!(out, "{idx},{},{}", self.time::<f64>(c + 1), b);
            }
            idx += 1;
        });
        out
    }
}

/// Process constant on each grid cell, with polynomial cell values.
#[derive(Clone, Debug, PartialEq)]
pub struct StepProcess<T> {
    grid: TimeGrid,
    values: Vec<PolyFunctional<T>>,
}

impl<T: Real> StepProcess<T> {
    pub fn new(grid: TimeGrid, values: Vec<PolyFunctional<T>>) -> Result<Self> {
        grid.check_symbolic()?;
        if values.len() != grid.n_cells {
            return Err(Error::DimensionMismatch {
                expected: grid.n_cells,
                got: values.len(),
            });
        }
        for v in &values {
            if v.dim() != grid.n_cells {
                return Err(Error::DimensionMismatch {
                    expected: grid.n_cells,
                    got: v.dim(),
                });
            }
        }
        Ok(Self { grid, values })
    }

    /// Deterministic step function.
    pub fn deterministic(grid: TimeGrid, f: &[T]) -> Result<Self> {
        let n = grid.n_cells;
        Self::new(grid, f.iter().map(|&c| PolyFunctional::constant(n, c)).collect())
    }

    pub fn grid(&self) -> TimeGrid {
        self.grid
    }

    pub fn values(&self) -> &[PolyFunctional<T>] {
        &self.values
    }

    /// `u` as an element of `H`: coordinates `⟨u, e_c⟩ = u_c √dt`.
    pub fn to_field(&self) -> HField<T> {
        let s = self.grid.sqrt_dt::<T>();
        HField::from_components(self.values.iter().map(|v| v.scale(s)).collect())
            .expect("cell values share the grid dimension")
    }

    /// First `(cell, coordinate)` where the value looks ahead, if any.
    pub fn adaptedness_violation(&self) -> Option<(usize, usize)> {
        self.values.iter().enumerate().find_map(|(c, v)| {
            v.coords_used()
                .into_iter()
                .find(|&i| i >= c)
                .map(|i| (c, i))
        })
    }

    /// Cell `c` uses only `ξ_0..ξ_{c-1}`.
    pub fn is_adapted(&self) -> bool {
        self.adaptedness_violation().is_none()
    }

    /// `s ↦ D_t u(s)` for `t` in `cell`.
    pub fn derivative_at(&self, cell: usize) -> Result<Self> {
        let values = self
            .values
            .iter()
            .map(|v| self.grid.malliavin_derivative_at(v, cell))
            .collect::<Result<_>>()?;
        Ok(Self {
            grid: self.grid,
            values,
        })
    }
}

/// `Σ_c Y_c (B_{t_{c+1}} - B_{t_c})`; rejects non-adapted integrands.
pub fn ito_integral<T: Real>(u: &StepProcess<T>) -> Result<PolyFunctional<T>> {
    if let Some((cell, coord)) = u.adaptedness_violation() {
        return Err(Error::NotAdapted { cell, coord });
    }
    let n = u.grid.n_cells;
    let mut out = PolyFunctional::zero(n);
    for (c, y) in u.values.iter().enumerate() {
        out = &out + &(y * &u.grid.brownian_increment(c + 1)?);
    }
    Ok(out)
}

/// `δ(u)`; anticipating integrands are allowed.
pub fn skorokhod_integral<T: Real>(u: &StepProcess<T>) -> PolyFunctional<T> {
    divergence(&u.to_field())
}

/// `D_t δ(u)` for `t` in `cell`.
pub fn derivative_of_skorokhod<T: Real>(u: &StepProcess<T>, cell: usize) -> Result<PolyFunctional<T>> {
    u.grid.malliavin_derivative_at(&skorokhod_integral(u), cell)
}

/// Largest coefficient of `D_t δ(u) - u(t) - δ(D_t u)` for `t` in `cell`.
pub fn derivative_of_skorokhod_residual<T: Real>(u: &StepProcess<T>, cell: usize) -> Result<T> {
    let lhs = derivative_of_skorokhod(u, cell)?;
    let rhs = &u.values[cell] + &skorokhod_integral(&u.derivative_at(cell)?);
    Ok(lhs.max_abs_diff(&rhs))
}

/// Terms of `E[δ(u)δ(v)] = E∫uv ds + E∫∫ D_s u(t) D_t v(s) ds dt`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IsometryTerms<T> {
    pub lhs: T,
    pub inner: T,
    pub correction: T,
}

impl<T: Real> IsometryTerms<T> {
    pub fn residual(&self) -> T {
        (self.lhs - self.inner - self.correction).abs()
    }
}

pub fn extended_isometry<T: Real>(u: &StepProcess<T>, v: &StepProcess<T>) -> Result<IsometryTerms<T>> {
    if u.grid != v.grid {
        return Err(Error::DimensionMismatch {
            expected: u.grid.n_cells,
            got: v.grid.n_cells,
        });
    }
    let n = u.grid.n_cells;
    let dt = u.grid.dt::<T>();
    let lhs = expectation_exact(&(&skorokhod_integral(u) * &skorokhod_integral(v)));
    let inner = u
        .values
        .iter()
        .zip(&v.values)
        .fold(T::zero(), |acc, (a, b)| acc + expectation_exact(&(a * b)))
        * dt;
    // Σ_{s,t cells} D_s u(t) D_t v(s) dt²
    let mut double = PolyFunctional::zero(n);
    for s in 0..n {
        for t in 0..n {
            let a = u.grid.malliavin_derivative_at(&u.values[t], s)?;
            if a.is_zero() {
                continue;
            }
            let b = u.grid.malliavin_derivative_at(&v.values[s], t)?;
            double = &double + &(&a * &b);
        }
    }
    let correction = expectation_exact(&double) * dt * dt;
    Ok(IsometryTerms {
        lhs,
        inner,
        correction,
    })
}
