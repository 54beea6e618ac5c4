//! Matrices of polynomial functionals: random Hilbert-Schmidt operators on
//! `H` and the Malliavin matrix.

use crate::error::{Error, Result};
use crate::poly::PolyFunctional;
use crate::scalar::Real;

/// Random operator on `H = R^d` with functional entries.
#[derive(Clone, Debug, PartialEq)]
pub struct HSMatrix<T> {
    entries: Vec<Vec<PolyFunctional<T>>>,
}

impl<T: Real> HSMatrix<T> {
    pub(crate) fn from_entries(entries: Vec<Vec<PolyFunctional<T>>>) -> Self {
        debug_assert!(entries.iter().all(|r| r.len() == entries.len()));
        Self { entries }
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, i: usize, j: usize) -> &PolyFunctional<T> {
        &self.entries[i][j]
    }

    fn field_dim(&self) -> usize {
        self.entries[0][0].dim()
    }

    pub fn transpose(&self) -> Self {
        let n = self.dim();
        Self {
            entries: (0..n)
                .map(|i| (0..n).map(|j| self.entries[j][i].clone()).collect())
                .collect(),
        }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        let n = self.dim();
        let fd = self.field_dim();
        Self {
            entries: (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| {
                            (0..n).fold(PolyFunctional::zero(fd), |acc, k| {
                                &acc + &(&self.entries[i][k] * &other.entries[k][j])
                            })
                        })
                        .collect()
                })
                .collect(),
        }
    }

    /// Applies the matrix to a vector of functionals.
    pub fn apply(&self, v: &[PolyFunctional<T>]) -> Vec<PolyFunctional<T>> {
        let fd = self.field_dim();
        self.entries
            .iter()
            .map(|row| {
                row.iter()
                    .zip(v)
                    .fold(PolyFunctional::zero(fd), |acc, (a, b)| &acc + &(a * b))
            })
            .collect()
    }

    /// Sum of the diagonal.
    pub fn trace(&self) -> PolyFunctional<T> {
        let fd = self.field_dim();
        (0..self.dim()).fold(PolyFunctional::zero(fd), |acc, i| &acc + &self.entries[i][i])
    }

    /// `Tr(AB)` as the diagonal sum of the product matrix.
    pub fn trace_product(&self, other: &Self) -> PolyFunctional<T> {
        self.matmul(other).trace()
    }

    /// `Tr(AB) = Σ_k ⟨A B e_k, e_k⟩`.
    pub fn trace_product_basis(&self, other: &Self) -> PolyFunctional<T> {
        let n = self.dim();
        let fd = self.field_dim();
        let mut acc = PolyFunctional::zero(fd);
        for k in 0..n {
            let col: Vec<_> = (0..n).map(|i| other.entries[i][k].clone()).collect();
            let abk = self.apply(&col);
            acc = &acc + &abk[k];
        }
        acc
    }

    /// `‖A‖²_HS = Σ a_ij²`.
    pub fn hs_norm_sq(&self) -> PolyFunctional<T> {
        let fd = self.field_dim();
        self.entries
            .iter()
            .flatten()
            .fold(PolyFunctional::zero(fd), |acc, e| &acc + &(e * e))
    }
}

/// `Γ_ij = ⟨DF^i, DF^j⟩_H`.
#[derive(Clone, Debug, PartialEq)]
pub struct MalliavinMatrix<T> {
    gamma: Vec<Vec<PolyFunctional<T>>>,
}

impl<T: Real> MalliavinMatrix<T> {
    pub fn size(&self) -> usize {
        self.gamma.len()
    }

    pub fn get(&self, i: usize, j: usize) -> &PolyFunctional<T> {
        &self.gamma[i][j]
    }

    pub fn is_symmetric(&self) -> bool {
        let n = self.size();
        (0..n).all(|i| (0..i).all(|j| self.gamma[i][j] == self.gamma[j][i]))
    }

    pub fn eval(&self, x: &[T]) -> Vec<Vec<T>> {
        self.gamma
            .iter()
            .map(|row| row.iter().map(|p| p.eval(x)).collect())
            .collect()
    }

    /// `det Γ(x)` by Gaussian elimination with partial pivoting.
    pub fn det_at(&self, x: &[T]) -> T {
        determinant(self.eval(x))
    }

    /// `det Γ` as a functional (Leibniz expansion; intended for small sizes).
    pub fn determinant(&self) -> PolyFunctional<T> {
        let n = self.size();
        let fd = self.gamma[0][0].dim();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut acc = PolyFunctional::zero(fd);
        permute(&mut perm, 0, &mut |p| {
            let sign = permutation_sign(p);
            let term = p
                .iter()
                .enumerate()
                .fold(PolyFunctional::constant(fd, T::one()), |t, (i, &j)| &t * &self.gamma[i][j]);
            acc = acc.axpy(sign, &term);
        });
        acc
    }
}

fn permute(p: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize])) {
    if k == p.len() {
        f(p);
        return;
    }
    for i in k..p.len() {
        p.swap(k, i);
        permute(p, k + 1, f);
        p.swap(k, i);
    }
}

fn permutation_sign<T: Real>(p: &[usize]) -> T {
    let mut inversions = 0;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            if p[i] > p[j] {
                inversions += 1;
            }
        }
    }
    if inversions % 2 == 0 {
        T::one()
    } else {
        -T::one()
    }
}

pub(crate) fn determinant<T: Real>(mut a: Vec<Vec<T>>) -> T {
    let n = a.len();
    let mut det = T::one();
    for c in 0..n {
        let pivot = (c..n)
            .max_by(|&i, &j| a[i][c].abs().partial_cmp(&a[j][c].abs()).unwrap_or(std::cmp::Ordering::Equal))
            .unwrap_or(c);
        if a[pivot][c] == T::zero() {
            return T::zero();
        }
        if pivot != c {
            a.swap(pivot, c);
            det = -det;
        }
        det *= a[c][c];
        for r in c + 1..n {
            let factor = a[r][c] / a[c][c];
            for k in c..n {
                let v = a[c][k];
                a[r][k] -= factor * v;
            }
        }
    }
    det
}

/// Malliavin matrix of `(F^1, .., F^n)`.
pub fn malliavin_matrix<T: Real>(fs: &[PolyFunctional<T>]) -> Result<MalliavinMatrix<T>> {
    let first = fs.first().ok_or(Error::ZeroDimension)?;
    let d = first.dim();
    for f in fs {
        if f.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: f.dim(),
            });
        }
    }
    let grads: Vec<Vec<PolyFunctional<T>>> = fs.iter().map(PolyFunctional::gradient).collect();
    let n = fs.len();
    let mut gamma = vec![vec![PolyFunctional::zero(d); n]; n];
    for i in 0..n {
        for j in 0..=i {
            let g = grads[i]
                .iter()
                .zip(&grads[j])
                .fold(PolyFunctional::zero(d), |acc, (a, b)| &acc + &(a * b));
            gamma[j][i] = g.clone();
            gamma[i][j] = g;
        }
    }
    Ok(MalliavinMatrix { gamma })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian_core::{isonormal_map, HVector};

    fn xi(d: usize, i: usize) -> PolyFunctional<f64> {
        PolyFunctional::variable(d, i)
    }

    #[test]
    fn malliavin_matrix_examples() {
        let m = malliavin_matrix(&[xi(2, 0), xi(2, 1)]).unwrap();
        assert_eq!(m.get(0, 0), &PolyFunctional::constant(2, 1.0));
        assert!(m.get(0, 1).is_zero());
        assert_eq!(m.get(1, 1), &PolyFunctional::constant(2, 1.0));

        let m = malliavin_matrix(&[xi(1, 0).powi(2)]).unwrap();
        assert_eq!(m.get(0, 0), &xi(1, 0).powi(2).scale(4.0));

        let s = 0.5f64.sqrt();
        let h = HVector::new(vec![s, s]).unwrap();
        let m = malliavin_matrix(&[isonormal_map(&h)]).unwrap();
        assert!((m.get(0, 0).constant_term() - 1.0).abs() < 1e-15);
        assert!(m.get(0, 0).is_constant());
    }

    #[test]
    fn gram_matrix_of_linear_functionals() {
        let h1 = HVector::<f64>::new(vec![1.0, 2.0, 0.0]).unwrap();
        let h2 = HVector::new(vec![0.5, -1.0, 3.0]).unwrap();
        let m = malliavin_matrix(&[isonormal_map(&h1), isonormal_map(&h2)]).unwrap();
        assert!(m.is_symmetric());
        assert!((m.get(0, 1).constant_term() - h1.dot(&h2)).abs() < 1e-15);
        let det = m.det_at(&[0.0; 3]);
        let want = h1.dot(&h1) * h2.dot(&h2) - h1.dot(&h2).powi(2);
        assert!((det - want).abs() < 1e-12);
        assert!((m.determinant().constant_term() - want).abs() < 1e-12);
    }

    #[test]
    fn determinant_small() {
        assert_eq!(determinant(vec![vec![2.0, 1.0], vec![4.0, 2.0]]), 0.0);
        assert!((determinant(vec![vec![0.0, 1.0], vec![2.0, 3.0]]) + 2.0f64).abs() < 1e-15);
    }

    #[test]
    fn trace_helpers_agree() {
        let a = HSMatrix::from_entries(vec![
            vec![xi(2, 0), PolyFunctional::constant(2, 2.0)],
            vec![&xi(2, 1) * &xi(2, 0), xi(2, 1)],
        ]);
        let b = a.transpose();
        assert!(a.trace_product(&b).max_abs_diff(&a.trace_product_basis(&b)) < 1e-14);
        assert!(a.hs_norm_sq().max_abs_diff(&a.trace_product(&a.transpose())) < 1e-14);
    }
}
