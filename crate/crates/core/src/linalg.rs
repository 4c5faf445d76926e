//! Orthogonal projection onto the span of a few dense columns.
//!
//! Columns are orthonormalised with modified Gram-Schmidt, applied twice per
//! column so the basis stays orthogonal to working precision. Columns whose
//! remaining norm falls below a relative tolerance are treated as dependent
//! and contribute no basis vector.

use crate::scalar::{axpy, dot, norm_sq, Scalar};

#[derive(Debug, Clone)]
pub struct Subspace<T> {
    len: usize,
    basis: Vec<Vec<T>>,
    /// `r[i][j] = <q_i, column_j>`; a `rank x ncols` factor with `A = Q R`.
    r: Vec<Vec<T>>,
    ncols: usize,
}

fn rank_tol<T: Scalar>() -> T {
    T::epsilon().sqrt() * T::of(1e-2)
}

impl<T: Scalar> Subspace<T> {
    pub fn empty(len: usize) -> Self {
        Subspace {
            len,
            basis: Vec::new(),
            r: Vec::new(),
            ncols: 0,
        }
    }

    pub fn from_columns<C: AsRef<[T]>>(len: usize, columns: &[C]) -> Self {
        let mut s = Self::empty(len);
        for c in columns {
            s.push(c.as_ref());
        }
        s
    }

    /// Appends a column, extending the basis when it is independent.
    pub fn push(&mut self, column: &[T]) {
        assert_eq!(column.len(), self.len, "column length mismatch");
        let mut w = column.to_vec();
        let original = norm_sq(&w).sqrt();
        let mut coeffs = vec![T::zero(); self.basis.len()];
        for _ in 0..2 {
            for (q, c) in self.basis.iter().zip(coeffs.iter_mut()) {
                let h = dot(q, &w);
                axpy(-h, q, &mut w);
                *c = *c + h;
            }
        }
        for (row, c) in self.r.iter_mut().zip(&coeffs) {
            row.push(*c);
        }
        let rest = norm_sq(&w).sqrt();
        if original > T::zero() && rest > rank_tol::<T>() * original {
            let inv = rest.recip();
            w.iter_mut().for_each(|v| *v = *v * inv);
            self.basis.push(w);
            let mut row = vec![T::zero(); self.ncols];
            row.push(rest);
            self.r.push(row);
        }
        self.ncols += 1;
    }

    pub fn with_column(&self, column: &[T]) -> Self {
        let mut s = self.clone();
        s.push(column);
        s
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Orthogonal projection `A A^+ y`.
    pub fn project(&self, y: &[T]) -> Vec<T> {
        let mut p = vec![T::zero(); self.len];
        for q in &self.basis {
            axpy(dot(q, y), q, &mut p);
        }
        p
    }

    /// `y - A A^+ y`, subtracting basis components one at a time.
    pub fn residual(&self, y: &[T]) -> Vec<T> {
        let mut r = y.to_vec();
        for q in &self.basis {
            let h = dot(q, &r);
            axpy(-h, q, &mut r);
        }
        r
    }

    pub fn residual_sq(&self, y: &[T]) -> T {
        norm_sq(&self.residual(y))
    }

    /// Minimum-norm least-squares coefficients `A^+ y`.
    pub fn coefficients(&self, y: &[T]) -> Vec<T> {
        let k = self.rank();
        if k == 0 {
            return vec![T::zero(); self.ncols];
        }
        let b: Vec<T> = self.basis.iter().map(|q| dot(q, y)).collect();
        // R has full row rank, so the minimum-norm solution of R c = b is
        // c = R^T (R R^T)^{-1} b.
        let mut g = vec![vec![T::zero(); k]; k];
        for i in 0..k {
            for j in 0..=i {
                let v = dot(&self.r[i], &self.r[j]);
                g[i][j] = v;
                g[j][i] = v;
            }
        }
        let z = cholesky_solve(g, b);
        let mut c = vec![T::zero(); self.ncols];
        for (row, zi) in self.r.iter().zip(&z) {
            axpy(*zi, row, &mut c);
        }
        c
    }
}

/// Solves `G x = b` for symmetric positive definite `G`.
fn cholesky_solve<T: Scalar>(mut g: Vec<Vec<T>>, mut b: Vec<T>) -> Vec<T> {
    let n = b.len();
    for j in 0..n {
        let mut d = g[j][j];
        for k in 0..j {
            d = d - g[j][k] * g[j][k];
        }
        let d = d.max(T::min_positive_value()).sqrt();
        g[j][j] = d;
        for i in j + 1..n {
            let mut s = g[i][j];
            for k in 0..j {
                s = s - g[i][k] * g[j][k];
            }
            g[i][j] = s / d;
        }
    }
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s = s - g[i][k] * b[k];
        }
        b[i] = s / g[i][i];
    }
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in i + 1..n {
            s = s - g[k][i] * b[k];
        }
        b[i] = s / g[i][i];
    }
    b
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat_vec(cols: &[Vec<f64>], c: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; cols[0].len()];
        for (col, &ci) in cols.iter().zip(c) {
            axpy(ci, col, &mut out);
        }
        out
    }

    #[test]
    fn in_span_vector_has_zero_residual() {
        let cols = vec![vec![1.0, 0.0, 1.0, 2.0], vec![0.0, 1.0, 1.0, -1.0]];
        let y = mat_vec(&cols, &[3.0, -2.0]);
        let s = Subspace::from_columns(4, &cols);
        assert!(s.residual_sq(&y) < 1e-20);
        let c = s.coefficients(&y);
        assert!((c[0] - 3.0).abs() < 1e-12 && (c[1] + 2.0).abs() < 1e-12);
    }

    #[test]
    fn single_column_matches_closed_form() {
        let psi: Vec<f64> = vec![1.0, 2.0, -1.0];
        let y: Vec<f64> = vec![0.5, -1.0, 4.0];
        let s = Subspace::from_columns(3, &[psi.clone()]);
        let ip = dot(&psi, &y);
        let expected = norm_sq(&y) - ip * ip / norm_sq(&psi);
        assert!((s.residual_sq(&y) - expected).abs() < 1e-12);
    }

    #[test]
    fn rank_deficient_gives_minimum_norm() {
        // Two identical columns: the minimum-norm split is equal halves.
        let cols: Vec<Vec<f64>> = vec![vec![1.0, 1.0, 0.0], vec![1.0, 1.0, 0.0]];
        let s = Subspace::from_columns(3, &cols);
        assert_eq!(s.rank(), 1);
        let c = s.coefficients(&[2.0, 2.0, 5.0]);
        assert!((c[0] - 1.0).abs() < 1e-12 && (c[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_columns_project_to_zero() {
        let s = Subspace::from_columns(2, &[vec![0.0, 0.0]]);
        assert_eq!(s.rank(), 0);
        assert_eq!(s.residual_sq(&[3.0, 4.0]), 25.0);
        assert_eq!(s.coefficients(&[3.0, 4.0]), vec![0.0]);
    }
}
