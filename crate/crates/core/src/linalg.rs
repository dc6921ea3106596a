//! Thin row-major dense matrix plus the handful of faer factorizations the
//! solvers need.

use std::ops::{Index, IndexMut};

use faer::linalg::solvers::{Solve, SolveLstsq};
use faer::{c64, Mat, Side};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Matrix {
            rows: r,
            cols: c,
            data,
        }
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows);
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Maximum absolute row sum.
    pub fn inf_norm(&self) -> f64 {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| (0..i).all(|j| (self[(i, j)] - self[(j, i)]).abs() <= tol))
    }

    pub fn submatrix(&self, keep: &[usize]) -> Matrix {
        Matrix::from_fn(keep.len(), keep.len(), |i, j| self[(keep[i], keep[j])])
    }

    fn to_faer(&self) -> Mat<f64> {
        Mat::from_fn(self.rows, self.cols, |i, j| self[(i, j)])
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Eigenvalues (ascending) of the symmetric tridiagonal matrix with the given
/// diagonal and off-diagonal.
pub fn symmetric_tridiagonal_eigenvalues(diag: &[f64], off: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    assert_eq!(off.len() + 1, n.max(1));
    let m = Mat::<f64>::from_fn(n, n, |i, j| {
        if i == j {
            diag[i]
        } else if i == j + 1 {
            off[j]
        } else if j == i + 1 {
            off[i]
        } else {
            0.0
        }
    });
    m.self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Numerical(format!("tridiagonal eigenvalue solve failed: {e:?}")))
}

/// Complex eigenvalues and unit-norm eigenvectors (one per column) of a real matrix.
pub fn eigen(a: &Matrix) -> Result<(Vec<c64>, Vec<Vec<c64>>)> {
    assert!(a.is_square());
    let n = a.rows();
    let evd = a
        .to_faer()
        .eigen()
        .map_err(|e| Error::Numerical(format!("eigendecomposition did not converge: {e:?}")))?;
    let s = evd.S();
    let u = evd.U();
    let values = (0..n).map(|i| s[i]).collect();
    let vectors = (0..n)
        .map(|j| {
            let col: Vec<c64> = (0..n).map(|i| u[(i, j)]).collect();
            let norm = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm > 0.0 {
                col.into_iter().map(|z| z / norm).collect()
            } else {
                col
            }
        })
        .collect();
    Ok((values, vectors))
}

/// Singular values, largest first.
pub fn singular_values(a: &Matrix) -> Result<Vec<f64>> {
    a.to_faer()
        .singular_values()
        .map_err(|e| Error::Numerical(format!("singular value decomposition failed: {e:?}")))
}

/// 2-norm condition number; infinite for singular matrices.
pub fn condition_number(a: &Matrix) -> Result<f64> {
    let s = singular_values(a)?;
    let (hi, lo) = match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) => (hi, lo),
        _ => return Ok(1.0),
    };
    if lo == 0.0 {
        Ok(f64::INFINITY)
    } else {
        Ok(hi / lo)
    }
}

/// Solves `a x = b` by LU with partial pivoting.
pub fn lu_solve(a: &Matrix, b: &[f64]) -> Vec<f64> {
    assert!(a.is_square());
    assert_eq!(a.rows(), b.len());
    let lu = a.to_faer().partial_piv_lu();
    let rhs = Mat::<f64>::from_fn(b.len(), 1, |i, _| b[i]);
    let x = lu.solve(&rhs);
    (0..b.len()).map(|i| x[(i, 0)]).collect()
}

/// Least-squares solution of an over-determined (or square) system via QR.
pub fn lstsq(a: &Matrix, b: &[f64]) -> Vec<f64> {
    assert!(a.rows() >= a.cols());
    assert_eq!(a.rows(), b.len());
    let qr = a.to_faer().qr();
    let rhs = Mat::<f64>::from_fn(b.len(), 1, |i, _| b[i]);
    let x = qr.solve_lstsq(&rhs);
    (0..a.cols()).map(|i| x[(i, 0)]).collect()
}

/// Numerical rank with relative singular-value cutoff `rel_tol`.
pub fn rank(a: &Matrix, rel_tol: f64) -> Result<usize> {
    let s = singular_values(a)?;
    let top = s.first().copied().unwrap_or(0.0);
    Ok(s.iter().filter(|&&v| v > rel_tol * top).count())
}

pub fn residual_norm(a: &Matrix, x: &[f64], b: &[f64]) -> f64 {
    a.mul_vec(x)
        .iter()
        .zip(b)
        .map(|(ax, bi)| (ax - bi) * (ax - bi))
        .sum::<f64>()
        .sqrt()
}
