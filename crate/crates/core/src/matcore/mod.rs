//! Dense symmetric linear algebra for matrix-level verification.
//!
//! [`Matrix`] is a square, row-major, `f64` dense matrix. Verification math
//! runs in double precision throughout; single precision exists only in the
//! benchmark kernels (see [`kernels`]). Symmetry is a contract checked at
//! the operations that require it, not a storage format: iterating on
//! co-diagonalizable inputs keeps every intermediate symmetric up to
//! roundoff, and products of such intermediates are formed as general
//! square matrices.

pub mod eigen;
pub mod factor;
pub mod kernels;
pub mod qr;

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::fm;

pub use eigen::{sym_eigh, sym_eigvals, EigDecomp};
pub use factor::{cholesky, sym_inverse};
pub use qr::{haar_orthogonal, synth_from_spectrum};

/// Errors from the dense kernels.
#[derive(Clone, Debug, PartialEq)]
pub enum MatError {
    /// Operand dimensions disagree.
    ShapeMismatch { left: usize, right: usize },
    /// A pivot fell below the singularity threshold.
    Singular { pivot_index: usize },
    /// Eigensolver failed to converge; carries the off-diagonal residual.
    NoConvergence { residual: f64 },
    /// Input violated the symmetry contract.
    NotSymmetric { defect: f64 },
    /// Input violated the orthogonality contract.
    NotOrthogonal { defect: f64 },
    /// Invalid construction input.
    Invalid(String),
}

impl fmt::Display for MatError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MatError::ShapeMismatch { left, right } => {
                write!(f, "dimension mismatch: {left} vs {right}")
            }
            MatError::Singular { pivot_index } => {
                write!(f, "matrix is numerically singular at pivot {pivot_index}")
            }
            MatError::NoConvergence { residual } => {
                write!(f, "eigensolver did not converge; off-diagonal residual {residual:e}")
            }
            MatError::NotSymmetric { defect } => {
                write!(f, "matrix is not symmetric; relative defect {defect:e}")
            }
            MatError::NotOrthogonal { defect } => {
                write!(f, "matrix is not orthogonal; defect {defect:e}")
            }
            MatError::Invalid(msg) => write!(f, "invalid input: {msg}"),
        }
    }
}

/// Square dense matrix, row-major, double precision.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    dim: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(dim: usize) -> Self {
        Matrix {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Matrix::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = 1.0;
        }
        m
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = Matrix::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m.data[i * m.dim + i] = v;
        }
        m
    }

    /// Build from a row-major slice of length `dim * dim`.
    pub fn from_rows(dim: usize, data: &[f64]) -> Result<Self, MatError> {
        if data.len() != dim * dim {
            return Err(MatError::Invalid(alloc::format!(
                "expected {} entries, got {}",
                dim * dim,
                data.len()
            )));
        }
        Ok(Matrix {
            dim,
            data: data.to_vec(),
        })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.dim + j] = v;
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub(crate) fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn transpose(&self) -> Matrix {
        let n = self.dim;
        let mut t = Matrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                t.data[j * n + i] = self.data[i * n + j];
            }
        }
        t
    }

    /// Frobenius norm.
    pub fn frob_norm(&self) -> f64 {
        frob_norm(&self.data)
    }

    /// `self + c * other`, elementwise.
    pub fn add_scaled(&self, other: &Matrix, c: f64) -> Result<Matrix, MatError> {
        if self.dim != other.dim {
            return Err(MatError::ShapeMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        let mut out = self.clone();
        for (o, &x) in out.data.iter_mut().zip(other.data.iter()) {
            *o += c * x;
        }
        Ok(out)
    }

    pub fn scale(&self, c: f64) -> Matrix {
        let mut out = self.clone();
        for v in out.data.iter_mut() {
            *v *= c;
        }
        out
    }

    /// Relative symmetry defect `max |a_ij - a_ji| / ||A||_F` (0 for the zero matrix).
    pub fn symmetry_defect(&self) -> f64 {
        let n = self.dim;
        let norm = self.frob_norm();
        if norm == 0.0 {
            return 0.0;
        }
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                let d = fm::abs(self.data[i * n + j] - self.data[j * n + i]);
                if d > worst {
                    worst = d;
                }
            }
        }
        worst / norm
    }

    /// Average out roundoff asymmetry in place.
    pub fn symmetrize(&mut self) {
        let n = self.dim;
        for i in 0..n {
            for j in (i + 1)..n {
                let v = 0.5 * (self.data[i * n + j] + self.data[j * n + i]);
                self.data[i * n + j] = v;
                self.data[j * n + i] = v;
            }
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, &v| m.max(fm::abs(v)))
    }
}

/// Frobenius norm of a raw entry slice.
pub fn frob_norm(data: &[f64]) -> f64 {
    fm::sqrt(data.iter().map(|&v| v * v).sum())
}

/// Dense product `a * b`. Errors on dimension mismatch.
pub fn sym_matmul(a: &Matrix, b: &Matrix) -> Result<Matrix, MatError> {
    if a.dim != b.dim {
        return Err(MatError::ShapeMismatch {
            left: a.dim,
            right: b.dim,
        });
    }
    let mut c = Matrix::zeros(a.dim);
    kernels::matmul_into(a.dim, &a.data, &b.data, &mut c.data);
    Ok(c)
}

/// Dense product `a * b^T`.
pub fn matmul_nt(a: &Matrix, b: &Matrix) -> Result<Matrix, MatError> {
    if a.dim != b.dim {
        return Err(MatError::ShapeMismatch {
            left: a.dim,
            right: b.dim,
        });
    }
    let n = a.dim;
    let mut c = Matrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            let mut acc = 0.0;
            for k in 0..n {
                acc += a.data[i * n + k] * b.data[j * n + k];
            }
            c.data[i * n + j] = acc;
        }
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;

    fn naive_matmul(n: usize, a: &[f64], b: &[f64]) -> Vec<f64> {
        let mut c = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0.0;
                for k in 0..n {
                    acc += a[i * n + k] * b[k * n + j];
                }
                c[i * n + j] = acc;
            }
        }
        c
    }

    #[test]
    fn matmul_identity() {
        let m = Matrix::from_rows(3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0]).unwrap();
        let i3 = Matrix::identity(3);
        assert_eq!(sym_matmul(&i3, &m).unwrap(), m);
    }

    #[test]
    fn matmul_diag() {
        let a = Matrix::diag(&[1.0, 2.0]);
        let b = Matrix::diag(&[3.0, 4.0]);
        let c = sym_matmul(&a, &b).unwrap();
        assert_eq!(c, Matrix::diag(&[3.0, 8.0]));
    }

    #[test]
    fn matmul_matches_naive_triple_loop() {
        let mut rng = Rng::new(3);
        let n = 5;
        let a: Vec<f64> = (0..n * n).map(|_| rng.uniform(-1.0, 1.0)).collect();
        let b: Vec<f64> = (0..n * n).map(|_| rng.uniform(-1.0, 1.0)).collect();
        let am = Matrix::from_rows(n, &a).unwrap();
        let bm = Matrix::from_rows(n, &b).unwrap();
        let fast = sym_matmul(&am, &bm).unwrap();
        let slow = naive_matmul(n, &a, &b);
        for (x, y) in fast.data().iter().zip(slow.iter()) {
            assert!((x - y).abs() <= 1e-13, "{x} vs {y}");
        }
    }

    #[test]
    fn matmul_shape_error() {
        let a = Matrix::identity(2);
        let b = Matrix::identity(3);
        assert!(matches!(
            sym_matmul(&a, &b),
            Err(MatError::ShapeMismatch { left: 2, right: 3 })
        ));
    }

    #[test]
    fn frob_norm_cases() {
        assert_eq!(Matrix::zeros(3).frob_norm(), 0.0);
        assert!((Matrix::identity(4).frob_norm() - 2.0).abs() < 1e-15);
        assert!((Matrix::diag(&[3.0, 4.0]).frob_norm() - 5.0).abs() < 1e-15);
    }

    #[test]
    fn frob_norm_orthogonally_invariant() {
        let mut rng = Rng::new(5);
        let n = 12;
        let q = haar_orthogonal(n, &mut rng);
        let data: Vec<f64> = (0..n * n).map(|_| rng.uniform(-2.0, 2.0)).collect();
        let mut a = Matrix::from_rows(n, &data).unwrap();
        a.symmetrize();
        let qa = sym_matmul(&q, &a).unwrap();
        let qaqt = matmul_nt(&qa, &q).unwrap();
        assert!((qaqt.frob_norm() - a.frob_norm()).abs() <= 1e-12 * a.frob_norm().max(1.0));
    }

    #[test]
    fn symmetry_defect_detects() {
        let mut m = Matrix::identity(3);
        m.set(0, 1, 0.5);
        assert!(m.symmetry_defect() > 0.1);
        m.symmetrize();
        assert!(m.symmetry_defect() < 1e-15);
    }
}
