//! LU and Cholesky factorizations backing the dense inverse.

use alloc::vec;
use alloc::vec::Vec;

use super::{MatError, Matrix};
use crate::fm;

/// Cholesky factor `L` (lower) of an SPD matrix, or `None` if a pivot is not
/// safely positive — which doubles as the SPD detector.
pub fn cholesky(a: &Matrix) -> Option<Matrix> {
    let n = a.dim();
    let scale = a.max_abs();
    if scale == 0.0 {
        return None;
    }
    let floor = 1e-14 * scale;
    let mut l = Matrix::zeros(n);
    for i in 0..n {
        for j in 0..=i {
            let mut s = a.at(i, j);
            for k in 0..j {
                s -= l.at(i, k) * l.at(j, k);
            }
            if i == j {
                if s <= floor {
                    return None;
                }
                l.set(i, j, fm::sqrt(s));
            } else {
                l.set(i, j, s / l.at(j, j));
            }
        }
    }
    Some(l)
}

fn cholesky_inverse(l: &Matrix) -> Matrix {
    let n = l.dim();
    let mut inv = Matrix::zeros(n);
    let mut col = vec![0.0f64; n];
    for j in 0..n {
        for v in col.iter_mut() {
            *v = 0.0;
        }
        // L y = e_j
        for i in 0..n {
            let mut s = if i == j { 1.0 } else { 0.0 };
            for k in 0..i {
                s -= l.at(i, k) * col[k];
            }
            col[i] = s / l.at(i, i);
        }
        // L^T x = y
        for i in (0..n).rev() {
            let mut s = col[i];
            for k in (i + 1)..n {
                s -= l.at(k, i) * col[k];
            }
            col[i] = s / l.at(i, i);
        }
        for i in 0..n {
            inv.set(i, j, col[i]);
        }
    }
    inv
}

/// LU inverse with partial pivoting; pivots below `1e-14 * ||a||_F` raise
/// [`MatError::Singular`] with the offending pivot index.
fn lu_inverse_checked(a: &Matrix) -> Result<Matrix, MatError> {
    let n = a.dim();
    let norm = a.frob_norm();
    let floor = 1e-14 * norm;
    let mut lu: Vec<f64> = a.data().to_vec();
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let mut pivot_row = k;
        let mut pivot_val = fm::abs(lu[k * n + k]);
        for r in (k + 1)..n {
            let v = fm::abs(lu[r * n + k]);
            if v > pivot_val {
                pivot_val = v;
                pivot_row = r;
            }
        }
        if pivot_val <= floor {
            return Err(MatError::Singular { pivot_index: k });
        }
        if pivot_row != k {
            for j in 0..n {
                lu.swap(k * n + j, pivot_row * n + j);
            }
            perm.swap(k, pivot_row);
        }
        let pivot = lu[k * n + k];
        for r in (k + 1)..n {
            let factor = lu[r * n + k] / pivot;
            lu[r * n + k] = factor;
            for j in (k + 1)..n {
                let akj = lu[k * n + j];
                lu[r * n + j] -= factor * akj;
            }
        }
    }
    let mut inv = Matrix::zeros(n);
    let mut col = vec![0.0f64; n];
    for j in 0..n {
        for i in 0..n {
            let mut s = if perm[i] == j { 1.0 } else { 0.0 };
            for k in 0..i {
                s -= lu[i * n + k] * col[k];
            }
            col[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = col[i];
            for k in (i + 1)..n {
                s -= lu[i * n + k] * col[k];
            }
            col[i] = s / lu[i * n + i];
        }
        for i in 0..n {
            inv.set(i, j, col[i]);
        }
    }
    Ok(inv)
}

/// Inverse of a symmetric matrix: Cholesky when SPD detection succeeds,
/// otherwise LU with partial pivoting.
pub fn sym_inverse(a: &Matrix) -> Result<Matrix, MatError> {
    if let Some(l) = cholesky(a) {
        return Ok(cholesky_inverse(&l));
    }
    lu_inverse_checked(a)
}
