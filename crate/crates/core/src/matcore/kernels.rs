//! Primitive kernels, generic over `f32`/`f64`.
//!
//! The benchmark path times the same matmul / LU-inverse / AXPY code in both
//! precisions, so these are written once against a minimal scalar trait. The
//! contract-checked `f64` entry points live in the parent module and
//! `factor`; the generic LU here only guards against exact zero pivots.

use alloc::vec;
use alloc::vec::Vec;

/// Scalar in which the benchmark kernels run.
pub trait Real:
    Copy
    + PartialOrd
    + core::ops::Add<Output = Self>
    + core::ops::Sub<Output = Self>
    + core::ops::Mul<Output = Self>
    + core::ops::Div<Output = Self>
    + core::ops::Neg<Output = Self>
    + core::ops::AddAssign
    + core::ops::SubAssign
{
    const ZERO: Self;
    const ONE: Self;
    fn abs_val(self) -> Self;
}

impl Real for f64 {
    const ZERO: f64 = 0.0;
    const ONE: f64 = 1.0;
    fn abs_val(self) -> f64 {
        libm::fabs(self)
    }
}

impl Real for f32 {
    const ZERO: f32 = 0.0;
    const ONE: f32 = 1.0;
    fn abs_val(self) -> f32 {
        libm::fabsf(self)
    }
}

/// `c = a * b` for square row-major matrices; i-k-j loop order so the inner
/// loop streams rows of `b` and `c`.
pub fn matmul_into<T: Real>(n: usize, a: &[T], b: &[T], c: &mut [T]) {
    debug_assert_eq!(a.len(), n * n);
    debug_assert_eq!(b.len(), n * n);
    debug_assert_eq!(c.len(), n * n);
    for v in c.iter_mut() {
        *v = T::ZERO;
    }
    for i in 0..n {
        let c_row = &mut c[i * n..(i + 1) * n];
        for k in 0..n {
            let aik = a[i * n + k];
            let b_row = &b[k * n..(k + 1) * n];
            for (cv, &bv) in c_row.iter_mut().zip(b_row.iter()) {
                *cv += aik * bv;
            }
        }
    }
}

/// `y += alpha * x`, one pass.
pub fn axpy<T: Real>(alpha: T, x: &[T], y: &mut [T]) {
    for (yv, &xv) in y.iter_mut().zip(x.iter()) {
        *yv += alpha * xv;
    }
}

/// In-place LU with partial pivoting. Returns the permutation, or the index
/// of a zero pivot.
pub fn lu_factor<T: Real>(n: usize, a: &mut [T]) -> Result<Vec<usize>, usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let mut pivot_row = k;
        let mut pivot_val = a[k * n + k].abs_val();
        for r in (k + 1)..n {
            let v = a[r * n + k].abs_val();
            if v > pivot_val {
                pivot_val = v;
                pivot_row = r;
            }
        }
        if !(pivot_val > T::ZERO) {
            return Err(k);
        }
        if pivot_row != k {
            for j in 0..n {
                a.swap(k * n + j, pivot_row * n + j);
            }
            perm.swap(k, pivot_row);
        }
        let pivot = a[k * n + k];
        for r in (k + 1)..n {
            let factor = a[r * n + k] / pivot;
            a[r * n + k] = factor;
            for j in (k + 1)..n {
                let akj = a[k * n + j];
                a[r * n + j] -= factor * akj;
            }
        }
    }
    Ok(perm)
}

/// Dense inverse via LU: factor once, then solve for each unit column.
pub fn lu_inverse<T: Real>(n: usize, a: &[T]) -> Result<Vec<T>, usize> {
    let mut lu = a.to_vec();
    let perm = lu_factor(n, &mut lu)?;
    let mut inv = vec![T::ZERO; n * n];
    let mut col = vec![T::ZERO; n];
    for j in 0..n {
        for v in col.iter_mut() {
            *v = T::ZERO;
        }
        // forward substitution on the permuted unit vector
        for i in 0..n {
            let mut s = if perm[i] == j { T::ONE } else { T::ZERO };
            for k in 0..i {
                s -= lu[i * n + k] * col[k];
            }
            col[i] = s;
        }
        // back substitution
        for i in (0..n).rev() {
            let mut s = col[i];
            for k in (i + 1)..n {
                s -= lu[i * n + k] * col[k];
            }
            col[i] = s / lu[i * n + i];
        }
        for i in 0..n {
            inv[i * n + j] = col[i];
        }
    }
    Ok(inv)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f32_matmul_and_inverse_work() {
        let a: Vec<f32> = vec![4.0, 1.0, 1.0, 3.0];
        let inv = lu_inverse(2, &a).unwrap();
        let mut prod = vec![0.0f32; 4];
        matmul_into(2, &a, &inv, &mut prod);
        assert!((prod[0] - 1.0).abs() < 1e-5);
        assert!(prod[1].abs() < 1e-5);
        assert!((prod[3] - 1.0).abs() < 1e-5);
    }

    #[test]
    fn zero_pivot_reported() {
        let a: Vec<f64> = vec![0.0, 0.0, 0.0, 0.0];
        assert_eq!(lu_factor(2, &mut a.clone()), Err(0));
    }
}
