//! Symmetric eigensolvers.
//!
//! [`sym_eigh`] is a cyclic Jacobi method with threshold sweeps (capped at
//! 100): unconditionally stable on symmetric input, produces eigenvectors,
//! and is the reference decomposition for verification. [`sym_eigvals`] is
//! an eigenvalues-only fast path — Householder tridiagonalization followed
//! by implicit-shift QL — used by the spectrum samplers where matrices run
//! into the thousands and Jacobi would be far too slow.

use alloc::vec;
use alloc::vec::Vec;

use super::{MatError, Matrix};
use crate::fm;

const MAX_SWEEPS: usize = 100;

/// Eigendecomposition `A = Q diag(eigenvalues) Q^T` with eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct EigDecomp {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Matrix,
}

fn off_diag_norm(a: &Matrix) -> f64 {
    let n = a.dim();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let v = a.at(i, j);
                s += v * v;
            }
        }
    }
    fm::sqrt(s)
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
pub fn sym_eigh(a: &Matrix) -> Result<EigDecomp, MatError> {
    let defect = a.symmetry_defect();
    if defect > 1e-12 {
        return Err(MatError::NotSymmetric { defect });
    }
    let n = a.dim();
    let mut work = a.clone();
    work.symmetrize();
    let mut q = Matrix::identity(n);
    let fnorm = work.frob_norm();
    if fnorm == 0.0 || n < 2 {
        return Ok(sorted_decomp(
            (0..n).map(|i| work.at(i, i)).collect(),
            q,
        ));
    }

    let mut off = off_diag_norm(&work);
    for sweep in 0..MAX_SWEEPS {
        if off <= 1e-14 * fnorm {
            return Ok(sorted_decomp(
                (0..n).map(|i| work.at(i, i)).collect(),
                q,
            ));
        }
        // generous rotation threshold in the first sweeps, then rotate on
        // every nonzero off-diagonal entry
        let thresh = if sweep < 3 {
            0.2 * off / (n * n) as f64
        } else {
            0.0
        };
        for p in 0..n - 1 {
            for r in (p + 1)..n {
                let apq = work.at(p, r);
                if fm::abs(apq) <= thresh || apq == 0.0 {
                    continue;
                }
                let theta = (work.at(r, r) - work.at(p, p)) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + fm::sqrt(1.0 + theta * theta))
                } else {
                    1.0 / (theta - fm::sqrt(1.0 + theta * theta))
                };
                let c = 1.0 / fm::sqrt(1.0 + t * t);
                let s = t * c;
                rotate(&mut work, &mut q, p, r, c, s);
            }
        }
        off = off_diag_norm(&work);
    }
    Err(MatError::NoConvergence { residual: off })
}

/// Two-sided Givens rotation in the (p, r) plane with accumulation in `q`.
fn rotate(a: &mut Matrix, q: &mut Matrix, p: usize, r: usize, c: f64, s: f64) {
    let n = a.dim();
    for k in 0..n {
        let akp = a.at(k, p);
        let akr = a.at(k, r);
        a.set(k, p, c * akp - s * akr);
        a.set(k, r, s * akp + c * akr);
    }
    for k in 0..n {
        let apk = a.at(p, k);
        let ark = a.at(r, k);
        a.set(p, k, c * apk - s * ark);
        a.set(r, k, s * apk + c * ark);
    }
    for k in 0..n {
        let qkp = q.at(k, p);
        let qkr = q.at(k, r);
        q.set(k, p, c * qkp - s * qkr);
        q.set(k, r, s * qkp + c * qkr);
    }
}

fn sorted_decomp(eigenvalues: Vec<f64>, q: Matrix) -> EigDecomp {
    let n = eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eigenvalues[i].partial_cmp(&eigenvalues[j]).unwrap());
    let mut sorted_vals = Vec::with_capacity(n);
    let mut sorted_q = Matrix::zeros(n);
    for (new_col, &old_col) in order.iter().enumerate() {
        sorted_vals.push(eigenvalues[old_col]);
        for row in 0..n {
            sorted_q.set(row, new_col, q.at(row, old_col));
        }
    }
    EigDecomp {
        eigenvalues: sorted_vals,
        eigenvectors: sorted_q,
    }
}

/// Eigenvalues (ascending) of a symmetric matrix without eigenvectors.
pub fn sym_eigvals(a: &Matrix) -> Result<Vec<f64>, MatError> {
    let defect = a.symmetry_defect();
    if defect > 1e-12 {
        return Err(MatError::NotSymmetric { defect });
    }
    let n = a.dim();
    if n == 0 {
        return Ok(Vec::new());
    }
    if n == 1 {
        return Ok(vec![a.at(0, 0)]);
    }
    let mut work = a.clone();
    work.symmetrize();
    let (mut d, mut e) = tridiagonalize(&mut work);
    ql_implicit(&mut d, &mut e)?;
    d.sort_by(|x, y| x.partial_cmp(y).unwrap());
    Ok(d)
}

/// Householder reduction to tridiagonal form; returns (diagonal, subdiagonal)
/// with `e[i]` coupling rows `i` and `i + 1` (`e[n-1]` unused).
fn tridiagonalize(a: &mut Matrix) -> (Vec<f64>, Vec<f64>) {
    let n = a.dim();
    let mut e = vec![0.0f64; n];
    let mut v = vec![0.0f64; n];
    let mut p = vec![0.0f64; n];
    for k in 0..n.saturating_sub(2) {
        let mut xnorm2 = 0.0;
        for i in (k + 1)..n {
            let x = a.at(i, k);
            xnorm2 += x * x;
        }
        let x0 = a.at(k + 1, k);
        let xnorm = fm::sqrt(xnorm2);
        if xnorm == 0.0 {
            e[k] = 0.0;
            continue;
        }
        let alpha = if x0 >= 0.0 { -xnorm } else { xnorm };
        e[k] = alpha;
        // v = x - alpha * e1 over the trailing block
        let mut vnorm2 = 0.0;
        for i in (k + 1)..n {
            let vi = if i == k + 1 {
                a.at(i, k) - alpha
            } else {
                a.at(i, k)
            };
            v[i] = vi;
            vnorm2 += vi * vi;
        }
        if vnorm2 == 0.0 {
            continue;
        }
        let beta = 2.0 / vnorm2;
        // p = beta * B v over the trailing block
        for i in (k + 1)..n {
            let mut s = 0.0;
            for j in (k + 1)..n {
                s += a.at(i, j) * v[j];
            }
            p[i] = beta * s;
        }
        let mut vtp = 0.0;
        for i in (k + 1)..n {
            vtp += v[i] * p[i];
        }
        let kappa = vtp / vnorm2;
        // B <- B - v q^T - q v^T with q = p - kappa v
        for i in (k + 1)..n {
            let qi = p[i] - kappa * v[i];
            for j in (k + 1)..n {
                let qj = p[j] - kappa * v[j];
                let val = a.at(i, j) - v[i] * qj - qi * v[j];
                a.set(i, j, val);
            }
        }
        a.set(k + 1, k, alpha);
    }
    if n >= 2 {
        e[n - 2] = a.at(n - 1, n - 2);
    }
    let d: Vec<f64> = (0..n).map(|i| a.at(i, i)).collect();
    (d, e)
}

/// Implicit-shift QL on a tridiagonal (d, e); 50-iteration cap per eigenvalue.
fn ql_implicit(d: &mut [f64], e: &mut [f64]) -> Result<(), MatError> {
    let n = d.len();
    if n < 2 {
        return Ok(());
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = fm::abs(d[m]) + fm::abs(d[m + 1]);
                if fm::abs(e[m]) <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 50 {
                return Err(MatError::NoConvergence {
                    residual: fm::abs(e[l]),
                });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = fm::hypot(g, 1.0);
            let denom = g + if g >= 0.0 { fm::abs(r) } else { -fm::abs(r) };
            g = d[m] - d[l] + e[l] / denom;
            let (mut s, mut c) = (1.0f64, 1.0f64);
            let mut p = 0.0f64;
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = fm::hypot(f, g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}
