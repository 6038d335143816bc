//! Householder QR, Haar-orthogonal sampling, and spectrum synthesis.

use alloc::vec;
use alloc::vec::Vec;

use super::{matmul_nt, sym_matmul, MatError, Matrix};
use crate::fm;
use crate::rng::Rng;

/// Orthonormal factor of a square matrix via Householder reflections, with
/// the diagonal of `R` sign-fixed to be nonnegative so the map is unique.
pub fn qr_orthonormal(a: &Matrix) -> Matrix {
    let n = a.dim();
    let mut r = a.clone();
    // reflectors v_k stored densely; r becomes upper triangular
    let mut vs: Vec<Vec<f64>> = Vec::with_capacity(n);
    for k in 0..n {
        let mut xnorm2 = 0.0;
        for i in k..n {
            let x = r.at(i, k);
            xnorm2 += x * x;
        }
        let xnorm = fm::sqrt(xnorm2);
        let mut v = vec![0.0f64; n];
        if xnorm > 0.0 {
            let x0 = r.at(k, k);
            let alpha = if x0 >= 0.0 { -xnorm } else { xnorm };
            let mut vnorm2 = 0.0;
            for i in k..n {
                let vi = if i == k { r.at(i, k) - alpha } else { r.at(i, k) };
                v[i] = vi;
                vnorm2 += vi * vi;
            }
            if vnorm2 > 0.0 {
                let beta = 2.0 / vnorm2;
                for j in k..n {
                    let mut dot = 0.0;
                    for i in k..n {
                        dot += v[i] * r.at(i, j);
                    }
                    let scaled = beta * dot;
                    for i in k..n {
                        let val = r.at(i, j) - scaled * v[i];
                        r.set(i, j, val);
                    }
                }
                r.set(k, k, alpha);
            }
        }
        vs.push(v);
    }
    // q = H_0 H_1 ... H_{n-1} applied to the identity
    let mut q = Matrix::identity(n);
    for k in (0..n).rev() {
        let v = &vs[k];
        let vnorm2: f64 = v.iter().map(|&x| x * x).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        let beta = 2.0 / vnorm2;
        for j in 0..n {
            let mut dot = 0.0;
            for i in k..n {
                dot += v[i] * q.at(i, j);
            }
            let scaled = beta * dot;
            for i in k..n {
                let val = q.at(i, j) - scaled * v[i];
                q.set(i, j, val);
            }
        }
    }
    // sign fix: make R's diagonal nonnegative by flipping Q columns
    for k in 0..n {
        if r.at(k, k) < 0.0 {
            for i in 0..n {
                let val = -q.at(i, k);
                q.set(i, k, val);
            }
        }
    }
    q
}

/// Haar-distributed orthogonal matrix: QR of a standard Gaussian matrix with
/// the R-diagonal sign fix.
pub fn haar_orthogonal(dim: usize, rng: &mut Rng) -> Matrix {
    let mut g = Matrix::zeros(dim);
    for i in 0..dim {
        for j in 0..dim {
            g.set(i, j, rng.normal());
        }
    }
    qr_orthonormal(&g)
}

/// Orthogonality defect `||Q^T Q - I||_F`.
pub fn orthogonality_defect(q: &Matrix) -> f64 {
    let n = q.dim();
    let qtq = sym_matmul(&q.transpose(), q).expect("square");
    qtq.add_scaled(&Matrix::identity(n), -1.0)
        .expect("square")
        .frob_norm()
}

/// `Q diag(lambda) Q^T` for orthogonal `Q`; the co-diagonalized test-matrix
/// constructor. Rejects `Q` whose orthogonality defect exceeds `1e-10`.
pub fn synth_from_spectrum(q: &Matrix, lambda: &[f64]) -> Result<Matrix, MatError> {
    if q.dim() != lambda.len() {
        return Err(MatError::ShapeMismatch {
            left: q.dim(),
            right: lambda.len(),
        });
    }
    let defect = orthogonality_defect(q);
    if defect > 1e-10 {
        return Err(MatError::NotOrthogonal { defect });
    }
    let n = q.dim();
    // scale columns of Q by lambda, then multiply by Q^T
    let mut ql = q.clone();
    for j in 0..n {
        for i in 0..n {
            let val = ql.at(i, j) * lambda[j];
            ql.set(i, j, val);
        }
    }
    let mut out = matmul_nt(&ql, q)?;
    out.symmetrize();
    Ok(out)
}
