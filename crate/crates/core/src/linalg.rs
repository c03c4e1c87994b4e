//! Thin wrappers over the dense linear-algebra backend.
//!
//! All matrices cross this boundary as row-major slices. Factorization
//! results are copied back out into plain `Vec<f64>` buffers so the rest of
//! the crate stays independent of backend storage layouts.

use faer::linalg::matmul::matmul;
use faer::{Accum, Mat, MatMut, MatRef, Par, Side};

use crate::error::{Error, Result};

fn par() -> Par {
    faer::get_global_parallelism()
}

/// `out = a (m×k) · b (k×n)`, all row-major.
pub fn gemm(m: usize, k: usize, n: usize, a: &[f64], b: &[f64], out: &mut [f64]) {
    debug_assert_eq!(a.len(), m * k);
    debug_assert_eq!(b.len(), k * n);
    debug_assert_eq!(out.len(), m * n);
    let a = MatRef::from_row_major_slice(a, m, k);
    let b = MatRef::from_row_major_slice(b, k, n);
    let c = MatMut::from_row_major_slice_mut(out, m, n);
    matmul(c, Accum::Replace, a, b, 1.0, par());
}

/// `out = aᵀ (m×k, stored k×m) · b (k×n)`, all row-major.
pub fn gemm_tn(m: usize, k: usize, n: usize, a: &[f64], b: &[f64], out: &mut [f64]) {
    debug_assert_eq!(a.len(), k * m);
    debug_assert_eq!(b.len(), k * n);
    debug_assert_eq!(out.len(), m * n);
    let a = MatRef::from_row_major_slice(a, k, m);
    let b = MatRef::from_row_major_slice(b, k, n);
    let c = MatMut::from_row_major_slice_mut(out, m, n);
    matmul(c, Accum::Replace, a.transpose(), b, 1.0, par());
}

/// `out = a (m×k) · bᵀ (k×n, stored n×k)`, all row-major.
pub fn gemm_nt(m: usize, k: usize, n: usize, a: &[f64], b: &[f64], out: &mut [f64]) {
    debug_assert_eq!(a.len(), m * k);
    debug_assert_eq!(b.len(), n * k);
    debug_assert_eq!(out.len(), m * n);
    let a = MatRef::from_row_major_slice(a, m, k);
    let b = MatRef::from_row_major_slice(b, n, k);
    let c = MatMut::from_row_major_slice_mut(out, m, n);
    matmul(c, Accum::Replace, a, b.transpose(), 1.0, par());
}

/// Thin SVD of a row-major `m×n` matrix.
///
/// Returns `(u, s, vt)` with `u` of shape `m×r`, `vt` of shape `r×n`,
/// `r = min(m, n)`, and the singular values descending.
pub fn thin_svd(m: usize, n: usize, a: &[f64]) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let r = m.min(n);
    let mat = MatRef::from_row_major_slice(a, m, n);
    let svd = mat
        .thin_svd()
        .map_err(|e| Error::Numerical(format!("SVD failed to converge: {e:?}")))?;
    let (u, s, v) = (svd.U(), svd.S(), svd.V());
    let mut uo = vec![0.0; m * r];
    for i in 0..m {
        for j in 0..r {
            uo[i * r + j] = u[(i, j)];
        }
    }
    let so: Vec<f64> = (0..r).map(|i| s[i]).collect();
    let mut vt = vec![0.0; r * n];
    for i in 0..r {
        for j in 0..n {
            vt[i * n + j] = v[(j, i)];
        }
    }
    Ok((uo, so, vt))
}

/// Eigendecomposition of a symmetric row-major `n×n` matrix.
///
/// Returns `(values, vectors)` with eigenvalues descending and the
/// eigenvector for `values[k]` stored in column `k` of the row-major
/// `n×n` matrix `vectors`.
pub fn eigh_descending(n: usize, a: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let mat = MatRef::from_row_major_slice(a, n, n);
    let eig = mat
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Numerical(format!("eigendecomposition failed: {e:?}")))?;
    let (s, u) = (eig.S(), eig.U());
    // faer returns eigenvalues ascending; flip to descending.
    let vals: Vec<f64> = (0..n).map(|k| s[n - 1 - k]).collect();
    let mut vecs = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            vecs[i * n + k] = u[(i, n - 1 - k)];
        }
    }
    Ok((vals, vecs))
}

/// Symmetric function of a symmetric matrix via eigendecomposition:
/// `f(A) = U f(Λ) Uᵀ` for a row-major `n×n` input.
pub fn sym_matrix_function(n: usize, a: &[f64], f: impl Fn(f64) -> f64) -> Result<Vec<f64>> {
    let (vals, vecs) = eigh_descending(n, a)?;
    let fv: Vec<f64> = vals.iter().map(|&x| f(x)).collect();
    // scaled = U f(Λ): scale column k by fv[k]
    let mut scaled = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            scaled[i * n + k] = vecs[i * n + k] * fv[k];
        }
    }
    let mut out = vec![0.0; n * n];
    gemm_nt(n, n, n, &scaled, &vecs, &mut out);
    Ok(out)
}

/// Gram-matrix route to the right singular pairs of a row-major `m×n`
/// matrix: eigendecomposition of `aᵀa`.
///
/// Returns `(weights, v)` where `weights` are the descending eigenvalues of
/// `aᵀa` (squared singular values, clamped at zero) and `v` is the
/// row-major `n×n` matrix whose column `k` is the right singular vector for
/// `weights[k]`.
pub fn gram_right_vectors(m: usize, n: usize, a: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut gram = vec![0.0; n * n];
    gemm_tn(n, m, n, a, a, &mut gram);
    let (mut w, v) = eigh_descending(n, &gram)?;
    for x in w.iter_mut() {
        if *x < 0.0 {
            *x = 0.0;
        }
    }
    Ok((w, v))
}

/// Dense Frobenius inner product of two equal-length buffers.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let a = MatRef::from_row_major_slice(a, 1, a.len());
    let b = MatRef::from_row_major_slice(b, b.len(), 1);
    let mut out = [0.0];
    let c = MatMut::from_row_major_slice_mut(&mut out, 1, 1);
    matmul(c, Accum::Replace, a, b, 1.0, Par::Seq);
    out[0]
}

/// Euclidean norm of a buffer.
pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).max(0.0).sqrt()
}

/// Owned row-major copy of a faer matrix (test and oracle helper).
#[allow(dead_code)]
pub fn mat_to_rows(m: &Mat<f64>) -> Vec<f64> {
    let (r, c) = (m.nrows(), m.ncols());
    let mut out = vec![0.0; r * c];
    for i in 0..r {
        for j in 0..c {
            out[i * c + j] = m[(i, j)];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gemm_small() {
        let a = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0]; // 2x3
        let b = [7.0, 8.0, 9.0, 10.0, 11.0, 12.0]; // 3x2
        let mut c = [0.0; 4];
        gemm(2, 3, 2, &a, &b, &mut c);
        assert_eq!(c, [58.0, 64.0, 139.0, 154.0]);
    }

    #[test]
    fn svd_reconstructs() {
        let a: Vec<f64> = (0..12).map(|i| ((i * 7 + 3) % 11) as f64).collect();
        let (u, s, vt) = thin_svd(4, 3, &a).unwrap();
        let mut us = vec![0.0; 4 * 3];
        for i in 0..4 {
            for k in 0..3 {
                us[i * 3 + k] = u[i * 3 + k] * s[k];
            }
        }
        let mut rec = vec![0.0; 12];
        gemm(4, 3, 3, &us, &vt, &mut rec);
        for (x, y) in rec.iter().zip(a.iter()) {
            assert!((x - y).abs() < 1e-10);
        }
        assert!(s.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn eigh_matches_svd_weights() {
        let a: Vec<f64> = (0..20).map(|i| ((i * 13 + 5) % 17) as f64 / 17.0).collect();
        let (_, s, _) = thin_svd(5, 4, &a).unwrap();
        let (w, v) = gram_right_vectors(5, 4, &a).unwrap();
        for k in 0..4 {
            assert!((w[k] - s[k] * s[k]).abs() < 1e-10);
        }
        // columns of v orthonormal
        for k in 0..4 {
            for l in 0..4 {
                let mut acc = 0.0;
                for i in 0..4 {
                    acc += v[i * 4 + k] * v[i * 4 + l];
                }
                let expect = if k == l { 1.0 } else { 0.0 };
                assert!((acc - expect).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn matrix_exponential_of_diagonal() {
        let a = [1.0, 0.0, 0.0, -2.0];
        let e = sym_matrix_function(2, &a, f64::exp).unwrap();
        assert!((e[0] - 1.0f64.exp()).abs() < 1e-12);
        assert!((e[3] - (-2.0f64).exp()).abs() < 1e-12);
        assert!(e[1].abs() < 1e-12 && e[2].abs() < 1e-12);
    }
}
