//! Thin deterministic wrappers around the dense decompositions used by the
//! tensor-network kernel and the dense oracle. All buffers are column-major
//! `Vec<Complex64>`.

use faer::{Mat, MatRef, Side};
use num_complex::Complex64 as C64;

use crate::tensor::{mm, Op};

/// Decompositions run single-threaded: concurrency lives at the trajectory /
/// grid-point level, and sequential kernels keep results bit-reproducible
/// regardless of the worker count.
fn seq_parallelism() {
    use std::sync::Once;
    static ONCE: Once = Once::new();
    ONCE.call_once(|| faer::set_global_parallelism(faer::Par::Seq));
}

fn as_mat(a: &[C64], m: usize, n: usize) -> MatRef<'_, C64> {
    seq_parallelism();
    MatRef::from_column_major_slice(a, m, n)
}

fn mat_to_vec(m: MatRef<'_, C64>) -> Vec<C64> {
    let mut v = Vec::with_capacity(m.nrows() * m.ncols());
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            v.push(m[(i, j)]);
        }
    }
    v
}

/// Eigendecomposition of a Hermitian matrix. Eigenvalues ascend.
pub struct Eigh {
    pub values: Vec<f64>,
    /// Column-major `n x n`, column `k` is the eigenvector of `values[k]`.
    pub vectors: Vec<C64>,
}

/// Hermitian eigendecomposition (the lower triangle is read).
pub fn eigh(a: &[C64], n: usize) -> Eigh {
    assert_eq!(a.len(), n * n);
    let eig = as_mat(a, n, n)
        .self_adjoint_eigen(Side::Lower)
        .expect("hermitian eigendecomposition failed");
    let values: Vec<f64> = (0..n).map(|i| eig.S()[i].re).collect();
    Eigh {
        values,
        vectors: mat_to_vec(eig.U()),
    }
}

/// Thin SVD: returns `(u, s, vh)` with `u` of size `m x k`, `vh` of size
/// `k x n`, `k = min(m, n)`, singular values descending.
pub fn svd(a: &[C64], m: usize, n: usize) -> (Vec<C64>, Vec<f64>, Vec<C64>) {
    assert_eq!(a.len(), m * n);
    let sv = as_mat(a, m, n).thin_svd().expect("svd failed");
    let k = m.min(n);
    let s: Vec<f64> = (0..k).map(|i| sv.S()[i].re).collect();
    let u = mat_to_vec(sv.U());
    let v = sv.V();
    // vh[k x n] = V^H
    let mut vh = vec![C64::new(0.0, 0.0); k * n];
    for j in 0..n {
        for i in 0..k {
            vh[i + j * k] = v[(j, i)].conj();
        }
    }
    (u, s, vh)
}

/// Thin QR of an `m x n` matrix with `m >= n`: `(q, r)` with `q` of size
/// `m x n` and `r` upper-triangular `n x n`.
pub fn qr_thin(a: &[C64], m: usize, n: usize) -> (Vec<C64>, Vec<C64>) {
    assert_eq!(a.len(), m * n);
    assert!(m >= n, "qr_thin expects m >= n, got {m} x {n}");
    let qr = as_mat(a, m, n).qr();
    let q = qr.compute_thin_Q();
    let r = qr.R();
    let mut rv = vec![C64::new(0.0, 0.0); n * n];
    for j in 0..n {
        for i in 0..=j.min(n - 1) {
            rv[i + j * n] = r[(i, j)];
        }
    }
    (mat_to_vec(q.as_ref()), rv)
}

/// `exp(scale * h)` for Hermitian `h`, via eigendecomposition.
pub fn expm_hermitian(h: &[C64], n: usize, scale: C64) -> Vec<C64> {
    let eig = eigh(h, n);
    // u * diag(exp(scale*lambda)) * u^H
    let mut ud = eig.vectors.clone();
    for (k, lam) in eig.values.iter().enumerate() {
        let f = (scale * lam).exp();
        for i in 0..n {
            ud[i + k * n] *= f;
        }
    }
    mm(&ud, n, n, Op::N, &eig.vectors, n, n, Op::H)
}

/// Matrix exponential by scaling-and-squaring with a Taylor core. Intended for
/// the small (`d x d`) non-normal generators of local gates.
pub fn expm(a: &[C64], n: usize) -> Vec<C64> {
    assert_eq!(a.len(), n * n);
    let norm1: f64 = (0..n)
        .map(|j| (0..n).map(|i| a[i + j * n].norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let squarings = if norm1 > 0.5 {
        (norm1 / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let f = 0.5f64.powi(squarings as i32);
    let b: Vec<C64> = a.iter().map(|z| z * f).collect();

    let mut result = identity(n);
    let mut term = identity(n);
    for k in 1..=24 {
        term = mm(&term, n, n, Op::N, &b, n, n, Op::N);
        let inv_k = C64::new(1.0 / k as f64, 0.0);
        for t in term.iter_mut() {
            *t *= inv_k;
        }
        for (r, t) in result.iter_mut().zip(&term) {
            *r += *t;
        }
        if term.iter().map(|z| z.norm()).sum::<f64>() < 1e-18 {
            break;
        }
    }
    for _ in 0..squarings {
        result = mm(&result, n, n, Op::N, &result, n, n, Op::N);
    }
    result
}

pub fn identity(n: usize) -> Vec<C64> {
    let mut id = vec![C64::new(0.0, 0.0); n * n];
    for i in 0..n {
        id[i + i * n] = C64::new(1.0, 0.0);
    }
    id
}

/// Convenience for oracle-facing code.
pub fn to_faer(a: &[C64], m: usize, n: usize) -> Mat<C64> {
    Mat::from_fn(m, n, |i, j| a[i + j * m])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigh_pauli_y_like() {
        let a = vec![
            C64::new(0.0, 0.0),
            C64::new(0.0, 1.0),
            C64::new(0.0, -1.0),
            C64::new(0.0, 0.0),
        ];
        let e = eigh(&a, 2);
        assert!((e.values[0] + 1.0).abs() < 1e-14);
        assert!((e.values[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn svd_reconstructs() {
        let a: Vec<C64> = (0..12)
            .map(|k| C64::new((k as f64).sin(), (k as f64).cos()))
            .collect();
        let (u, s, vh) = svd(&a, 4, 3);
        let mut us = u.clone();
        for (k, sk) in s.iter().enumerate() {
            for i in 0..4 {
                us[i + k * 4] *= sk;
            }
        }
        let rec = mm(&us, 4, 3, Op::N, &vh, 3, 3, Op::N);
        for (x, y) in rec.iter().zip(&a) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn expm_matches_hermitian_path() {
        let h = vec![
            C64::new(0.3, 0.0),
            C64::new(0.1, 0.2),
            C64::new(0.1, -0.2),
            C64::new(-0.5, 0.0),
        ];
        let scale = C64::new(0.0, -0.7);
        let e1 = expm_hermitian(&h, 2, scale);
        let hs: Vec<C64> = h.iter().map(|z| z * scale).collect();
        let e2 = expm(&hs, 2);
        for (x, y) in e1.iter().zip(&e2) {
            assert!((x - y).norm() < 1e-12);
        }
    }
}
