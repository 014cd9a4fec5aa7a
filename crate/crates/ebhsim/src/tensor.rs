//! Minimal dense complex tensor plumbing shared by the MPS kernel and DMRG.
//!
//! Storage is column-major (first index fastest). An MPS site tensor with
//! dimensions `(l, p, r)` is therefore simultaneously the matricization
//! `(l*p) x r` and `l x (p*r)` without any data movement, which is what the
//! sweep algorithms rely on.

use faer::linalg::matmul::matmul_with_conj;
use faer::{Accum, Conj, MatMut, MatRef, Par};
use num_complex::Complex64 as C64;

/// How an operand enters a matrix product.
#[derive(Copy, Clone, PartialEq, Eq)]
pub(crate) enum Op {
    /// As stored.
    N,
    /// Conjugate transpose.
    H,
    /// Conjugate without transposing.
    C,
}

fn view(a: &[C64], rows: usize, cols: usize, op: Op) -> (MatRef<'_, C64>, Conj) {
    assert_eq!(a.len(), rows * cols, "operand length mismatch");
    match op {
        Op::N => (
            MatRef::from_column_major_slice(a, rows, cols),
            Conj::No,
        ),
        Op::C => (
            MatRef::from_column_major_slice(a, rows, cols),
            Conj::Yes,
        ),
        Op::H => unsafe {
            (
                MatRef::from_raw_parts(a.as_ptr(), cols, rows, rows as isize, 1),
                Conj::Yes,
            )
        },
    }
}

/// `out = opa(a) * opb(b)` for column-major buffers; `(ar, ac)` are the stored
/// dimensions of `a` (before `opa`), likewise for `b`.
pub(crate) fn mm(
    a: &[C64],
    ar: usize,
    ac: usize,
    opa: Op,
    b: &[C64],
    br: usize,
    bc: usize,
    opb: Op,
) -> Vec<C64> {
    let (av, ca) = view(a, ar, ac, opa);
    let (bv, cb) = view(b, br, bc, opb);
    let (m, k) = (av.nrows(), av.ncols());
    let (k2, n) = (bv.nrows(), bv.ncols());
    assert_eq!(k, k2, "inner dimension mismatch ({m}x{k})*({k2}x{n})");
    let mut out = vec![C64::new(0.0, 0.0); m * n];
    let ov = MatMut::from_column_major_slice_mut(&mut out, m, n);
    matmul_with_conj(ov, Accum::Replace, av, ca, bv, cb, C64::new(1.0, 0.0), Par::Seq);
    out
}

/// Permute a column-major tensor. `perm[k]` names the input axis that becomes
/// output axis `k`.
pub(crate) fn permute(data: &[C64], dims: &[usize], perm: &[usize]) -> Vec<C64> {
    let rank = dims.len();
    debug_assert_eq!(perm.len(), rank);
    let total: usize = dims.iter().product();
    assert_eq!(data.len(), total);

    let mut in_strides = vec![0usize; rank];
    let mut s = 1;
    for (k, d) in dims.iter().enumerate() {
        in_strides[k] = s;
        s *= d;
    }
    let out_dims: Vec<usize> = perm.iter().map(|&k| dims[k]).collect();
    let out_strides_of_in: Vec<usize> = perm.iter().map(|&k| in_strides[k]).collect();

    let mut out = vec![C64::new(0.0, 0.0); total];
    if total == 0 {
        return out;
    }

    // Odometer over output indices; inner axis copied as a strided run.
    let inner = out_dims[0];
    let inner_stride = out_strides_of_in[0];
    let outer: usize = out_dims[1..].iter().product::<usize>().max(1);
    let mut ctr = vec![0usize; rank];
    let mut base_in = 0usize;
    let mut base_out = 0usize;
    for _ in 0..outer {
        if inner_stride == 1 {
            out[base_out..base_out + inner].copy_from_slice(&data[base_in..base_in + inner]);
        } else {
            let mut src = base_in;
            for v in &mut out[base_out..base_out + inner] {
                *v = data[src];
                src += inner_stride;
            }
        }
        base_out += inner;
        for k in 1..rank {
            ctr[k] += 1;
            base_in += out_strides_of_in[k];
            if ctr[k] < out_dims[k] {
                break;
            }
            base_in -= out_dims[k] * out_strides_of_in[k];
            ctr[k] = 0;
        }
    }
    out
}

/// Kronecker product of column-major matrices, `a (ma x na)` and `b (mb x nb)`,
/// ordered so the *first* operand indexes the slower (more significant) digit.
pub(crate) fn kron(a: &[C64], ma: usize, na: usize, b: &[C64], mb: usize, nb: usize) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); ma * mb * na * nb];
    let (rows, _cols) = (ma * mb, na * nb);
    for ja in 0..na {
        for jb in 0..nb {
            let j = ja * nb + jb;
            for ia in 0..ma {
                let af = a[ia + ja * ma];
                if af == C64::new(0.0, 0.0) {
                    continue;
                }
                for ib in 0..mb {
                    out[(ia * mb + ib) + j * rows] = af * b[ib + jb * mb];
                }
            }
        }
    }
    out
}

pub(crate) fn dot_conj(a: &[C64], b: &[C64]) -> C64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub(crate) fn norm_sq(a: &[C64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum()
}

pub(crate) fn scale(a: &mut [C64], f: C64) {
    for z in a.iter_mut() {
        *z *= f;
    }
}

pub(crate) fn axpy(y: &mut [C64], alpha: C64, x: &[C64]) {
    debug_assert_eq!(y.len(), x.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * *xi;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn mm_matches_hand_product() {
        // a = [[1, 2], [3, 4]] col-major, b = [[1], [i]]
        let a = vec![c(1.0, 0.0), c(3.0, 0.0), c(2.0, 0.0), c(4.0, 0.0)];
        let b = vec![c(1.0, 0.0), c(0.0, 1.0)];
        let y = mm(&a, 2, 2, Op::N, &b, 2, 1, Op::N);
        assert_eq!(y, vec![c(1.0, 2.0), c(3.0, 4.0)]);
        // adjoint: a^H * b
        let y = mm(&a, 2, 2, Op::H, &b, 2, 1, Op::N);
        assert_eq!(y, vec![c(1.0, 3.0), c(2.0, 4.0)]);
    }

    #[test]
    fn permute_roundtrip() {
        let dims = [2usize, 3, 4];
        let data: Vec<C64> = (0..24).map(|k| c(k as f64, -(k as f64))).collect();
        let p = permute(&data, &dims, &[2, 0, 1]);
        // inverse of [2,0,1] is [1,2,0]
        let back = permute(&p, &[4, 2, 3], &[1, 2, 0]);
        assert_eq!(back, data);
        // spot check: out[(i2,i0,i1)] == in[(i0,i1,i2)]
        let idx_in = 1 + 2 * 2 + 3 * 6; // (1,2,3)
        let idx_out = 3 + 1 * 4 + 2 * 8; // (3,1,2) in dims (4,2,3)
        assert_eq!(p[idx_out], data[idx_in]);
    }

    #[test]
    fn kron_number_operator() {
        // n ⊗ 1 on two 2-level sites, first factor slow
        let n_op = vec![c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)];
        let id = vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)];
        let k = kron(&n_op, 2, 2, &id, 2, 2);
        // basis order |00>,|01>,|10>,|11> with site 1 slow: n_1 = diag(0,0,1,1)
        for (i, want) in [0.0, 0.0, 1.0, 1.0].iter().enumerate() {
            assert_eq!(k[i + i * 4], c(*want, 0.0));
        }
    }
}
