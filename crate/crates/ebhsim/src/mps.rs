//! Matrix-product-state / matrix-product-operator kernel.
//!
//! Site tensors are rank-3, `(left bond, physical, right bond)`, stored
//! column-major with the left bond fastest, so both matricizations used by the
//! sweep algorithms are free. States carry an optional orthogonality center:
//! every tensor strictly left of it is left-isometric, everything right of it
//! right-isometric. Operations keep the spec's 1-based site numbering in the
//! public API.
//!
//! Two-site updates truncate by eigendecomposing the Gram matrix of the
//! two-site wavefunction on the side that becomes the new isometry; the center
//! is obtained by projection, so no division by small singular values ever
//! happens and returned isometries are orthonormal to machine precision.
//!
//! States are checkpointable in a small self-describing binary format (see
//! [`Mps::save`]).

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::linalg::{eigh, identity, qr_thin};
use crate::tensor::{mm, norm_sq, permute, scale, Op};

#[derive(Debug, Error)]
pub enum MpsError {
    #[error("occupation {occ} at site {site} exceeds the local cutoff {max}")]
    OccupationOutOfRange { site: usize, occ: usize, max: usize },
    #[error("expected {expected} occupations, got {got}")]
    OccupationLength { expected: usize, got: usize },
    #[error("site index {0} outside 1..={1}")]
    SiteOutOfRange(usize, usize),
    #[error("string correlator needs i < j, got ({0}, {1})")]
    BadStringSites(usize, usize),
    #[error("operator dimension {got} does not match the physical dimension {want}")]
    GateDimMismatch { got: usize, want: usize },
    #[error("checkpoint io: {0}")]
    Io(#[from] std::io::Error),
    #[error("corrupt checkpoint: {0}")]
    CorruptCheckpoint(String),
}

/// Truncation rule for two-site updates: keep at most `chi_max` singular
/// values and drop anything below `sv_cutoff` relative to the largest.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CompressionPolicy {
    pub chi_max: usize,
    pub sv_cutoff: f64,
}

impl CompressionPolicy {
    pub fn new(chi_max: usize) -> Self {
        Self { chi_max, sv_cutoff: 1e-10 }
    }

    /// No truncation at all; useful for exact small-system checks.
    pub fn exact() -> Self {
        Self { chi_max: usize::MAX, sv_cutoff: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SiteTensor {
    pub l: usize,
    pub p: usize,
    pub r: usize,
    /// Column-major `(l, p, r)`, left bond fastest.
    pub data: Vec<C64>,
}

impl SiteTensor {
    fn zeros(l: usize, p: usize, r: usize) -> Self {
        Self { l, p, r, data: vec![C64::new(0.0, 0.0); l * p * r] }
    }

    /// View slice for physical index `p`: an `l x r` matrix with column stride
    /// `l * phys`.
    fn phys_slice(&self, p: usize) -> (usize, &[C64]) {
        (p * self.l, &self.data)
    }
}

/// Which side of a split keeps the orthogonality center.
#[derive(Debug, Copy, Clone, PartialEq, Eq)]
pub(crate) enum CenterSide {
    Left,
    Right,
}

#[derive(Debug, Clone)]
pub struct Mps {
    phys: usize,
    pub(crate) tensors: Vec<SiteTensor>,
    pub(crate) center: Option<usize>, // 0-based
    /// Discarded weight (sum of squared dropped singular values) per
    /// truncating operation, in application order.
    pub trunc_log: Vec<f64>,
}

/// Result of a truncated matrix split, shared with DMRG.
pub(crate) struct Split {
    /// `m x k`, isometric when the center went right.
    pub left: Vec<C64>,
    /// `k x n`, isometric when the center went left.
    pub right: Vec<C64>,
    pub kept: usize,
    pub discarded: f64,
}

/// Oversampling columns for the randomized subspace path.
const SKETCH_PAD: usize = 16;

/// Top eigenpairs of the Gram matrix of `mat` on the requested side, returned
/// as (isometry columns in descending eigenvalue order, eigenvalues, trace).
///
/// When far fewer directions are wanted than the Gram dimension, a
/// deterministic randomized subspace iteration (two Gram applications, then
/// Rayleigh-Ritz) replaces the full eigendecomposition: the returned columns
/// are still exactly orthonormal (QR plus a unitary rotation), only the choice
/// of the kept subspace is approximate, which costs at most a slightly larger
/// discarded weight near degenerate truncation boundaries.
fn gram_top_basis(
    mat: &[C64],
    m: usize,
    n: usize,
    side: CenterSide,
    want: usize,
) -> (Vec<C64>, Vec<f64>, Option<Vec<f64>>, f64) {
    let gram_dim = match side {
        CenterSide::Right => m,
        CenterSide::Left => n,
    };
    let trace = norm_sq(mat);
    let sketch = (want + SKETCH_PAD).min(gram_dim);
    if sketch * 2 > gram_dim || gram_dim <= 96 {
        // full eigendecomposition; the complete spectrum is kept so the
        // discarded weight can be summed directly instead of via trace
        // cancellation
        let gram = match side {
            CenterSide::Right => mm(mat, m, n, Op::N, mat, m, n, Op::H),
            CenterSide::Left => mm(mat, m, n, Op::H, mat, m, n, Op::N),
        };
        let eig = eigh(&gram, gram_dim);
        let take = want.min(gram_dim);
        let mut iso = vec![C64::new(0.0, 0.0); gram_dim * take];
        let mut lams = Vec::with_capacity(take);
        for k in 0..take {
            let src = gram_dim - 1 - k;
            iso[k * gram_dim..(k + 1) * gram_dim]
                .copy_from_slice(&eig.vectors[src * gram_dim..(src + 1) * gram_dim]);
            lams.push(eig.values[src]);
        }
        let all_desc: Vec<f64> = eig.values.iter().rev().copied().collect();
        return (iso, lams, Some(all_desc), trace);
    }

    // G y via two skinny products with mat itself
    let apply_gram = |y: Vec<C64>, cols: usize| -> Vec<C64> {
        match side {
            CenterSide::Right => {
                let t = mm(mat, m, n, Op::H, &y, m, cols, Op::N);
                mm(mat, m, n, Op::N, &t, n, cols, Op::N)
            }
            CenterSide::Left => {
                let t = mm(mat, m, n, Op::N, &y, n, cols, Op::N);
                mm(mat, m, n, Op::H, &t, m, cols, Op::N)
            }
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED ^ ((gram_dim as u64) << 20) ^ sketch as u64);
    let mut y: Vec<C64> = (0..gram_dim * sketch)
        .map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect();
    for _ in 0..2 {
        y = apply_gram(y, sketch);
    }
    let (q, _) = qr_thin(&y, gram_dim, sketch);
    // Rayleigh-Ritz: B = Q† G Q = W† W with W built from one more product
    let w = match side {
        CenterSide::Right => mm(mat, m, n, Op::H, &q, m, sketch, Op::N),
        CenterSide::Left => mm(mat, m, n, Op::N, &q, n, sketch, Op::N),
    };
    let wdim = match side {
        CenterSide::Right => n,
        CenterSide::Left => m,
    };
    let b = mm(&w, wdim, sketch, Op::H, &w, wdim, sketch, Op::N);
    let eig = eigh(&b, sketch);
    let take = want.min(sketch);
    let mut rot = vec![C64::new(0.0, 0.0); sketch * take];
    let mut lams = Vec::with_capacity(take);
    for k in 0..take {
        let src = sketch - 1 - k;
        rot[k * sketch..(k + 1) * sketch]
            .copy_from_slice(&eig.vectors[src * sketch..(src + 1) * sketch]);
        lams.push(eig.values[src]);
    }
    let iso = mm(&q, gram_dim, sketch, Op::N, &rot, sketch, take, Op::N);
    (iso, lams, None, trace)
}

/// Truncated split of a column-major `m x n` matrix. The factor on the
/// `side` opposite the center is an exact isometry; the center factor is the
/// projection of `mat` onto it, so no division by small singular values ever
/// happens.
pub(crate) fn split_matrix(
    mat: &[C64],
    m: usize,
    n: usize,
    policy: &CompressionPolicy,
    side: CenterSide,
) -> Split {
    debug_assert_eq!(mat.len(), m * n);
    let gram_dim = match side {
        CenterSide::Right => m,
        CenterSide::Left => n,
    };
    let rank_cap = m.min(n).min(policy.chi_max);
    let (iso_full, lams, all_lams, trace) = gram_top_basis(mat, m, n, side, rank_cap);
    let lam_max = lams.first().copied().unwrap_or(0.0).max(0.0);
    let floor = lam_max * policy.sv_cutoff * policy.sv_cutoff;
    let mut kept = 0usize;
    for &lam in &lams {
        if kept >= rank_cap || (kept >= 1 && (lam <= floor || lam <= 0.0)) {
            break;
        }
        kept += 1;
    }
    let kept = kept.max(1);
    let discarded = match &all_lams {
        Some(all) => all[kept..].iter().map(|&l| l.max(0.0)).sum(),
        None => {
            let kept_weight: f64 = lams[..kept].iter().map(|&l| l.max(0.0)).sum();
            (trace - kept_weight).max(0.0)
        }
    };
    let iso = iso_full[..gram_dim * kept].to_vec();

    match side {
        CenterSide::Right => {
            let center = mm(&iso, m, kept, Op::H, mat, m, n, Op::N);
            Split { left: iso, right: center, kept, discarded }
        }
        CenterSide::Left => {
            let center = mm(mat, m, n, Op::N, &iso, n, kept, Op::N);
            // right factor is V^H (kept x n)
            let mut vh = vec![C64::new(0.0, 0.0); kept * n];
            for j in 0..n {
                for k in 0..kept {
                    vh[k + j * kept] = iso[j + k * n].conj();
                }
            }
            Split { left: center, right: vh, kept, discarded }
        }
    }
}

impl Mps {
    /// Product state with the given occupations; `chi = 1`, normalized.
    pub fn product_state(sites: usize, phys: usize, occupations: &[usize]) -> Result<Self, MpsError> {
        if occupations.len() != sites {
            return Err(MpsError::OccupationLength { expected: sites, got: occupations.len() });
        }
        let mut tensors = Vec::with_capacity(sites);
        for (k, &occ) in occupations.iter().enumerate() {
            if occ >= phys {
                return Err(MpsError::OccupationOutOfRange { site: k + 1, occ, max: phys - 1 });
            }
            let mut t = SiteTensor::zeros(1, phys, 1);
            t.data[occ] = C64::new(1.0, 0.0);
            tensors.push(t);
        }
        Ok(Self { phys, tensors, center: Some(0), trunc_log: Vec::new() })
    }

    /// Vacuum on every site.
    pub fn vacuum(sites: usize, phys: usize) -> Self {
        Self::product_state(sites, phys, &vec![0; sites]).expect("vacuum is always valid")
    }

    /// Deterministic pseudo-random normalized state with bond dimension
    /// `min(chi, exact)`; useful for gauge and oracle tests.
    pub fn random(sites: usize, phys: usize, chi: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut dims = Vec::with_capacity(sites + 1);
        for k in 0..=sites {
            let left = (phys as u128).pow(k as u32).min(1 << 40) as usize;
            let right = (phys as u128).pow((sites - k) as u32).min(1 << 40) as usize;
            dims.push(left.min(right).min(chi));
        }
        let mut tensors = Vec::with_capacity(sites);
        for k in 0..sites {
            let (l, r) = (dims[k], dims[k + 1]);
            let mut t = SiteTensor::zeros(l, phys, r);
            for z in t.data.iter_mut() {
                *z = C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
            }
            tensors.push(t);
        }
        let mut mps = Self { phys, tensors, center: None, trunc_log: Vec::new() };
        mps.canonicalize(1);
        mps.normalize();
        mps
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    pub fn phys_dim(&self) -> usize {
        self.phys
    }

    /// Orthogonality center as a 1-based site index, if one is established.
    pub fn center(&self) -> Option<usize> {
        self.center.map(|c| c + 1)
    }

    /// Bond dimensions, `L + 1` entries including the trivial boundary bonds.
    pub fn bond_dims(&self) -> Vec<usize> {
        let mut dims = Vec::with_capacity(self.len() + 1);
        dims.push(1);
        for t in &self.tensors {
            dims.push(t.r);
        }
        dims
    }

    pub fn max_bond(&self) -> usize {
        self.tensors.iter().map(|t| t.r.max(t.l)).max().unwrap_or(1)
    }

    pub fn site(&self, i: usize) -> &SiteTensor {
        &self.tensors[i - 1]
    }

    pub fn total_discarded(&self) -> f64 {
        self.trunc_log.iter().sum()
    }

    fn check_site(&self, i: usize) -> Result<(), MpsError> {
        if i < 1 || i > self.len() {
            return Err(MpsError::SiteOutOfRange(i, self.len()));
        }
        Ok(())
    }

    /// Left-normalize tensor `k` (0-based), pushing the remainder right.
    fn qr_step_right(&mut self, k: usize) {
        let t = &self.tensors[k];
        let (l, p, r) = (t.l, t.p, t.r);
        let m = l * p;
        debug_assert!(m >= r, "bond dimension exceeds l*p; tensors are kept trimmed");
        let (q, rm) = qr_thin(&t.data, m, r);
        self.tensors[k] = SiteTensor { l, p, r, data: q };
        let nxt = &self.tensors[k + 1];
        let merged = mm(&rm, r, r, Op::N, &nxt.data, r, nxt.p * nxt.r, Op::N);
        self.tensors[k + 1] = SiteTensor { l: r, p: nxt.p, r: nxt.r, data: merged };
    }

    /// Right-normalize tensor `k` (0-based), pushing the remainder left.
    fn qr_step_left(&mut self, k: usize) {
        let t = &self.tensors[k];
        let (l, p, r) = (t.l, t.p, t.r);
        let n = p * r;
        // QR of the adjoint: A^H (n x l) = Q R  =>  A = R^H Q^H
        let mut ah = vec![C64::new(0.0, 0.0); n * l];
        for col in 0..l {
            for row in 0..n {
                ah[row + col * n] = t.data[col + row * l].conj();
            }
        }
        debug_assert!(n >= l, "bond dimension exceeds p*r");
        let (q, rm) = qr_thin(&ah, n, l);
        // new tensor = Q^H (l x n)
        let mut qh = vec![C64::new(0.0, 0.0); l * n];
        for col in 0..n {
            for row in 0..l {
                qh[row + col * l] = q[col + row * n].conj();
            }
        }
        self.tensors[k] = SiteTensor { l, p, r, data: qh };
        // absorb R^H (l x l) into the left neighbor from the right
        let prev = &self.tensors[k - 1];
        let mut rh = vec![C64::new(0.0, 0.0); l * l];
        for col in 0..l {
            for row in 0..l {
                rh[row + col * l] = rm[col + row * l].conj();
            }
        }
        let merged = mm(&prev.data, prev.l * prev.p, prev.r, Op::N, &rh, l, l, Op::N);
        self.tensors[k - 1] = SiteTensor { l: prev.l, p: prev.p, r: l, data: merged };
    }

    /// Bring the state into mixed-canonical form with the orthogonality center
    /// at 1-based site `center`. The represented state is unchanged.
    pub fn canonicalize(&mut self, center: usize) {
        assert!(center >= 1 && center <= self.len(), "center out of range");
        let c = center - 1;
        let lo = match self.center {
            Some(cur) if cur <= c => cur, // prefix already isometric
            _ => 0,
        };
        for k in lo..c {
            self.qr_step_right(k);
        }
        let hi = match self.center {
            Some(cur) if cur >= c => cur,
            _ => self.len() - 1,
        };
        for k in ((c + 1)..=hi).rev() {
            self.qr_step_left(k);
        }
        self.center = Some(c);
    }

    /// Move an established center to `target` (0-based) with QR hops.
    fn shift_center_to(&mut self, target: usize) {
        let c = self.center.expect("center required");
        if target > c {
            for k in c..target {
                self.qr_step_right(k);
            }
        } else {
            for k in ((target + 1)..=c).rev() {
                self.qr_step_left(k);
            }
        }
        self.center = Some(target);
    }

    /// Squared norm. Cheap when a center is established.
    pub fn norm_sq(&self) -> f64 {
        match self.center {
            Some(c) => norm_sq(&self.tensors[c].data),
            None => {
                // full transfer from the left
                let mut env = vec![C64::new(1.0, 0.0)];
                let mut dim = 1usize;
                for t in &self.tensors {
                    env = transfer_identity(&env, dim, t);
                    dim = t.r;
                }
                env[0].re
            }
        }
    }

    /// Scale to unit norm; returns the previous squared norm.
    pub fn normalize(&mut self) -> f64 {
        let n2 = self.norm_sq();
        if n2 > 0.0 {
            let f = C64::new(1.0 / n2.sqrt(), 0.0);
            match self.center {
                Some(c) => scale(&mut self.tensors[c].data, f),
                None => scale(&mut self.tensors[0].data, f),
            }
        }
        n2
    }

    /// `<self|other>`.
    pub fn overlap(&self, other: &Mps) -> C64 {
        assert_eq!(self.len(), other.len());
        assert_eq!(self.phys, other.phys);
        let mut env = vec![C64::new(1.0, 0.0)]; // (bra_bond x ket_bond)
        let mut dims = (1usize, 1usize);
        for (tb, tk) in self.tensors.iter().zip(&other.tensors) {
            let mut next = vec![C64::new(0.0, 0.0); tb.r * tk.r];
            for p in 0..self.phys {
                // w = env^T? env (a x b): tmp = env * K[p] (a x rk)
                let (off_k, dk) = tk.phys_slice(p);
                let kp = strided_copy(dk, off_k, tk.l, tk.r, tk.l * tk.p);
                let tmp = mm(&env, dims.0, dims.1, Op::N, &kp, tk.l, tk.r, Op::N);
                let (off_b, db) = tb.phys_slice(p);
                let bp = strided_copy(db, off_b, tb.l, tb.r, tb.l * tb.p);
                let upd = mm(&bp, tb.l, tb.r, Op::H, &tmp, dims.0, tk.r, Op::N);
                for (x, y) in next.iter_mut().zip(upd) {
                    *x += y;
                }
            }
            env = next;
            dims = (tb.r, tk.r);
        }
        env[0]
    }

    /// Dense statevector in the occupation basis, site 1 slowest. Exponential
    /// in `L`; intended for oracle-scale checks.
    pub fn to_dense(&self) -> Vec<C64> {
        let mut acc: Vec<C64> = vec![C64::new(1.0, 0.0)];
        let mut prefix = 1usize;
        let mut chi = 1usize;
        for t in &self.tensors {
            // acc (prefix x chi) * A (chi x (p r)) -> (prefix, p, r)
            let res = mm(&acc, prefix, chi, Op::N, &t.data, t.l, t.p * t.r, Op::N);
            // want (p fast digit inside new prefix): permute (prefix, p, r) -> (p, prefix, r)
            let perm = permute(&res, &[prefix, t.p, t.r], &[1, 0, 2]);
            acc = perm;
            prefix *= t.p;
            chi = t.r;
        }
        // acc is (p_L ... p_1) fast-to-slow? After the loop acc has shape
        // (prefix, 1) with digit order: latest site fastest — which is exactly
        // "site 1 slowest".
        acc
    }

    /// `<psi| op_i |psi> / <psi|psi>` for a single-site operator.
    pub fn expect_local(&self, op: &[C64], site: usize) -> Result<C64, MpsError> {
        self.check_site(site)?;
        if op.len() != self.phys * self.phys {
            return Err(MpsError::GateDimMismatch { got: op.len(), want: self.phys * self.phys });
        }
        let vals = self.expect_local_all(op);
        Ok(vals[site - 1])
    }

    /// `<op_i>` for every site in one pass (normalized).
    pub fn expect_local_all(&self, op: &[C64]) -> Vec<C64> {
        let l = self.len();
        let d = self.phys;
        assert_eq!(op.len(), d * d);
        // right environments: rights[k] closes sites k..L (0-based k)
        let mut rights: Vec<Vec<C64>> = vec![Vec::new(); l + 1];
        rights[l] = vec![C64::new(1.0, 0.0)];
        for k in (0..l).rev() {
            let t = &self.tensors[k];
            rights[k] = transfer_identity_right(&rights[k + 1], t);
        }
        let norm = rights[0][0].re;
        let mut out = Vec::with_capacity(l);
        let mut left = vec![C64::new(1.0, 0.0)];
        let mut ldim = 1usize;
        for k in 0..l {
            let t = &self.tensors[k];
            let with_op = transfer_op(&left, ldim, t, op);
            let val: C64 = dot_trace(&with_op, &rights[k + 1]);
            out.push(val / norm);
            left = transfer_identity(&left, ldim, t);
            ldim = t.r;
        }
        out
    }

    /// Raw string correlator `<psi| A_i (Prod_{k=i+1}^{j-1} B_k) C_j |psi>`
    /// (no normalization, no truncation).
    pub fn string_correlator(
        &self,
        left_op: &[C64],
        interior_op: &[C64],
        right_op: &[C64],
        i: usize,
        j: usize,
    ) -> Result<C64, MpsError> {
        self.check_site(i)?;
        self.check_site(j)?;
        if i >= j {
            return Err(MpsError::BadStringSites(i, j));
        }
        let d2 = self.phys * self.phys;
        for op in [left_op, interior_op, right_op] {
            if op.len() != d2 {
                return Err(MpsError::GateDimMismatch { got: op.len(), want: d2 });
            }
        }
        let (i0, j0) = (i - 1, j - 1);
        let mut env = vec![C64::new(1.0, 0.0)];
        let mut dim = 1usize;
        for k in 0..i0 {
            env = transfer_identity(&env, dim, &self.tensors[k]);
            dim = self.tensors[k].r;
        }
        env = transfer_op(&env, dim, &self.tensors[i0], left_op);
        dim = self.tensors[i0].r;
        for k in (i0 + 1)..j0 {
            env = transfer_op(&env, dim, &self.tensors[k], interior_op);
            dim = self.tensors[k].r;
        }
        env = transfer_op(&env, dim, &self.tensors[j0], right_op);
        dim = self.tensors[j0].r;
        for k in (j0 + 1)..self.len() {
            env = transfer_identity(&env, dim, &self.tensors[k]);
            dim = self.tensors[k].r;
        }
        Ok(env[0])
    }

    /// The four string correlators of the order-parameter decomposition plus
    /// the plain `<n_i n_j>` moment, sharing transfer passes. Raw values.
    pub(crate) fn two_point_set(
        &self,
        site_op: &[C64],
        interior_op: &[C64],
        i: usize,
        j: usize,
    ) -> TwoPointSet {
        debug_assert!(i >= 1 && i < j && j <= self.len());
        let (i0, j0) = (i - 1, j - 1);
        let l = self.len();
        // right environment closing sites j+1..L
        let mut right = vec![C64::new(1.0, 0.0)];
        for k in (j0 + 1..l).rev() {
            right = transfer_identity_right(&right, &self.tensors[k]);
        }
        // left boundary to bond i-1
        let mut base = vec![C64::new(1.0, 0.0)];
        let mut dim = 1usize;
        for k in 0..i0 {
            base = transfer_identity(&base, dim, &self.tensors[k]);
            dim = self.tensors[k].r;
        }
        let t_i = &self.tensors[i0];
        let mut e_id = transfer_identity(&base, dim, t_i); // 1 at i
        let mut e_op = transfer_op(&base, dim, t_i, site_op); // n at i
        let mut e_op_plain = e_op.clone(); // n at i, identity interior
        dim = t_i.r;
        for k in (i0 + 1)..j0 {
            let t = &self.tensors[k];
            e_id = transfer_op(&e_id, dim, t, interior_op);
            e_op = transfer_op(&e_op, dim, t, interior_op);
            e_op_plain = transfer_identity(&e_op_plain, dim, t);
            dim = t.r;
        }
        let t_j = &self.tensors[j0];
        let close_op = |env: &Vec<C64>| -> C64 {
            let e = transfer_op(env, dim, t_j, site_op);
            dot_trace(&e, &right)
        };
        let close_id = |env: &Vec<C64>| -> C64 {
            let e = transfer_identity(env, dim, t_j);
            dot_trace(&e, &right)
        };
        TwoPointSet {
            g_nn: close_op(&e_op),
            g_n1: close_id(&e_op),
            g_1n: close_op(&e_id),
            g_11: close_id(&e_id),
            nn: close_op(&e_op_plain),
        }
    }

    /// Apply a single-site operator in place (no truncation). The operator is
    /// `d x d`, column-major.
    pub fn apply_single_site(&mut self, op: &[C64], site: usize) -> Result<(), MpsError> {
        self.check_site(site)?;
        let d = self.phys;
        if op.len() != d * d {
            return Err(MpsError::GateDimMismatch { got: op.len(), want: d * d });
        }
        let keep_center = self.center;
        let t = &self.tensors[site - 1];
        let (l, r) = (t.l, t.r);
        // B[l,q,r] = sum_p op[q,p] A[l,p,r]: permute to (p, l, r), gemm, permute back
        let perm = permute(&t.data, &[l, d, r], &[1, 0, 2]);
        let res = mm(op, d, d, Op::N, &perm, d, l * r, Op::N);
        let back = permute(&res, &[d, l, r], &[1, 0, 2]);
        self.tensors[site - 1] = SiteTensor { l, p: d, r, data: back };
        // an operator application at the center keeps the canonical structure
        self.center = match keep_center {
            Some(c) if c == site - 1 => Some(c),
            _ => None,
        };
        Ok(())
    }

    /// Apply a two-site gate on `(site, site+1)` and truncate per `policy`,
    /// leaving the center on the right site. The gate is `d^2 x d^2`,
    /// column-major, with the pair index `p_site * d + p_site1` (site digit
    /// slow) on both rows and columns — the same convention as a dense
    /// operator on the two sites.
    pub fn apply_two_site_gate(
        &mut self,
        gate: &[C64],
        site: usize,
        policy: &CompressionPolicy,
    ) -> Result<(), MpsError> {
        self.apply_two_site_gate_side(gate, site, policy, CenterSide::Right)
    }

    pub(crate) fn apply_two_site_gate_side(
        &mut self,
        gate: &[C64],
        site: usize,
        policy: &CompressionPolicy,
        side: CenterSide,
    ) -> Result<(), MpsError> {
        self.check_site(site)?;
        self.check_site(site + 1)?;
        let d = self.phys;
        if gate.len() != d * d * d * d {
            return Err(MpsError::GateDimMismatch { got: gate.len(), want: d * d * d * d });
        }
        let k = site - 1;
        match self.center {
            Some(c) if c == k || c == k + 1 => {}
            Some(_) => self.shift_center_to(k),
            None => self.canonicalize(site),
        }
        let (t1, t2) = (&self.tensors[k], &self.tensors[k + 1]);
        let (l, r, m) = (t1.l, t2.r, t1.r);
        // theta (l, p1, p2, r)
        let theta = mm(&t1.data, l * d, m, Op::N, &t2.data, m, d * r, Op::N);
        // gate pair index has p2 fast: bring theta to (p2, p1, l, r)
        let tperm = permute(&theta, &[l, d, d, r], &[2, 1, 0, 3]);
        let gt = mm(gate, d * d, d * d, Op::N, &tperm, d * d, l * r, Op::N);
        let back = permute(&gt, &[d, d, l, r], &[2, 1, 0, 3]);
        let split = split_matrix(&back, l * d, d * r, policy, side);
        self.trunc_log.push(split.discarded);
        self.tensors[k] = SiteTensor { l, p: d, r: split.kept, data: split.left };
        self.tensors[k + 1] = SiteTensor { l: split.kept, p: d, r, data: split.right };
        self.center = Some(match side {
            CenterSide::Left => k,
            CenterSide::Right => k + 1,
        });
        Ok(())
    }

    /// Frobenius distance of site `i` from exact left (`side = Left`) or right
    /// isometry; diagnostic for tests.
    pub fn isometry_defect(&self, site: usize, left: bool) -> f64 {
        let t = self.site(site);
        let (l, p, r) = (t.l, t.p, t.r);
        let g = if left {
            mm(&t.data, l * p, r, Op::H, &t.data, l * p, r, Op::N)
        } else {
            // A viewed (l x p r): G = A A^H
            mm(&t.data, l, p * r, Op::N, &t.data, l, p * r, Op::H)
        };
        let n = if left { r } else { l };
        let id = identity(n);
        g.iter().zip(&id).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt()
    }

    /// Build an MPS from a dense statevector (site 1 slowest) by successive
    /// truncated splits. Intended for oracle-scale states.
    pub fn from_dense(state: &[C64], sites: usize, phys: usize, policy: &CompressionPolicy) -> Self {
        let dim = phys.pow(sites as u32);
        assert_eq!(state.len(), dim);
        let mut tensors = Vec::with_capacity(sites);
        let mut trunc_log = Vec::new();
        // reorder once so the site-1 digit is fastest, then peel sites off the
        // fast end with truncated splits
        let mut perm_state = vec![C64::new(0.0, 0.0); dim];
        for idx in 0..dim {
            let mut rev = 0usize;
            let mut tmp = idx;
            for _ in 0..sites {
                rev = rev * phys + (tmp % phys);
                tmp /= phys;
            }
            perm_state[rev] = state[idx];
        }
        // now digit of site 1 is fastest: repeatedly split off the fastest digit
        let mut rest = perm_state;
        let mut chi = 1usize;
        for _ in 0..sites - 1 {
            let cols = rest.len() / (chi * phys);
            let split = split_matrix(&rest, chi * phys, cols, policy, CenterSide::Right);
            tensors.push(SiteTensor { l: chi, p: phys, r: split.kept, data: split.left });
            trunc_log.push(split.discarded);
            chi = split.kept;
            rest = split.right;
        }
        tensors.push(SiteTensor { l: chi, p: phys, r: 1, data: rest });
        Self { phys, tensors, center: Some(sites - 1), trunc_log }
    }

    /// Serialize to the checkpoint format: magic, format version, endianness
    /// tag, `L`, `d`, per-bond dimensions, center, truncation log, then raw
    /// little-endian complex tensor data.
    pub fn save<P: AsRef<Path>>(&self, path: P) -> Result<(), MpsError> {
        let mut w = BufWriter::new(File::create(path)?);
        w.write_all(MAGIC)?;
        w.write_all(&[FORMAT_VERSION, ENDIAN_LITTLE])?;
        w.write_all(&(self.len() as u32).to_le_bytes())?;
        w.write_all(&(self.phys as u32).to_le_bytes())?;
        let center = self.center.map(|c| c as i64 + 1).unwrap_or(0);
        w.write_all(&center.to_le_bytes())?;
        for dim in self.bond_dims() {
            w.write_all(&(dim as u32).to_le_bytes())?;
        }
        w.write_all(&(self.trunc_log.len() as u64).to_le_bytes())?;
        for v in &self.trunc_log {
            w.write_all(&v.to_le_bytes())?;
        }
        for t in &self.tensors {
            for z in &t.data {
                w.write_all(&z.re.to_le_bytes())?;
                w.write_all(&z.im.to_le_bytes())?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn load<P: AsRef<Path>>(path: P) -> Result<Self, MpsError> {
        let mut r = BufReader::new(File::open(path)?);
        let mut magic = [0u8; 6];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(MpsError::CorruptCheckpoint("bad magic".into()));
        }
        let mut hdr = [0u8; 2];
        r.read_exact(&mut hdr)?;
        if hdr[0] != FORMAT_VERSION {
            return Err(MpsError::CorruptCheckpoint(format!("unsupported version {}", hdr[0])));
        }
        if hdr[1] != ENDIAN_LITTLE {
            return Err(MpsError::CorruptCheckpoint("unsupported endianness".into()));
        }
        let sites = read_u32(&mut r)? as usize;
        let phys = read_u32(&mut r)? as usize;
        if sites == 0 || phys < 2 || sites > 1 << 20 {
            return Err(MpsError::CorruptCheckpoint("implausible dimensions".into()));
        }
        let center = {
            let mut b = [0u8; 8];
            r.read_exact(&mut b)?;
            let c = i64::from_le_bytes(b);
            if c == 0 {
                None
            } else if c >= 1 && (c as usize) <= sites {
                Some(c as usize - 1)
            } else {
                return Err(MpsError::CorruptCheckpoint("center out of range".into()));
            }
        };
        let mut bonds = Vec::with_capacity(sites + 1);
        for _ in 0..=sites {
            bonds.push(read_u32(&mut r)? as usize);
        }
        if bonds[0] != 1 || bonds[sites] != 1 || bonds.iter().any(|&b| b == 0) {
            return Err(MpsError::CorruptCheckpoint("invalid bond dimensions".into()));
        }
        let tl_len = {
            let mut b = [0u8; 8];
            r.read_exact(&mut b)?;
            u64::from_le_bytes(b) as usize
        };
        if tl_len > 1 << 30 {
            return Err(MpsError::CorruptCheckpoint("implausible log length".into()));
        }
        let mut trunc_log = Vec::with_capacity(tl_len);
        for _ in 0..tl_len {
            let mut b = [0u8; 8];
            r.read_exact(&mut b)?;
            trunc_log.push(f64::from_le_bytes(b));
        }
        let mut tensors = Vec::with_capacity(sites);
        for k in 0..sites {
            let (l, rr) = (bonds[k], bonds[k + 1]);
            let mut data = Vec::with_capacity(l * phys * rr);
            for _ in 0..l * phys * rr {
                let mut b = [0u8; 16];
                r.read_exact(&mut b)?;
                let re = f64::from_le_bytes(b[0..8].try_into().unwrap());
                let im = f64::from_le_bytes(b[8..16].try_into().unwrap());
                if !re.is_finite() || !im.is_finite() {
                    return Err(MpsError::CorruptCheckpoint("non-finite tensor entry".into()));
                }
                data.push(C64::new(re, im));
            }
            tensors.push(SiteTensor { l, p: phys, r: rr, data });
        }
        let mut trailing = [0u8; 1];
        if r.read(&mut trailing)? != 0 {
            return Err(MpsError::CorruptCheckpoint("trailing bytes".into()));
        }
        Ok(Self { phys, tensors, center, trunc_log })
    }
}

const MAGIC: &[u8; 6] = b"EBHMPS";
const FORMAT_VERSION: u8 = 1;
const ENDIAN_LITTLE: u8 = 1;

fn read_u32<R: Read>(r: &mut R) -> Result<u32, std::io::Error> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

/// Extract the `l x r` physical slice starting at `offset` with column stride.
fn strided_copy(data: &[C64], offset: usize, l: usize, r: usize, col_stride: usize) -> Vec<C64> {
    let mut out = Vec::with_capacity(l * r);
    for c in 0..r {
        let base = offset + c * col_stride;
        out.extend_from_slice(&data[base..base + l]);
    }
    out
}

/// `env' = sum_p A[p]^H env A[p]` (bra index rows, ket index cols).
fn transfer_identity(env: &[C64], dim: usize, t: &SiteTensor) -> Vec<C64> {
    let mut next = vec![C64::new(0.0, 0.0); t.r * t.r];
    for p in 0..t.p {
        let ap = strided_copy(&t.data, p * t.l, t.l, t.r, t.l * t.p);
        let tmp = mm(env, dim, dim, Op::N, &ap, t.l, t.r, Op::N);
        let upd = mm(&ap, t.l, t.r, Op::H, &tmp, t.l, t.r, Op::N);
        for (x, y) in next.iter_mut().zip(upd) {
            *x += y;
        }
    }
    next
}

/// Right-moving variant: `env' = sum_p A[p] env A[p]^H`.
fn transfer_identity_right(env: &[C64], t: &SiteTensor) -> Vec<C64> {
    let mut next = vec![C64::new(0.0, 0.0); t.l * t.l];
    for p in 0..t.p {
        let ap = strided_copy(&t.data, p * t.l, t.l, t.r, t.l * t.p);
        let tmp = mm(&ap, t.l, t.r, Op::N, env, t.r, t.r, Op::N);
        let upd = mm(&tmp, t.l, t.r, Op::N, &ap, t.l, t.r, Op::H);
        for (x, y) in next.iter_mut().zip(upd) {
            *x += y;
        }
    }
    next
}

/// `env' = sum_{q,p} O[q,p] A[q]^H env A[p]`.
fn transfer_op(env: &[C64], dim: usize, t: &SiteTensor, op: &[C64]) -> Vec<C64> {
    let mut next = vec![C64::new(0.0, 0.0); t.r * t.r];
    for p in 0..t.p {
        let ap = strided_copy(&t.data, p * t.l, t.l, t.r, t.l * t.p);
        let tmp = mm(env, dim, dim, Op::N, &ap, t.l, t.r, Op::N);
        for q in 0..t.p {
            let w = op[q + p * t.p];
            if w == C64::new(0.0, 0.0) {
                continue;
            }
            let aq = strided_copy(&t.data, q * t.l, t.l, t.r, t.l * t.p);
            let upd = mm(&aq, t.l, t.r, Op::H, &tmp, t.l, t.r, Op::N);
            for (x, y) in next.iter_mut().zip(upd) {
                *x += w * y;
            }
        }
    }
    next
}

/// `sum_{a,b} env[a,b] * right[a,b]` — close a left environment against a
/// right one.
fn dot_trace(env: &[C64], right: &[C64]) -> C64 {
    debug_assert_eq!(env.len(), right.len());
    // left env is (bra, ket); right env is (ket, bra); close with a trace
    let n = (env.len() as f64).sqrt() as usize;
    let mut acc = C64::new(0.0, 0.0);
    for a in 0..n {
        for b in 0..n {
            acc += env[a + b * n] * right[b + a * n];
        }
    }
    acc
}

/// Raw two-point bundle used by the observables module.
#[derive(Debug, Clone, Copy)]
pub struct TwoPointSet {
    pub g_nn: C64,
    pub g_n1: C64,
    pub g_1n: C64,
    pub g_11: C64,
    pub nn: C64,
}

/// One matrix-product-operator site tensor, `(wl, p_out, p_in, wr)`
/// column-major with `wl` fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct MpoTensor {
    pub wl: usize,
    pub wr: usize,
    pub phys: usize,
    pub data: Vec<C64>,
}

/// Matrix product operator with trivial boundary bonds.
#[derive(Debug, Clone, PartialEq)]
pub struct Mpo {
    pub phys: usize,
    pub tensors: Vec<MpoTensor>,
}

impl Mpo {
    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    pub fn max_bond(&self) -> usize {
        self.tensors.iter().map(|t| t.wl.max(t.wr)).max().unwrap_or(1)
    }

    /// Add `coeff * op` (a `d x d` single-site operator) to the on-site block
    /// at `site`; used for edge pinning.
    pub fn add_onsite(&mut self, site: usize, op: &[C64], coeff: f64) {
        let l = self.len();
        assert!(site >= 1 && site <= l);
        let t = &mut self.tensors[site - 1];
        let d = t.phys;
        assert_eq!(op.len(), d * d);
        // on-site block row = "initial" (last unless leftmost), col = "finished" (0)
        let row = if site == 1 { 0 } else { t.wl - 1 };
        let col = 0;
        for po in 0..d {
            for pi in 0..d {
                t.data[row + t.wl * (po + d * (pi + d * col))] += C64::new(coeff, 0.0) * op[po + pi * d];
            }
        }
    }

    /// Dense matrix of the operator (site 1 slowest). Exponential in `L`.
    pub fn to_dense(&self) -> Vec<C64> {
        let d = self.phys;
        let l = self.len();
        let dim = d.pow(l as u32);
        // running tensor (w, out_prefix, in_prefix)
        let mut acc = vec![C64::new(1.0, 0.0)];
        let mut wdim = 1usize;
        let mut pdim = 1usize;
        for t in &self.tensors {
            let mut next = vec![C64::new(0.0, 0.0); t.wr * (pdim * d) * (pdim * d)];
            for wo in 0..t.wr {
                for po in 0..d {
                    for pi in 0..d {
                        for wi in 0..wdim {
                            let wv = t.data[wi + t.wl * (po + d * (pi + d * wo))];
                            if wv == C64::new(0.0, 0.0) {
                                continue;
                            }
                            for o in 0..pdim {
                                for ii in 0..pdim {
                                    let src = acc[wi + wdim * (o + pdim * ii)];
                                    if src == C64::new(0.0, 0.0) {
                                        continue;
                                    }
                                    let no = o * d + po;
                                    let ni = ii * d + pi;
                                    next[wo + t.wr * (no + pdim * d * ni)] += wv * src;
                                }
                            }
                        }
                    }
                }
            }
            acc = next;
            wdim = t.wr;
            pdim *= d;
        }
        debug_assert_eq!(pdim, dim);
        // drop the trivial bond index; reorder (row=out, col=in)
        let mut out = vec![C64::new(0.0, 0.0); dim * dim];
        for o in 0..dim {
            for i in 0..dim {
                out[o + i * dim] = acc[o + dim * i];
            }
        }
        out
    }

    /// `<psi| H |psi> / <psi|psi>`.
    pub fn expectation(&self, state: &Mps) -> C64 {
        assert_eq!(self.len(), state.len());
        assert_eq!(self.phys, state.phys_dim());
        // env (a_bra, w, b_ket), a fastest
        let mut env = vec![C64::new(1.0, 0.0)];
        let mut dims = (1usize, 1usize, 1usize);
        for (wt, at) in self.tensors.iter().zip(&state.tensors) {
            env = mpo_env_step(&env, dims, wt, at, at);
            dims = (at.r, wt.wr, at.r);
        }
        let val = env[0];
        let n2 = state.norm_sq();
        val / C64::new(n2, 0.0)
    }

    pub fn bond_dims(&self) -> Vec<usize> {
        let mut v = vec![1];
        for t in &self.tensors {
            v.push(t.wr);
        }
        v
    }
}

/// One step of the MPO environment recursion:
/// `env'[a', w', b'] = sum conj(Abra[a,q,a']) W[w,q,p,w'] Aket[b,p,b'] env[a,w,b]`.
pub(crate) fn mpo_env_step(
    env: &[C64],
    dims: (usize, usize, usize),
    wt: &MpoTensor,
    abra: &SiteTensor,
    aket: &SiteTensor,
) -> Vec<C64> {
    let (da, dw, db) = dims;
    let d = wt.phys;
    debug_assert_eq!(env.len(), da * dw * db);
    // F1[(a,w), (p,b')] = sum_b env[(a,w),b] Aket[b,(p,b')]
    let f1 = mm(env, da * dw, db, Op::N, &aket.data, aket.l, d * aket.r, Op::N);
    // want F2[(a,b'),(q,w')] = sum_{w,p} F1[a,w,p,b'] W[w,q,p,w']
    // permute F1 (a,w,p,b') -> (a,b',w,p)
    let f1p = permute(&f1, &[da, dw, d, aket.r], &[0, 3, 1, 2]);
    // permute W (w,q,p,w') -> (w,p,q,w')
    let wp = permute(&wt.data, &[wt.wl, d, d, wt.wr], &[0, 2, 1, 3]);
    let f2 = mm(&f1p, da * aket.r, dw * d, Op::N, &wp, wt.wl * d, d * wt.wr, Op::N);
    // F2 dims (a, b', q, w'); contract with conj(Abra[a,q,a']) over (a,q)
    let f2p = permute(&f2, &[da, aket.r, d, wt.wr], &[0, 2, 1, 3]);
    // (a,q,b',w') viewed ((a q), (b' w')); Abra viewed ((a q), a')
    let f3 = mm(&abra.data, abra.l * d, abra.r, Op::H, &f2p, da * d, aket.r * wt.wr, Op::N);
    // f3 dims (a', b', w') -> (a', w', b')
    permute(&f3, &[abra.r, aket.r, wt.wr], &[0, 2, 1])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{annihilation, number};
    use crate::tensor::kron;

    fn n_op(d: usize) -> Vec<C64> {
        number(d)
    }

    #[test]
    fn product_state_basics() {
        let vac = Mps::vacuum(4, 3);
        let n = n_op(3);
        for i in 1..=4 {
            assert_eq!(vac.expect_local(&n, i).unwrap(), C64::new(0.0, 0.0));
        }
        let mott = Mps::product_state(4, 3, &[1, 1, 1, 1]).unwrap();
        for i in 1..=4 {
            assert!((mott.expect_local(&n, i).unwrap().re - 1.0).abs() < 1e-14);
        }
        let dw = Mps::product_state(4, 3, &[2, 0, 2, 0]).unwrap();
        let want = [2.0, 0.0, 2.0, 0.0];
        for i in 1..=4 {
            assert!((dw.expect_local(&n, i).unwrap().re - want[i - 1]).abs() < 1e-14);
        }
        assert!(matches!(
            Mps::product_state(2, 3, &[0, 3]),
            Err(MpsError::OccupationOutOfRange { site: 2, occ: 3, max: 2 })
        ));
        assert_eq!(dw.bond_dims(), vec![1, 1, 1, 1, 1]);
    }

    #[test]
    fn canonicalize_is_idempotent_and_gauge_invariant() {
        let mps = Mps::random(6, 3, 8, 42);
        let dense0 = mps.to_dense();
        let mut a = mps.clone();
        a.canonicalize(3);
        let mut b = a.clone();
        b.canonicalize(3);
        for (x, y) in a.site(3).data.iter().zip(&b.site(3).data) {
            assert!((x - y).norm() < 1e-13);
        }
        // overlap with original is 1
        let ov = a.overlap(&mps);
        assert!((ov.norm() - 1.0).abs() < 1e-12);
        // dense vector unchanged
        for (x, y) in a.to_dense().iter().zip(&dense0) {
            assert!((x - y).norm() < 1e-12);
        }
        // isometry structure
        for s in 1..3 {
            assert!(a.isometry_defect(s, true) < 1e-10);
        }
        for s in 4..=6 {
            assert!(a.isometry_defect(s, false) < 1e-10);
        }
        // product state stays chi = 1
        let mut prod = Mps::product_state(5, 3, &[0, 1, 2, 1, 0]).unwrap();
        prod.canonicalize(4);
        assert_eq!(prod.bond_dims(), vec![1; 6]);
    }

    #[test]
    fn identity_gate_is_a_no_op() {
        let mut mps = Mps::random(4, 3, 6, 7);
        let before = mps.to_dense();
        let id2 = identity(9);
        mps.apply_two_site_gate(&id2, 2, &CompressionPolicy::exact()).unwrap();
        let after = mps.to_dense();
        for (x, y) in before.iter().zip(&after) {
            assert!((x - y).norm() < 1e-12);
        }
        assert!(mps.trunc_log.iter().sum::<f64>() < 1e-24);
    }

    #[test]
    fn swap_like_gate_moves_occupation() {
        // swap on (1,2): |1,0> -> |0,1>
        let d = 2usize;
        let mut swap = vec![C64::new(0.0, 0.0); 16];
        for p1 in 0..d {
            for p2 in 0..d {
                let row = p2 * d + p1; // swapped
                let col = p1 * d + p2;
                swap[row + col * 4] = C64::new(1.0, 0.0);
            }
        }
        let mut mps = Mps::product_state(2, 2, &[1, 0]).unwrap();
        mps.apply_two_site_gate(&swap, 1, &CompressionPolicy::exact()).unwrap();
        let n = n_op(2);
        assert!((mps.expect_local(&n, 1).unwrap().re - 0.0).abs() < 1e-13);
        assert!((mps.expect_local(&n, 2).unwrap().re - 1.0).abs() < 1e-13);
    }

    #[test]
    fn gate_matches_dense_application() {
        // random two-site hermitian-generated unitary on L=4, no truncation
        let d = 3usize;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut h = vec![C64::new(0.0, 0.0); 81];
        for i in 0..9 {
            for j in 0..=i {
                let z = C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
                h[i + j * 9] = z;
                h[j + i * 9] = z.conj();
            }
        }
        let gate = crate::linalg::expm_hermitian(&h, 9, C64::new(0.0, -0.7));
        let mps0 = Mps::random(4, d, 16, 11);
        let dense0 = mps0.to_dense();
        for site in 1..=3 {
            let mut mps = mps0.clone();
            mps.apply_two_site_gate(&gate, site, &CompressionPolicy::exact()).unwrap();
            let got = mps.to_dense();
            let want = crate::oracle::apply_two_site_gate_dense(&dense0, &gate, site, 4, d);
            for (x, y) in got.iter().zip(&want) {
                assert!((x - y).norm() < 1e-12, "site {site}");
            }
        }
    }

    #[test]
    fn expectation_matches_dense() {
        let d = 3usize;
        let mps = Mps::random(5, d, 9, 3);
        let dense = mps.to_dense();
        let n = n_op(d);
        let dim = dense.len();
        for site in 1..=5 {
            let got = mps.expect_local(&n, site).unwrap();
            // dense expectation
            let mut op = vec![C64::new(1.0, 0.0)];
            let mut rows = 1usize;
            let id = identity(d);
            for s in 1..=5 {
                let f = if s == site { &n } else { &id };
                op = kron(&op, rows, rows, f, d, d);
                rows *= d;
            }
            let mut acc = C64::new(0.0, 0.0);
            for r in 0..dim {
                for c in 0..dim {
                    acc += dense[r].conj() * op[r + c * dim] * dense[c];
                }
            }
            assert!((got - acc).norm() < 1e-12);
        }
    }

    #[test]
    fn string_correlator_cases() {
        let d = 3usize;
        let n = n_op(d);
        let id = identity(d);
        // B = identity, A = C = n on |1111> -> <n_1 n_4> = 1
        let mott = Mps::product_state(4, d, &[1, 1, 1, 1]).unwrap();
        let v = mott.string_correlator(&n, &id, &n, 1, 4).unwrap();
        assert!((v - C64::new(1.0, 0.0)).norm() < 1e-13);
        // A=C=n, B=exp(i pi n): phases cancel on the Mott state
        let mut phase = vec![C64::new(0.0, 0.0); d * d];
        for k in 0..d {
            phase[k + k * d] = C64::new(0.0, std::f64::consts::PI * k as f64).exp();
        }
        let v = mott.string_correlator(&n, &phase, &n, 1, 4).unwrap();
        assert!((v - C64::new(1.0, 0.0)).norm() < 1e-12);
        // errors
        assert!(matches!(mott.string_correlator(&n, &id, &n, 3, 3), Err(MpsError::BadStringSites(3, 3))));
        // random state vs dense evaluation
        let mps = Mps::random(6, d, 8, 19);
        let dense = mps.to_dense();
        let dim = dense.len();
        let (i, j) = (2usize, 5usize);
        let mut op = vec![C64::new(1.0, 0.0)];
        let mut rows = 1usize;
        for s in 1..=6 {
            let f: &[C64] = if s == i || s == j {
                &n
            } else if s > i && s < j {
                &phase
            } else {
                &id
            };
            op = kron(&op, rows, rows, f, d, d);
            rows *= d;
        }
        let mut want = C64::new(0.0, 0.0);
        for r in 0..dim {
            for c in 0..dim {
                want += dense[r].conj() * op[r + c * dim] * dense[c];
            }
        }
        let got = mps.string_correlator(&n, &phase, &n, i, j).unwrap();
        assert!((got - want).norm() < 1e-12);
        // the bundled set agrees with individual calls
        let set = mps.two_point_set(&n, &phase, i, j);
        assert!((set.g_nn - got).norm() < 1e-12);
        let g11 = mps.string_correlator(&id, &phase, &id, i, j).unwrap();
        assert!((set.g_11 - g11).norm() < 1e-12);
        let nn = mps.string_correlator(&n, &id, &n, i, j).unwrap();
        assert!((set.nn - nn).norm() < 1e-12);
    }

    #[test]
    fn lowering_operator_on_two_photons() {
        // apply a at a site holding |2>: sqrt(2)|1>
        let mut mps = Mps::product_state(2, 3, &[2, 0]).unwrap();
        mps.apply_single_site(&annihilation(3), 1).unwrap();
        let n2 = mps.norm_sq();
        assert!((n2 - 2.0).abs() < 1e-13);
        let n = n_op(3);
        assert!((mps.expect_local(&n, 1).unwrap().re - 1.0).abs() < 1e-13);
    }

    #[test]
    fn checkpoint_roundtrip_and_corruption() {
        let dir = std::env::temp_dir().join("ebhsim_mps_io_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("state.mps");
        let mut mps = Mps::random(5, 4, 7, 23);
        mps.trunc_log.push(1.5e-12);
        mps.save(&path).unwrap();
        let back = Mps::load(&path).unwrap();
        assert_eq!(back.len(), 5);
        assert_eq!(back.phys_dim(), 4);
        assert_eq!(back.trunc_log, mps.trunc_log);
        let ov = back.overlap(&mps);
        assert!((ov.norm() - 1.0).abs() < 1e-12);
        // truncated file is rejected
        let bytes = std::fs::read(&path).unwrap();
        let cut = dir.join("cut.mps");
        std::fs::write(&cut, &bytes[..bytes.len() - 9]).unwrap();
        assert!(Mps::load(&cut).is_err());
        // magic corruption is rejected
        let mut bad = bytes.clone();
        bad[0] ^= 0xff;
        let badp = dir.join("bad.mps");
        std::fs::write(&badp, &bad).unwrap();
        assert!(matches!(Mps::load(&badp), Err(MpsError::CorruptCheckpoint(_))));
    }

    #[test]
    fn mpo_dense_of_decoupled_chain() {
        // L=2, all couplings zero, mu=1 -> contraction equals -n_1 - n_2
        let mut p = crate::model::ModelParams::rotating(2, 3, 1.0);
        p.hopping = 0.0;
        let mpo = crate::model::build_mpo(&p).unwrap();
        let dense = mpo.to_dense();
        let d = 3usize;
        for a in 0..9 {
            for b in 0..9 {
                let want = if a == b {
                    C64::new(-(((a / d) + (a % d)) as f64), 0.0)
                } else {
                    C64::new(0.0, 0.0)
                };
                assert!((dense[a + b * 9] - want).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn mpo_expectation_agrees_with_dense() {
        let mut p = crate::model::ModelParams::rotating(4, 3, 1.3);
        p.onsite_u = 5.0;
        p.cross_v = 3.3;
        p.drive_amp = 0.2;
        p.drive_kind = crate::model::DriveKind::Parametric;
        let mpo = crate::model::build_mpo(&p).unwrap();
        let mps = Mps::random(4, 3, 9, 77);
        let got = mpo.expectation(&mps);
        let h = mpo.to_dense();
        let psi = mps.to_dense();
        let dim = psi.len();
        let mut num = C64::new(0.0, 0.0);
        let mut den = C64::new(0.0, 0.0);
        for r in 0..dim {
            den += psi[r].conj() * psi[r];
            for c in 0..dim {
                num += psi[r].conj() * h[r + c * dim] * psi[c];
            }
        }
        assert!((got - num / den).norm() < 1e-11);
    }
}
