//! Order parameters of the lattice: filling, string order (SO), and
//! density-wave order (DWO), plus the finite-size site-pair convention.
//!
//! Both orders are built from number fluctuations `dn_i = n_i - nbar`. The
//! string correlator factorizes into four raw correlators with the phase
//! string `P = exp(i pi sum_{k=i+1}^{j-1} n_k)`:
//!
//! `<dn_i e^{i pi sum dn_k} dn_j> = e^{-i pi nbar (j-i-1)} (g_nn - nbar g_n1 - nbar g_1n + nbar^2 g_11)`
//!
//! which keeps the assembled SO linear in the density matrix when the raw
//! correlators are ensemble-averaged first and `nbar` is the ensemble filling.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::number;
use crate::mps::{Mps, MpsError};

#[derive(Debug, Error, PartialEq)]
pub enum ObservablesError {
    #[error("string sites need 1 <= i < j <= L, got ({0}, {1})")]
    BadSitePair(usize, usize),
    #[error("the quarter-offset pair convention needs at least 8 sites, got {0}")]
    ChainTooShort(usize),
}

/// Raw string correlators at a fixed site pair, all with the interior phase
/// string `P = exp(i pi sum_{k in (i,j)} n_k)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RawStringSet {
    /// `<n_i P n_j>`
    pub g_nn: C64,
    /// `<n_i P>`
    pub g_n1: C64,
    /// `<P n_j>`
    pub g_1n: C64,
    /// `<P>`
    pub g_11: C64,
}

/// Plain density moments at the same pair, for the density-wave order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityMoments {
    /// `<n_i>`
    pub n_i: f64,
    /// `<n_j>`
    pub n_j: f64,
    /// `<n_i n_j>`
    pub nn: f64,
}

/// Assembled order parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderParams {
    pub so: f64,
    pub dwo: f64,
    pub filling: f64,
    pub site_pair: (usize, usize),
}

/// Mean photon number per site of a normalized state.
pub fn filling(state: &Mps) -> f64 {
    let n = number(state.phys_dim());
    let vals = state.expect_local_all(&n);
    vals.iter().map(|v| v.re).sum::<f64>() / state.len() as f64
}

/// The diagonal `exp(i pi n)` matrix on one site.
pub fn phase_string_op(d: usize) -> Vec<C64> {
    let mut m = vec![C64::new(0.0, 0.0); d * d];
    for k in 0..d {
        m[k + k * d] = C64::new(0.0, std::f64::consts::PI * k as f64).exp();
    }
    m
}

/// Raw string correlators of a normalized pure state at `(i, j)`.
pub fn raw_strings(state: &Mps, i: usize, j: usize) -> Result<RawStringSet, ObservablesError> {
    let (set, _) = measure_pair(state, i, j)?;
    Ok(set)
}

/// Raw strings plus density moments in one pass (normalized state).
pub fn measure_pair(
    state: &Mps,
    i: usize,
    j: usize,
) -> Result<(RawStringSet, DensityMoments), ObservablesError> {
    if i < 1 || j > state.len() || i >= j {
        return Err(ObservablesError::BadSitePair(i, j));
    }
    let d = state.phys_dim();
    let set = state.two_point_set(&number(d), &phase_string_op(d), i, j);
    let norm = state.norm_sq();
    let n = number(d);
    let n_i = state.expect_local(&n, i).map_err(|e| match e {
        MpsError::SiteOutOfRange(a, _) => ObservablesError::BadSitePair(a, j),
        _ => ObservablesError::BadSitePair(i, j),
    })?;
    let n_j = state.expect_local(&n, j).unwrap();
    Ok((
        RawStringSet {
            g_nn: set.g_nn / norm,
            g_n1: set.g_n1 / norm,
            g_1n: set.g_1n / norm,
            g_11: set.g_11 / norm,
        },
        DensityMoments { n_i: n_i.re, n_j: n_j.re, nn: (set.nn / norm).re },
    ))
}

/// String and density-wave order from raw correlators and an externally
/// supplied filling (the state's own for pure states, the ensemble's for
/// trajectory averages).
pub fn assemble_orders(
    raw: &RawStringSet,
    moments: &DensityMoments,
    n_bar: f64,
    i: usize,
    j: usize,
) -> OrderParams {
    let interior = (j - i - 1) as f64;
    let phase = C64::new(0.0, -std::f64::consts::PI * n_bar * interior).exp();
    let so = (phase
        * (raw.g_nn - n_bar * raw.g_n1 - n_bar * raw.g_1n + n_bar * n_bar * raw.g_11))
        .norm();
    let dwo = (moments.nn - n_bar * moments.n_i - n_bar * moments.n_j + n_bar * n_bar).abs();
    OrderParams { so, dwo, filling: n_bar, site_pair: (i, j) }
}

/// Orders of a normalized pure state at `(i, j)` using its own filling.
pub fn orders_of_state(state: &Mps, i: usize, j: usize) -> Result<OrderParams, ObservablesError> {
    let (raw, moments) = measure_pair(state, i, j)?;
    Ok(assemble_orders(&raw, &moments, filling(state), i, j))
}

/// Fixed finite-size convention for the measurement pair: quarter offsets,
/// `i = floor(L/4) + 1`, `j = L - floor(L/4)`, keeping both sites away from
/// the pinned edges.
pub fn finite_size_pair(sites: usize) -> Result<(usize, usize), ObservablesError> {
    if sites < 8 {
        return Err(ObservablesError::ChainTooShort(sites));
    }
    let q = sites / 4;
    Ok((q + 1, sites - q))
}
