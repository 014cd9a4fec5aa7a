//! Variational mean-field energy of the Kennedy-Tasaki-transformed spin chain
//! on the homogeneous product ansatz `|phi> = a|0> + b|+> + c|->` per site,
//! energy-landscape grids over `(b/a, c/a)`, and degenerate-minima counting.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MeanFieldError {
    #[error("all variational amplitudes are zero")]
    ZeroAmplitudes,
    #[error("landscape needs at least 101 points per axis, got {0}")]
    GridTooCoarse(usize),
    #[error("landscape range is empty")]
    EmptyRange,
}

/// Variational amplitudes of the local state `a|0> + b|+> + c|->`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanFieldPoint {
    pub a: C64,
    pub b: C64,
    pub c: C64,
}

impl MeanFieldPoint {
    pub fn real(b: f64, c: f64) -> Self {
        Self { a: C64::new(1.0, 0.0), b: C64::new(b, 0.0), c: C64::new(c, 0.0) }
    }

    pub fn norm_sq(&self) -> f64 {
        self.a.norm_sqr() + self.b.norm_sqr() + self.c.norm_sqr()
    }
}

/// Mean-field energy density for general complex amplitudes:
///
/// `E = N^-2 [ (U/2 - V)(|b|^4 + |c|^4) + 2(U/2 + V)|b|^2|c|^2
///   + (U/2 - 2J)|a|^2(|b|^2 + |c|^2) - Re{ 2 J a^2 (b*^2 + c*^2) + 4 Ω (a*^2 b c + |a|^2 b c*) } ]`
///
/// with `N = |a|^2 + |b|^2 + |c|^2`. The drive cross-term is written in the
/// form that equals the transformed two-site expectation for arbitrary
/// complex amplitudes; for real amplitudes it reduces to the familiar
/// `8 Ω b c`.
pub fn energy_complex(
    point: &MeanFieldPoint,
    u: f64,
    v: f64,
    j: f64,
    omega: f64,
) -> Result<f64, MeanFieldError> {
    let n = point.norm_sq();
    if n == 0.0 {
        return Err(MeanFieldError::ZeroAmplitudes);
    }
    let (a, b, c) = (point.a, point.b, point.c);
    let (b2, c2, a2) = (b.norm_sqr(), c.norm_sqr(), a.norm_sqr());
    let quart = (0.5 * u - v) * (b2 * b2 + c2 * c2) + 2.0 * (0.5 * u + v) * b2 * c2;
    let quad = (0.5 * u - 2.0 * j) * a2 * (b2 + c2);
    let cross = 2.0 * j * a * a * (b.conj() * b.conj() + c.conj() * c.conj())
        + 4.0 * omega * (a.conj() * a.conj() * b * c + a2 * b * c.conj());
    Ok((quart + quad - cross.re) / (n * n))
}

/// Mean-field energy for real amplitudes with `a = 1`:
///
/// `E = (1 + b^2 + c^2)^-2 [ (U/2 - V)(b^4 + c^4) + 2(U/2 + V) b^2 c^2
///   + (U/2 - 4J)(b^2 + c^2) - 8 Ω b c ]`
pub fn energy_real(b: f64, c: f64, u: f64, v: f64, j: f64, omega: f64) -> f64 {
    let n = 1.0 + b * b + c * c;
    let (b2, c2) = (b * b, c * c);
    ((0.5 * u - v) * (b2 * b2 + c2 * c2)
        + 2.0 * (0.5 * u + v) * b2 * c2
        + (0.5 * u - 4.0 * j) * (b2 + c2)
        - 8.0 * omega * b * c)
        / (n * n)
}

/// Couplings a landscape was evaluated at.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LandscapeParams {
    pub u: f64,
    pub v: f64,
    pub j: f64,
    pub omega: f64,
}

/// Uniform grid of [`energy_real`] values.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LandscapeGrid {
    pub b_axis: Vec<f64>,
    pub c_axis: Vec<f64>,
    /// Row-major over `b` then `c`: `energies[ib * c_axis.len() + ic]`.
    pub energies: Vec<f64>,
    pub params: LandscapeParams,
}

impl LandscapeGrid {
    pub fn at(&self, ib: usize, ic: usize) -> f64 {
        self.energies[ib * self.c_axis.len() + ic]
    }
}

fn axis(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
}

/// Evaluate the real-amplitude landscape on `resolution x resolution` points.
pub fn landscape(
    params: LandscapeParams,
    b_range: (f64, f64),
    c_range: (f64, f64),
    resolution: usize,
) -> Result<LandscapeGrid, MeanFieldError> {
    if resolution < 101 {
        return Err(MeanFieldError::GridTooCoarse(resolution));
    }
    if b_range.0 >= b_range.1 || c_range.0 >= c_range.1 {
        return Err(MeanFieldError::EmptyRange);
    }
    let b_axis = axis(b_range.0, b_range.1, resolution);
    let c_axis = axis(c_range.0, c_range.1, resolution);
    let energies: Vec<f64> = b_axis
        .par_iter()
        .flat_map_iter(|&b| {
            let c_axis = c_axis.clone();
            c_axis
                .into_iter()
                .map(move |c| energy_real(b, c, params.u, params.v, params.j, params.omega))
        })
        .collect();
    Ok(LandscapeGrid { b_axis, c_axis, energies, params })
}

/// A polished local minimum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Minimum {
    pub b: f64,
    pub c: f64,
    pub energy: f64,
}

/// Result of minima detection; `flat` flags a landscape with no structure at
/// all (all couplings zero), where every point is trivially degenerate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MinimaReport {
    pub minima: Vec<Minimum>,
    pub count: usize,
    pub flat: bool,
}

/// Detect grid-level local minima, polish them by coordinate descent to
/// `refine_tol` in position, and keep those within `degeneracy_tol` of the
/// global minimum. Duplicates closer than 1e-3 in position are merged.
pub fn find_minima(grid: &LandscapeGrid, refine_tol: f64, degeneracy_tol: f64) -> MinimaReport {
    let (nb, nc) = (grid.b_axis.len(), grid.c_axis.len());
    let span = grid
        .energies
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &e| (lo.min(e), hi.max(e)));
    if span.1 - span.0 < 1e-14 {
        return MinimaReport { minima: Vec::new(), count: 0, flat: true };
    }

    let p = grid.params;
    let f = |b: f64, c: f64| energy_real(b, c, p.u, p.v, p.j, p.omega);

    let mut candidates = Vec::new();
    for ib in 0..nb {
        for ic in 0..nc {
            let e = grid.at(ib, ic);
            let mut is_min = true;
            'nbrs: for db in -1i64..=1 {
                for dc in -1i64..=1 {
                    if db == 0 && dc == 0 {
                        continue;
                    }
                    let (jb, jc) = (ib as i64 + db, ic as i64 + dc);
                    if jb < 0 || jc < 0 || jb >= nb as i64 || jc >= nc as i64 {
                        continue;
                    }
                    if grid.at(jb as usize, jc as usize) < e {
                        is_min = false;
                        break 'nbrs;
                    }
                }
            }
            if is_min {
                candidates.push((grid.b_axis[ib], grid.c_axis[ic]));
            }
        }
    }

    // coordinate-descent polish with shrinking step
    let step0 = (grid.b_axis[1] - grid.b_axis[0]).max(grid.c_axis[1] - grid.c_axis[0]);
    let mut polished: Vec<Minimum> = Vec::new();
    for (mut b, mut c) in candidates {
        let mut step = step0;
        let mut e = f(b, c);
        while step > refine_tol {
            let mut moved = false;
            for (db, dc) in [(step, 0.0), (-step, 0.0), (0.0, step), (0.0, -step)] {
                let et = f(b + db, c + dc);
                if et < e {
                    b += db;
                    c += dc;
                    e = et;
                    moved = true;
                }
            }
            if !moved {
                step *= 0.5;
            }
        }
        polished.push(Minimum { b, c, energy: e });
    }

    // merge plateau duplicates by position
    polished.sort_by(|x, y| x.energy.partial_cmp(&y.energy).unwrap());
    let mut merged: Vec<Minimum> = Vec::new();
    for m in polished {
        if !merged.iter().any(|k| (k.b - m.b).hypot(k.c - m.c) < 1e-3) {
            merged.push(m);
        }
    }
    let global = merged.first().map(|m| m.energy).unwrap_or(0.0);
    let mut minima: Vec<Minimum> = merged
        .into_iter()
        .filter(|m| m.energy - global <= degeneracy_tol)
        .collect();
    // deterministic output order: by (b, c)
    minima.sort_by(|x, y| (x.b, x.c).partial_cmp(&(y.b, y.c)).unwrap());
    let count = minima.len();
    MinimaReport { minima, count, flat: false }
}

/// Default grid window and tolerances used by the landscape presets.
pub const DEFAULT_RANGE: (f64, f64) = (-2.0, 2.0);
pub const DEFAULT_RESOLUTION: usize = 201;
pub const DEFAULT_REFINE_TOL: f64 = 1e-6;

pub fn default_degeneracy_tol(e_min: f64) -> f64 {
    1e-6 * e_min.abs().max(1.0)
}
