//! Physical model definitions: the extended Bose-Hubbard chain in the lab and
//! rotating frames, parametric and on-site drives, photon-loss jump operators,
//! and the effective spin-1 chain couplings.
//!
//! Sites are numbered `1..=L` throughout the public API. Energies are in units
//! of the hopping `J`, which is normally set to 1.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mps::{Mpo, MpoTensor};

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("system must have at least one site, got {0}")]
    TooFewSites(usize),
    #[error("local cutoff must allow at least two Fock states, got {0}")]
    CutoffTooSmall(usize),
    #[error("spin-1 mapping needs a local cutoff of at least 3, got {0}")]
    CutoffBelowSpinMapping(usize),
    #[error("loss rate must be non-negative, got {0}")]
    NegativeLoss(f64),
    #[error("a time argument is meaningless in the rotating frame")]
    TimeInRotatingFrame,
    #[error("the driven lab-frame Hamiltonian is time-dependent; a time must be supplied")]
    MissingTime,
    #[error("matrix-product operators are built in the rotating frame only")]
    LabFrameMpo,
}

/// Which drive acts on the chain.
#[derive(Debug, Copy, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriveKind {
    None,
    /// Two-photon nearest-neighbor parametric drive.
    Parametric,
    /// One-photon coherent drive on every site.
    Onsite,
}

/// Reference frame of the Hamiltonian.
#[derive(Debug, Copy, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Frame {
    Lab,
    Rotating,
}

/// Complete parameter set of the driven-dissipative chain.
///
/// The detuning is never stored; [`ModelParams::mu`] recomputes
/// `omega_d - omega_r` so the two can not drift apart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Bare resonator frequency (only enters lab-frame spectra).
    pub omega_r: f64,
    /// Hopping strength; the energy unit.
    pub hopping: f64,
    /// On-site Kerr nonlinearity U.
    pub onsite_u: f64,
    /// Cross-Kerr (nearest-neighbor) interaction V.
    pub cross_v: f64,
    /// Drive amplitude.
    pub drive_amp: f64,
    /// Drive frequency.
    pub omega_d: f64,
    /// Photon loss rate.
    pub gamma: f64,
    /// Number of lattice sites.
    pub sites: usize,
    /// Local Hilbert-space dimension (max photons per site is `local_cutoff - 1`).
    pub local_cutoff: usize,
    pub drive_kind: DriveKind,
    pub frame: Frame,
}

impl ModelParams {
    /// Rotating-frame chain with detuning `mu`, the configuration used by all
    /// figure presets. `omega_r = 0`, so `omega_d = mu`.
    pub fn rotating(sites: usize, local_cutoff: usize, mu: f64) -> Self {
        Self {
            omega_r: 0.0,
            hopping: 1.0,
            onsite_u: 0.0,
            cross_v: 0.0,
            drive_amp: 0.0,
            omega_d: mu,
            gamma: 0.0,
            sites,
            local_cutoff,
            drive_kind: DriveKind::None,
            frame: Frame::Rotating,
        }
    }

    /// Detuning `mu = omega_d - omega_r`.
    pub fn mu(&self) -> f64 {
        self.omega_d - self.omega_r
    }

    /// Reset the detuning by moving the drive frequency.
    pub fn set_mu(&mut self, mu: f64) {
        self.omega_d = self.omega_r + mu;
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.sites < 1 {
            return Err(ModelError::TooFewSites(self.sites));
        }
        if self.local_cutoff < 2 {
            return Err(ModelError::CutoffTooSmall(self.local_cutoff));
        }
        if self.gamma < 0.0 {
            return Err(ModelError::NegativeLoss(self.gamma));
        }
        Ok(())
    }
}

/// Everything a term may act with.
#[derive(Debug, Copy, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OpKind {
    /// `a_i`
    Annihilate,
    /// `a†_i`
    Create,
    /// `n_i`
    Number,
    /// `n_i (n_i - 1)`
    Kerr,
    /// `n_i n_{i+1}`
    CrossKerr,
    /// `a_i a_{i+1}`
    PairAnnihilate,
    /// `a†_i a†_{i+1}`
    PairCreate,
    /// `a†_i a_{i+1}`
    HopRight,
    /// `a_i a†_{i+1}`
    HopLeft,
    /// `a_i + a†_i`
    Displace,
}

impl OpKind {
    pub fn is_two_site(self) -> bool {
        matches!(
            self,
            OpKind::CrossKerr | OpKind::PairAnnihilate | OpKind::PairCreate | OpKind::HopRight | OpKind::HopLeft
        )
    }
}

/// One additive term of a Hamiltonian. Two-site kinds act on `(site, site+1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    /// Leftmost site the term touches, `1..=L`.
    pub site: usize,
    pub kind: OpKind,
    pub coeff: C64,
    /// The coefficient carries `exp(i * phase_freq * t)`; zero for static terms.
    pub phase_freq: f64,
}

/// A Hamiltonian (or jump-operator set) as a list of terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermList {
    pub sites: usize,
    pub local_cutoff: usize,
    pub terms: Vec<Term>,
}

impl TermList {
    fn push(&mut self, site: usize, kind: OpKind, coeff: C64, phase_freq: f64) {
        debug_assert!(site >= 1 && site <= self.sites);
        debug_assert!(!kind.is_two_site() || site < self.sites);
        if coeff != C64::new(0.0, 0.0) {
            self.terms.push(Term { site, kind, coeff, phase_freq });
        }
    }

    /// Dense matrix of the term list in the occupation basis, site 1 slowest.
    /// Intended for small systems; the oracle builds its reference matrix by an
    /// independent route.
    pub fn to_dense(&self) -> Vec<C64> {
        let d = self.local_cutoff;
        let dim = d.pow(self.sites as u32);
        let mut h = vec![C64::new(0.0, 0.0); dim * dim];
        let id = crate::linalg::identity(d);
        for term in &self.terms {
            let (m1, m2) = term_site_matrices(term.kind, d);
            // embed at term.site (1-based): kron over all sites
            let mut op: Vec<C64> = vec![C64::new(1.0, 0.0)];
            let mut rows = 1usize;
            for s in 1..=self.sites {
                let factor: &[C64] = if s == term.site {
                    &m1
                } else if s == term.site + 1 && m2.is_some() {
                    m2.as_deref().unwrap()
                } else {
                    &id
                };
                op = crate::tensor::kron(&op, rows, rows, factor, d, d);
                rows *= d;
            }
            for (dst, src) in h.iter_mut().zip(op.iter()) {
                *dst += term.coeff * src;
            }
        }
        h
    }
}

/// Single-site matrices for a term kind; the second factor is present for
/// two-site kinds.
fn term_site_matrices(kind: OpKind, d: usize) -> (Vec<C64>, Option<Vec<C64>>) {
    match kind {
        OpKind::Annihilate => (annihilation(d), None),
        OpKind::Create => (creation(d), None),
        OpKind::Number => (number(d), None),
        OpKind::Kerr => (kerr(d), None),
        OpKind::Displace => (displace(d), None),
        OpKind::CrossKerr => (number(d), Some(number(d))),
        OpKind::PairAnnihilate => (annihilation(d), Some(annihilation(d))),
        OpKind::PairCreate => (creation(d), Some(creation(d))),
        OpKind::HopRight => (creation(d), Some(annihilation(d))),
        OpKind::HopLeft => (annihilation(d), Some(creation(d))),
    }
}

/// `a` on a `d`-dimensional Fock space, column-major.
pub fn annihilation(d: usize) -> Vec<C64> {
    let mut m = vec![C64::new(0.0, 0.0); d * d];
    for n in 1..d {
        m[(n - 1) + n * d] = C64::new((n as f64).sqrt(), 0.0);
    }
    m
}

/// `a†`
pub fn creation(d: usize) -> Vec<C64> {
    let mut m = vec![C64::new(0.0, 0.0); d * d];
    for n in 1..d {
        m[n + (n - 1) * d] = C64::new((n as f64).sqrt(), 0.0);
    }
    m
}

/// `n`
pub fn number(d: usize) -> Vec<C64> {
    let mut m = vec![C64::new(0.0, 0.0); d * d];
    for n in 0..d {
        m[n + n * d] = C64::new(n as f64, 0.0);
    }
    m
}

/// `n (n - 1)`
pub fn kerr(d: usize) -> Vec<C64> {
    let mut m = vec![C64::new(0.0, 0.0); d * d];
    for n in 0..d {
        m[n + n * d] = C64::new((n * n.saturating_sub(1)) as f64, 0.0);
    }
    m
}

/// `a + a†`
pub fn displace(d: usize) -> Vec<C64> {
    let mut m = annihilation(d);
    let c = creation(d);
    for (x, y) in m.iter_mut().zip(c) {
        *x += y;
    }
    m
}

/// Build the Hamiltonian term list for the requested frame and drive.
///
/// Lab frame with a drive needs the time `t`; the rotating frame rejects one.
pub fn build_hamiltonian(params: &ModelParams, t: Option<f64>) -> Result<TermList, ModelError> {
    params.validate()?;
    let l = params.sites;
    let mut list = TermList { sites: l, local_cutoff: params.local_cutoff, terms: Vec::new() };
    let (j, u, v, omega) = (params.hopping, params.onsite_u, params.cross_v, params.drive_amp);

    match params.frame {
        Frame::Rotating => {
            if t.is_some() {
                return Err(ModelError::TimeInRotatingFrame);
            }
            let mu = params.mu();
            for i in 1..=l {
                list.push(i, OpKind::Number, C64::new(-mu, 0.0), 0.0);
                list.push(i, OpKind::Kerr, C64::new(u / 2.0, 0.0), 0.0);
            }
            for i in 1..l {
                list.push(i, OpKind::HopRight, C64::new(-j, 0.0), 0.0);
                list.push(i, OpKind::HopLeft, C64::new(-j, 0.0), 0.0);
                list.push(i, OpKind::CrossKerr, C64::new(v, 0.0), 0.0);
            }
            match params.drive_kind {
                DriveKind::None => {}
                DriveKind::Parametric => {
                    for i in 1..l {
                        list.push(i, OpKind::PairAnnihilate, C64::new(omega, 0.0), 0.0);
                        list.push(i, OpKind::PairCreate, C64::new(omega, 0.0), 0.0);
                    }
                }
                DriveKind::Onsite => {
                    for i in 1..=l {
                        list.push(i, OpKind::Displace, C64::new(omega, 0.0), 0.0);
                    }
                }
            }
        }
        Frame::Lab => {
            if params.drive_kind != DriveKind::None && omega != 0.0 && t.is_none() {
                return Err(ModelError::MissingTime);
            }
            for i in 1..=l {
                list.push(i, OpKind::Number, C64::new(params.omega_r, 0.0), 0.0);
                list.push(i, OpKind::Kerr, C64::new(u / 2.0, 0.0), 0.0);
            }
            for i in 1..l {
                list.push(i, OpKind::HopRight, C64::new(-j, 0.0), 0.0);
                list.push(i, OpKind::HopLeft, C64::new(-j, 0.0), 0.0);
                list.push(i, OpKind::CrossKerr, C64::new(v, 0.0), 0.0);
            }
            if omega != 0.0 {
                let t = t.unwrap_or(0.0);
                match params.drive_kind {
                    DriveKind::None => {}
                    DriveKind::Parametric => {
                        let freq = 2.0 * params.omega_d;
                        let phase = C64::new(0.0, freq * t).exp();
                        for i in 1..l {
                            list.push(i, OpKind::PairAnnihilate, omega * phase, freq);
                            list.push(i, OpKind::PairCreate, omega * phase.conj(), -freq);
                        }
                    }
                    DriveKind::Onsite => {
                        let freq = params.omega_d;
                        let phase = C64::new(0.0, freq * t).exp();
                        for i in 1..=l {
                            list.push(i, OpKind::Annihilate, omega * phase, freq);
                            list.push(i, OpKind::Create, omega * phase.conj(), -freq);
                        }
                    }
                }
            }
        }
    }
    Ok(list)
}

/// Photon-loss jump operators: `sqrt(gamma) * a_i` on every site. Empty when
/// `gamma == 0`.
pub fn jump_operators(params: &ModelParams) -> Result<TermList, ModelError> {
    params.validate()?;
    let mut list = TermList { sites: params.sites, local_cutoff: params.local_cutoff, terms: Vec::new() };
    if params.gamma == 0.0 {
        return Ok(list);
    }
    let c = C64::new(params.gamma.sqrt(), 0.0);
    for i in 1..=params.sites {
        list.push(i, OpKind::Annihilate, c, 0.0);
    }
    Ok(list)
}

/// Effective spin-1 chain couplings after `a -> S+/sqrt(2)`, `n -> 1 - S^z`.
///
/// `dropped_sz_coefficient` is the coefficient of the `sum_i S^z_i` term that
/// the mapping discards under the unit-filling assumption; it is surfaced so
/// callers can judge the approximation instead of trusting it blindly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinChainParams {
    /// `S^x_i S^x_{i+1}` coupling.
    pub xx_coupling: f64,
    /// `S^y_i S^y_{i+1}` coupling.
    pub yy_coupling: f64,
    /// `S^z_i S^z_{i+1}` coupling.
    pub zz_coupling: f64,
    /// `(S^z_i)^2` single-site anisotropy.
    pub anisotropy: f64,
    /// Transverse field from an on-site drive; zero otherwise.
    pub onsite_x: f64,
    pub dropped_sz_coefficient: f64,
}

pub fn map_to_spin1(params: &ModelParams) -> Result<SpinChainParams, ModelError> {
    params.validate()?;
    if params.local_cutoff < 3 {
        return Err(ModelError::CutoffBelowSpinMapping(params.local_cutoff));
    }
    let (j, omega) = (params.hopping, params.drive_amp);
    let (xx, yy, onsite_x) = match params.drive_kind {
        DriveKind::None => (j, j, 0.0),
        DriveKind::Parametric => (j + omega, j - omega, 0.0),
        DriveKind::Onsite => (j, j, omega),
    };
    Ok(SpinChainParams {
        xx_coupling: xx,
        yy_coupling: yy,
        zz_coupling: params.cross_v,
        anisotropy: params.onsite_u / 2.0,
        onsite_x,
        dropped_sz_coefficient: -params.mu() + params.onsite_u / 2.0 + params.cross_v,
    })
}

/// Rotating-frame Hamiltonian as a matrix product operator.
///
/// Bond layout: `[finished | a-carrier | a†-carrier | n-carrier | initial]`.
/// The carriers give bond dimension 5 for the full parametric model and 4
/// when `V == 0`.
pub fn build_mpo(params: &ModelParams) -> Result<Mpo, ModelError> {
    params.validate()?;
    if params.frame != Frame::Rotating {
        return Err(ModelError::LabFrameMpo);
    }
    let d = params.local_cutoff;
    let l = params.sites;
    let (j, u, v, omega, mu) = (params.hopping, params.onsite_u, params.cross_v, params.drive_amp, params.mu());

    let a = annihilation(d);
    let adag = creation(d);
    let n = number(d);
    let nk = kerr(d);
    let id = crate::linalg::identity(d);
    let zero = vec![C64::new(0.0, 0.0); d * d];

    // On-site block.
    let mut h1 = zero.clone();
    for (dst, src) in h1.iter_mut().zip(&n) {
        *dst += C64::new(-mu, 0.0) * src;
    }
    for (dst, src) in h1.iter_mut().zip(&nk) {
        *dst += C64::new(u / 2.0, 0.0) * src;
    }
    if params.drive_kind == DriveKind::Onsite && omega != 0.0 {
        let disp = displace(d);
        for (dst, src) in h1.iter_mut().zip(&disp) {
            *dst += C64::new(omega, 0.0) * src;
        }
    }

    let parametric = params.drive_kind == DriveKind::Parametric && omega != 0.0;
    let with_v = v != 0.0;
    // carriers: a always pairs with (-J a† + Ω a), a† with (-J a + Ω a†), n with V n.
    let mut right_of_a = zero.clone();
    let mut right_of_adag = zero.clone();
    for i in 0..d * d {
        right_of_a[i] += C64::new(-j, 0.0) * adag[i];
        right_of_adag[i] += C64::new(-j, 0.0) * a[i];
        if parametric {
            right_of_a[i] += C64::new(omega, 0.0) * a[i];
            right_of_adag[i] += C64::new(omega, 0.0) * adag[i];
        }
    }
    let mut right_of_n = zero.clone();
    for i in 0..d * d {
        right_of_n[i] = C64::new(v, 0.0) * n[i];
    }

    let w = if with_v { 5 } else { 4 };
    let ncar = w - 2;
    // carrier slots 1..=ncar map to [a, a†, n?]
    let carriers: Vec<&[C64]> = if with_v { vec![&a, &adag, &n] } else { vec![&a, &adag] };
    let rights: Vec<&[C64]> = if with_v {
        vec![&right_of_a, &right_of_adag, &right_of_n]
    } else {
        vec![&right_of_a, &right_of_adag]
    };

    let mut tensors = Vec::with_capacity(l);
    for s in 1..=l {
        let (wl, wr) = (if s == 1 { 1 } else { w }, if s == l { 1 } else { w });
        // data layout (wl, po, pi, wr), wl fastest
        let mut data = vec![C64::new(0.0, 0.0); wl * d * d * wr];
        let mut set = |bl: usize, br: usize, m: &[C64]| {
            // bulk rows: 0 = finished, w-1 = initial; boundary tensors collapse
            // to the initial row (left edge) / finished column (right edge).
            let (rl, rr) = (
                if s == 1 { 0 } else { bl },
                if s == l { 0 } else { br },
            );
            if (s == 1 && bl != w - 1) || (s == l && br != 0) {
                return;
            }
            for po in 0..d {
                for pi in 0..d {
                    data[rl + wl * (po + d * (pi + d * rr))] += m[po + pi * d];
                }
            }
        };
        set(0, 0, &id); // finished stays finished
        set(w - 1, w - 1, &id); // nothing placed yet
        set(w - 1, 0, &h1); // on-site term
        for k in 0..ncar {
            set(w - 1, 1 + k, carriers[k]); // open a bond term
            set(1 + k, 0, rights[k]); // close it
        }
        tensors.push(MpoTensor { wl, wr, phys: d, data });
    }
    Ok(Mpo { phys: d, tensors })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base(l: usize, d: usize) -> ModelParams {
        ModelParams::rotating(l, d, 0.0)
    }

    #[test]
    fn mu_is_recomputed() {
        let mut p = base(2, 3);
        p.set_mu(7.5);
        assert_eq!(p.mu(), 7.5);
        p.omega_r = 1.0;
        assert_eq!(p.mu(), 6.5);
        p.set_mu(7.5);
        assert_eq!(p.omega_d, 8.5);
    }

    #[test]
    fn chemical_potential_only_term_list() {
        // L=2, J=U=V=Ω=0, mu=1 -> exactly {-n_1, -n_2}
        let mut p = base(2, 3);
        p.hopping = 0.0;
        p.set_mu(1.0);
        let list = build_hamiltonian(&p, None).unwrap();
        assert_eq!(list.terms.len(), 2);
        for (term, site) in list.terms.iter().zip([1, 2]) {
            assert_eq!(term.site, site);
            assert_eq!(term.kind, OpKind::Number);
            assert_eq!(term.coeff, C64::new(-1.0, 0.0));
        }
        // acting on |1,1>: eigenvalue -2
        let h = list.to_dense();
        let d = 3usize;
        let idx = 1 * d + 1;
        assert_eq!(h[idx + idx * d * d], C64::new(-2.0, 0.0));
    }

    #[test]
    fn kerr_matrix_element() {
        // <2| (U/2) n(n-1) |2> = 5 for U = 5
        let mut p = base(1, 3);
        p.hopping = 0.0;
        p.onsite_u = 5.0;
        let h = build_hamiltonian(&p, None).unwrap().to_dense();
        assert_eq!(h[2 + 2 * 3], C64::new(5.0, 0.0));
    }

    #[test]
    fn frame_time_preconditions() {
        let mut p = base(2, 3);
        p.drive_amp = 0.3;
        p.drive_kind = DriveKind::Parametric;
        assert_eq!(build_hamiltonian(&p, Some(0.1)).unwrap_err(), ModelError::TimeInRotatingFrame);
        p.frame = Frame::Lab;
        assert_eq!(build_hamiltonian(&p, None).unwrap_err(), ModelError::MissingTime);
        assert!(build_hamiltonian(&p, Some(0.2)).is_ok());
    }

    #[test]
    fn lab_drive_phases_conjugate() {
        let mut p = base(3, 3);
        p.drive_amp = 0.2;
        p.drive_kind = DriveKind::Parametric;
        p.frame = Frame::Lab;
        p.omega_d = 1.3;
        let list = build_hamiltonian(&p, Some(0.7)).unwrap();
        let pairs: Vec<&Term> = list.terms.iter().filter(|t| t.kind == OpKind::PairAnnihilate).collect();
        let conj: Vec<&Term> = list.terms.iter().filter(|t| t.kind == OpKind::PairCreate).collect();
        assert_eq!(pairs.len(), 2);
        assert_eq!(conj.len(), 2);
        for (c1, c2) in pairs.iter().zip(conj.iter()) {
            assert!((c1.coeff - c2.coeff.conj()).norm() < 1e-15);
            assert_eq!(c1.phase_freq, -c2.phase_freq);
        }
    }

    #[test]
    fn jump_operators_scale_with_gamma() {
        let mut p = base(50, 3);
        p.gamma = 0.0;
        assert!(jump_operators(&p).unwrap().terms.is_empty());
        p.gamma = 0.05;
        let ops = jump_operators(&p).unwrap();
        assert_eq!(ops.terms.len(), 50);
        for t in &ops.terms {
            assert_eq!(t.kind, OpKind::Annihilate);
            assert!((t.coeff.re - 0.05f64.sqrt()).abs() < 1e-15);
        }
        p.gamma = -0.1;
        assert_eq!(jump_operators(&p).unwrap_err(), ModelError::NegativeLoss(-0.1));
    }

    #[test]
    fn lowering_amplitude_on_two_photons() {
        // sqrt(gamma) a |2> = sqrt(gamma) sqrt(2) |1>
        let a = annihilation(3);
        assert!((a[1 + 2 * 3].re - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn spin_mapping_couplings() {
        let mut p = base(4, 3);
        p.onsite_u = 5.0;
        p.cross_v = 3.3;
        p.drive_amp = 0.1;
        p.drive_kind = DriveKind::Parametric;
        p.set_mu(7.5);
        let s = map_to_spin1(&p).unwrap();
        assert!((s.xx_coupling - 1.1).abs() < 1e-15);
        assert!((s.yy_coupling - 0.9).abs() < 1e-15);
        assert!((s.zz_coupling - 3.3).abs() < 1e-15);
        assert!((s.anisotropy - 2.5).abs() < 1e-15);
        assert_eq!(s.onsite_x, 0.0);
        assert!((s.dropped_sz_coefficient - (-7.5 + 2.5 + 3.3)).abs() < 1e-14);

        p.drive_amp = 0.0;
        let s0 = map_to_spin1(&p).unwrap();
        assert_eq!(s0.xx_coupling, s0.yy_coupling);
        assert_eq!(s0.onsite_x, 0.0);

        p.drive_kind = DriveKind::Onsite;
        p.drive_amp = 0.1;
        let so = map_to_spin1(&p).unwrap();
        assert_eq!(so.xx_coupling, so.yy_coupling);
        assert!((so.onsite_x - 0.1).abs() < 1e-15);

        p.local_cutoff = 2;
        assert_eq!(map_to_spin1(&p).unwrap_err(), ModelError::CutoffBelowSpinMapping(2));
    }

    #[test]
    fn mpo_bond_dimensions() {
        let mut p = base(4, 3);
        p.set_mu(7.5);
        p.onsite_u = 5.0;
        // V = 0, Ω = 0
        let mpo = build_mpo(&p).unwrap();
        assert!(mpo.max_bond() <= 6);
        p.cross_v = 3.3;
        p.drive_amp = 0.1;
        p.drive_kind = DriveKind::Parametric;
        let mpo = build_mpo(&p).unwrap();
        assert!(mpo.max_bond() <= 8);
        p.frame = Frame::Lab;
        assert_eq!(build_mpo(&p).unwrap_err(), ModelError::LabFrameMpo);
    }
}
