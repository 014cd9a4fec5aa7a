//! Acceptance suite: one test per criterion, each printing a PASS line with
//! the measured numbers. Heavy ground-state fixtures are shared across
//! criteria through `OnceLock`.
//!
//! Scales: exact-diagonalization cross-checks run at oracle scale; the
//! Haldane-phase and transient-order runs use the desk-scale presets
//! (`L = 48, chi = 128` for the ground state, `L = 20, chi = 64, 100
//! trajectories` for dynamics).

use std::sync::OnceLock;

use ebhsim::dynamics::{
    run_ensemble, EnsembleSeries, TrajectoryOptions, TrotterOrder, TrotterScheme,
};
use ebhsim::groundstate::{dmrg, pin_edges, pinned_product_state, scan_mu, DmrgConfig};
use ebhsim::meanfield;
use ebhsim::model::{self, DriveKind, ModelParams};
use ebhsim::mps::{CompressionPolicy, Mps};
use ebhsim::observables::{self, assemble_orders, DensityMoments, RawStringSet};
use ebhsim::oracle::{self, DensityMatrix};
use num_complex::Complex64 as C64;

fn max_dev(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn fig3_params(sites: usize, d: usize) -> ModelParams {
    let mut p = ModelParams::rotating(sites, d, 7.5);
    p.onsite_u = 5.0;
    p.cross_v = 3.3;
    p
}

fn fig4_params(sites: usize, gamma: f64, v: f64, omega: f64) -> ModelParams {
    let mut p = ModelParams::rotating(sites, if sites <= 4 { 3 } else { 5 }, 6.28);
    p.onsite_u = 5.0;
    p.cross_v = v;
    p.gamma = gamma;
    p.drive_amp = omega;
    p.drive_kind = DriveKind::Parametric;
    p
}

#[test]
fn criterion_01_mpo_matches_oracle_dense() {
    // L <= 4, d = 3, all drive kinds: MPO contraction == oracle dense to 1e-12
    let mut worst: f64 = 0.0;
    for sites in 2..=4usize {
        for kind in [DriveKind::None, DriveKind::Parametric, DriveKind::Onsite] {
            let mut p = fig3_params(sites, 3);
            p.drive_kind = kind;
            p.drive_amp = if kind == DriveKind::None { 0.0 } else { 0.2 };
            let mpo = model::build_mpo(&p).unwrap();
            let dense = mpo.to_dense();
            let direct = oracle::dense_hamiltonian(&p, None).unwrap();
            let dev = max_dev(&dense, &direct);
            worst = worst.max(dev);
            assert!(dev < 1e-12, "L={sites} {kind:?}: dev {dev:.2e}");
        }
    }
    println!("criterion 1: PASS — MPO vs oracle dense, max deviation {worst:.2e} (< 1e-12)");
}

#[test]
fn criterion_02_dmrg_matches_exact_diagonalization() {
    // L = 6, d = 3, fig. 3 parameters: energy to 1e-8, SO/DWO to 1e-6
    let p = fig3_params(6, 3);
    let (e_exact, psi) = oracle::exact_ground_state(&p).unwrap();
    let mpo = model::build_mpo(&p).unwrap();
    let init = Mps::random(6, 3, 12, 1);
    let cfg = DmrgConfig {
        chi_max: 32,
        sv_cutoff: 0.0,
        max_sweeps: 40,
        energy_tol: 1e-13,
        pin_strength: 0.0,
    };
    let res = dmrg(&mpo, &init, &cfg).unwrap();
    let de = (res.energy - e_exact).abs();
    assert!(de < 1e-8, "energy: dmrg {} vs exact {}", res.energy, e_exact);
    // variational bound (up to solver roundoff)
    assert!(res.energy >= e_exact - 1e-9, "variational bound violated");

    let pair = (2usize, 5usize);
    let mps_orders = observables::orders_of_state(&res.state, pair.0, pair.1).unwrap();
    let rho = DensityMatrix::pure(&psi);
    let (set, fillings) = oracle::density_moments(&rho, 6, 3, pair.0, pair.1);
    let n_bar = fillings.iter().sum::<f64>() / 6.0;
    let dense_orders = assemble_orders(
        &RawStringSet { g_nn: set.g_nn, g_n1: set.g_n1, g_1n: set.g_1n, g_11: set.g_11 },
        &DensityMoments { n_i: fillings[pair.0 - 1], n_j: fillings[pair.1 - 1], nn: set.nn.re },
        n_bar,
        pair.0,
        pair.1,
    );
    let dso = (mps_orders.so - dense_orders.so).abs();
    let ddwo = (mps_orders.dwo - dense_orders.dwo).abs();
    assert!(dso < 1e-6, "SO: {} vs {}", mps_orders.so, dense_orders.so);
    assert!(ddwo < 1e-6, "DWO: {} vs {}", mps_orders.dwo, dense_orders.dwo);
    println!(
        "criterion 2: PASS — |dE| = {de:.2e} (< 1e-8), |dSO| = {dso:.2e}, |dDWO| = {ddwo:.2e} (< 1e-6)"
    );
}

/// Shared desk-scale Haldane ground states at fig. 3 parameters.
struct HiRun {
    so: f64,
    dwo: f64,
    filling: f64,
    e_r_per_site: f64,
    state: Mps,
}

fn hi_ground(drive: DriveKind, omega: f64) -> HiRun {
    let mut p = fig3_params(48, 5);
    p.drive_kind = drive;
    p.drive_amp = omega;
    let bare = model::build_mpo(&p).unwrap();
    let pinned = pin_edges(&bare, 50.0);
    let init = pinned_product_state(48, 5);
    let cfg = DmrgConfig {
        chi_max: 128,
        sv_cutoff: 1e-10,
        max_sweeps: 18,
        energy_tol: 1e-9,
        pin_strength: 50.0,
    };
    let res = dmrg(&pinned, &init, &cfg).unwrap();
    let (i, j) = observables::finite_size_pair(48).unwrap();
    let orders = observables::orders_of_state(&res.state, i, j).unwrap();
    HiRun {
        so: orders.so,
        dwo: orders.dwo,
        filling: observables::filling(&res.state),
        e_r_per_site: bare.expectation(&res.state).re / 48.0,
        state: res.state,
    }
}

fn hi_baseline() -> &'static HiRun {
    static RUN: OnceLock<HiRun> = OnceLock::new();
    RUN.get_or_init(|| hi_ground(DriveKind::None, 0.0))
}

#[test]
fn criterion_03_haldane_detection() {
    // L = 48, d = 5, chi = 128, mu = 7.5: hidden order of the pinned ground
    // state at the quarter-offset pair
    let run = hi_baseline();
    assert!(
        (run.filling - 1.0).abs() < 0.02,
        "filling {} should be unit",
        run.filling
    );
    assert!(run.so > 0.1, "SO = {}", run.so);
    assert!(run.dwo < 0.01, "DWO = {}", run.dwo);
    println!(
        "criterion 3 (order): PASS — SO = {:.4} (> 0.1), DWO = {:.5} (< 0.01), filling = {:.4}",
        run.so, run.dwo, run.filling
    );
}

#[test]
fn criterion_03_energy_scale_against_quoted_values() {
    // The published values ΔE^R_HI ≈ -1.22LJ and ΔE^L_HI ≈ 6.28LJ are only
    // mutually consistent through 6.28 = 7.5 - 1.22; the expectation values of
    // the stated Hamiltonian at these couplings are far from them (the
    // unit-filled-sector minimum of <H_0^R>/L sits near -5.5J: classically
    // -mu + V = -4.2J, lowered further by quantum fluctuations, and exact
    // diagonalization at L = 6, d = 3 gives -6.0J). The criterion is asserted
    // as stated; see the decisions ledger for the blocking analysis.
    let run = hi_baseline();
    let e_r = run.e_r_per_site;
    let e_lab = e_r + 7.5 * run.filling;
    println!(
        "criterion 3 (energy scale): measured E_R/L = {e_r:.4}J, E_L/L = {e_lab:.4}J \
         vs quoted -1.22J / 6.28J"
    );
    assert!(
        (e_r - (-1.22)).abs() <= 0.05 * 1.22,
        "E_R/L = {e_r:.4}J is not within 5% of the quoted -1.22J \
         (the quoted value is not an expectation value of the stated Hamiltonian \
         at these couplings; exact diagonalization confirms — see ledger)"
    );
    assert!((e_lab - 6.28).abs() <= 0.05 * 6.28, "E_L/L = {e_lab:.4}J vs quoted 6.28J");
}

#[test]
fn criterion_04_drive_symmetry_contrast() {
    // parametric Ω = 0.5 changes SO by < 10%; on-site Ω = 0.1 kills both orders
    let base = hi_baseline();
    let parametric = hi_ground(DriveKind::Parametric, 0.5);
    let rel = (parametric.so - base.so).abs() / base.so;
    assert!(
        rel < 0.10,
        "SO(Ω=0.5) = {} vs SO(0) = {}: {:.1}% change",
        parametric.so,
        base.so,
        rel * 100.0
    );
    let onsite = hi_ground(DriveKind::Onsite, 0.1);
    assert!(onsite.so < 0.01, "on-site SO = {}", onsite.so);
    assert!(onsite.dwo < 0.01, "on-site DWO = {}", onsite.dwo);
    println!(
        "criterion 4: PASS — SO drift under parametric drive {:.1}% (< 10%), \
         on-site drive SO = {:.4}, DWO = {:.4} (< 0.01)",
        rel * 100.0,
        onsite.so,
        onsite.dwo
    );
}

#[test]
fn criterion_05_mean_field_degeneracy() {
    for omega in [0.0, 0.1] {
        let grid = meanfield::landscape(
            meanfield::LandscapeParams { u: 5.0, v: 2.8, j: 1.0, omega },
            meanfield::DEFAULT_RANGE,
            meanfield::DEFAULT_RANGE,
            meanfield::DEFAULT_RESOLUTION,
        )
        .unwrap();
        let e_min = grid.energies.iter().cloned().fold(f64::INFINITY, f64::min);
        let report = meanfield::find_minima(
            &grid,
            meanfield::DEFAULT_REFINE_TOL,
            meanfield::default_degeneracy_tol(e_min),
        );
        assert_eq!(report.count, 4, "Ω = {omega}: {:?}", report.minima);
    }
    println!("criterion 5: PASS — exactly 4 degenerate minima at Ω = 0 and Ω = 0.1");
}

#[test]
fn criterion_06_kennedy_tasaki_identities() {
    // string-to-ferromagnet identity (the open-string convention carries an
    // overall minus; the order parameter is a modulus)
    let dev_string = oracle::kt_string_identity_residual(6, 1, 6).unwrap();
    assert!(dev_string < 1e-10, "string identity dev {dev_string:.2e}");
    // transformed-Hamiltonian identity, parametric and undriven
    let mut p = fig3_params(4, 3);
    p.drive_kind = DriveKind::Parametric;
    p.drive_amp = 0.2;
    let dev_par = oracle::verify_kt_hamiltonian(&p).unwrap();
    assert!(dev_par < 1e-10, "parametric dev {dev_par:.2e}");
    // nonlocal string form of the transformed on-site drive
    p.drive_kind = DriveKind::Onsite;
    p.drive_amp = 0.15;
    let dev_onsite = oracle::verify_kt_hamiltonian(&p).unwrap();
    assert!(dev_onsite < 1e-10, "on-site dev {dev_onsite:.2e}");
    println!(
        "criterion 6: PASS — KT identities, deviations {dev_string:.2e} / {dev_par:.2e} / {dev_onsite:.2e} (< 1e-10)"
    );
}

#[test]
fn criterion_07_trajectories_match_lindblad() {
    // L = 4, d = 3, fig. 4 parameters, t <= 5: ensemble filling and SO within
    // 3 standard errors of dense RK4 integration at 1000 trajectories
    let p = fig4_params(4, 0.05, 3.3, 1.25);
    let pair = (1usize, 4usize);
    let dim = 81usize;
    let mut vac = vec![C64::new(0.0, 0.0); dim];
    vac[0] = C64::new(1.0, 0.0);
    let lind = oracle::lindblad_evolve(&p, &DensityMatrix::pure(&vac), 5.0, 1e-3, 500).unwrap();

    let scheme = TrotterScheme { dt: 0.01, order: TrotterOrder::Second };
    let opts = TrajectoryOptions { obs_stride: 50, site_pair: Some(pair), ..Default::default() };
    let res = run_ensemble(&p, 5.0, &scheme, &CompressionPolicy::exact(), 1000, 4242, &opts).unwrap();
    assert_eq!(res.ensemble.points.len(), lind.times.len());

    let mut worst_f = 0.0f64;
    let mut worst_so = 0.0f64;
    for (k, pt) in res.ensemble.points.iter().enumerate().skip(1) {
        assert!((pt.time - lind.times[k]).abs() < 1e-9);
        let rho = &lind.states[k];
        let (set, fillings) = oracle::density_moments(rho, 4, 3, pair.0, pair.1);
        let n_bar = fillings.iter().sum::<f64>() / 4.0;
        let want = assemble_orders(
            &RawStringSet { g_nn: set.g_nn, g_n1: set.g_n1, g_1n: set.g_1n, g_11: set.g_11 },
            &DensityMoments { n_i: fillings[pair.0 - 1], n_j: fillings[pair.1 - 1], nn: set.nn.re },
            n_bar,
            pair.0,
            pair.1,
        );
        let f_pulls = (pt.filling - n_bar).abs() / pt.filling_se.max(1e-12);
        let so_pulls = (pt.so - want.so).abs() / pt.so_se.max(1e-12);
        worst_f = worst_f.max(f_pulls);
        worst_so = worst_so.max(so_pulls);
        assert!(
            f_pulls <= 3.0,
            "t = {}: filling {} vs {} ({}σ)",
            pt.time,
            pt.filling,
            n_bar,
            f_pulls
        );
        assert!(
            so_pulls <= 3.0,
            "t = {}: SO {} vs {} ({}σ)",
            pt.time,
            pt.so,
            want.so,
            so_pulls
        );
    }

    // pure-loss benchmark: dense integrator reproduces <n>(t) = e^{-γt}
    let mut pl = ModelParams::rotating(2, 3, 0.0);
    pl.hopping = 0.0;
    pl.gamma = 0.05;
    let mut one = vec![C64::new(0.0, 0.0); 9];
    one[1 * 3 + 1] = C64::new(1.0, 0.0); // |1,1>
    let run = oracle::lindblad_evolve(&pl, &DensityMatrix::pure(&one), 5.0, 1e-3, 500).unwrap();
    let mut worst_decay = 0.0f64;
    for (t, rho) in run.times.iter().zip(&run.states) {
        let (_, fillings) = oracle::density_moments(rho, 2, 3, 1, 2);
        let n_bar = (fillings[0] + fillings[1]) / 2.0;
        worst_decay = worst_decay.max((n_bar - (-0.05 * t).exp()).abs());
    }
    assert!(worst_decay < 1e-3, "pure loss deviation {worst_decay:.2e}");
    println!(
        "criterion 7: PASS — worst pulls filling {worst_f:.2}σ, SO {worst_so:.2}σ (≤ 3σ); \
         pure-loss decay deviation {worst_decay:.2e} (< 1e-3)"
    );
}

struct EnsembleSummary {
    peak_so: f64,
    peak_dwo: f64,
    final_so: f64,
    so_at_start: f64,
}

fn summarize(series: &EnsembleSeries) -> EnsembleSummary {
    let peak_so = series.points.iter().map(|p| p.so).fold(0.0f64, f64::max);
    let peak_dwo = series.points.iter().map(|p| p.dwo).fold(0.0f64, f64::max);
    EnsembleSummary {
        peak_so,
        peak_dwo,
        final_so: series.points.last().unwrap().so,
        so_at_start: series.points.first().unwrap().so,
    }
}

fn fig4_ensemble(gamma: f64, v: f64, base_seed: u64) -> EnsembleSummary {
    let p = fig4_params(20, gamma, v, 1.25);
    let scheme = TrotterScheme { dt: 0.025, order: TrotterOrder::Second };
    let policy = CompressionPolicy::new(64);
    let opts = TrajectoryOptions { obs_stride: 8, ..Default::default() };
    let res = run_ensemble(&p, 5.0, &scheme, &policy, 100, base_seed, &opts).unwrap();
    summarize(&res.ensemble)
}

#[test]
fn criterion_08_transient_hidden_order() {
    // desk-scale fig. 4 runs: L = 20, chi = 64, 100 trajectories each
    let base = fig4_ensemble(0.05, 3.3, 1000);
    assert!(base.so_at_start < 1e-12, "SO starts at {}", base.so_at_start);
    assert!(base.peak_so > 0.02, "transient SO peak {}", base.peak_so);
    assert!(
        base.final_so <= 0.5 * base.peak_so,
        "SO should decay by ≥ 50%: peak {} final {}",
        base.peak_so,
        base.final_so
    );
    assert!(
        base.peak_so > base.peak_dwo,
        "hidden order at V = 3.3: SO peak {} vs DWO peak {}",
        base.peak_so,
        base.peak_dwo
    );

    let g10 = fig4_ensemble(0.1, 3.3, 2000);
    let g20 = fig4_ensemble(0.2, 3.3, 3000);
    assert!(
        base.peak_so >= g10.peak_so && g10.peak_so >= g20.peak_so,
        "peak SO must be non-increasing in γ: {:.4} / {:.4} / {:.4}",
        base.peak_so,
        g10.peak_so,
        g20.peak_so
    );

    let v0 = fig4_ensemble(0.05, 0.0, 4000);
    assert!(
        v0.peak_dwo > v0.peak_so,
        "V = 0: DWO peak {} should exceed SO peak {}",
        v0.peak_dwo,
        v0.peak_so
    );

    println!(
        "criterion 8: PASS — SO peak {:.4} (> 0.02, decays to {:.4}); γ-ordering {:.4} ≥ {:.4} ≥ {:.4}; \
         V=0 DWO peak {:.4} > SO peak {:.4}; V=3.3 SO peak exceeds DWO peak {:.4}. \
         (Published-scale peak ≈ 0.05 at L = 50 is reported for comparison, not asserted.)",
        base.peak_so, base.final_so, base.peak_so, g10.peak_so, g20.peak_so,
        v0.peak_dwo, v0.peak_so, base.peak_dwo
    );
}

#[test]
fn criterion_09_circuit_closed_forms() {
    // hand-evaluated corrections at E_J = 1, lambda = 0.4, frozen from an
    // independent evaluation of the closed forms
    let el = ebhsim::circuit::CircuitElements::natural(0.05, 0.35, 3.0 / 79.025, 10.0, 1.0, 0.0);
    let derived = ebhsim::circuit::derived_params(&el).unwrap();
    assert!((derived.lambda - 0.4).abs() < 1e-9);
    assert!((derived.delta_omega - 0.012301384578138274).abs() < 1e-9);
    assert!((derived.u - 0.011815889233748927).abs() < 1e-9);

    let report = ebhsim::circuit::reference_report(ebhsim::circuit::ReferenceInputs::quoted());
    assert_eq!(report.claimed_u_over_j, 10.0);
    assert_eq!(report.claimed_delta_omega_over_omega, 0.02);
    assert!(report.u_over_j.is_finite() && report.u_over_j > 0.0);
    assert!(!report.ambiguity_note.is_empty());
    println!(
        "criterion 9: PASS — λ = {:.3}, δω = {:.9}, U = {:.9} (1e-9 vs hand values); \
         reference report: computed U/J = {:.1}, δω/ω = {:.4} vs claimed 10 / 0.02 (juxtaposed, not asserted)",
        derived.lambda, derived.delta_omega, derived.u, report.u_over_j, report.delta_omega_over_omega
    );
}

#[test]
fn criterion_10_determinism() {
    // identical seeds give bit-identical series; different seeds do not
    let p = fig4_params(4, 0.3, 3.3, 1.25);
    let scheme = TrotterScheme { dt: 0.02, order: TrotterOrder::Second };
    let policy = CompressionPolicy::new(8);
    let opts = TrajectoryOptions { obs_stride: 10, site_pair: Some((1, 4)), ..Default::default() };
    let a = run_ensemble(&p, 1.5, &scheme, &policy, 8, 99, &opts).unwrap();
    let b = run_ensemble(&p, 1.5, &scheme, &policy, 8, 99, &opts).unwrap();
    for (x, y) in a.ensemble.points.iter().zip(&b.ensemble.points) {
        assert_eq!(x.filling.to_bits(), y.filling.to_bits());
        assert_eq!(x.so.to_bits(), y.so.to_bits());
        assert_eq!(x.dwo.to_bits(), y.dwo.to_bits());
        assert_eq!(x.discarded_weight.to_bits(), y.discarded_weight.to_bits());
    }
    for (ta, tb) in a.trajectories.iter().zip(&b.trajectories) {
        assert_eq!(ta.jump_times, tb.jump_times);
    }
    let c = run_ensemble(&p, 1.5, &scheme, &policy, 8, 100, &opts).unwrap();
    let same = a
        .ensemble
        .points
        .iter()
        .zip(&c.ensemble.points)
        .all(|(x, y)| x.filling.to_bits() == y.filling.to_bits());
    assert!(!same, "different seeds should differ");
    println!(
        "criterion 10: PASS — bit-identical ensembles for equal seeds \
         (byte-identical CSV payloads and interrupted-run resume are asserted in the harness suite)"
    );
}

#[test]
fn mu_scan_selects_the_haldane_point() {
    // desk-scale detuning scan at L = 48: the SO-maximizing unit-filled grid
    // point is mu = 7.5
    let p = fig3_params(48, 5);
    let cfg = DmrgConfig {
        chi_max: 64,
        sv_cutoff: 1e-10,
        max_sweeps: 12,
        energy_tol: 1e-8,
        pin_strength: 50.0,
    };
    let scan = scan_mu(&p, &[6.5, 7.0, 7.5, 8.0], &cfg).unwrap();
    assert_eq!(scan.mu_star, 7.5, "rows: {:?}", scan.rows);
    let best = scan.rows.iter().find(|r| r.mu == 7.5).unwrap();
    assert!((best.filling - 1.0).abs() < 0.02);
    // lab-frame bookkeeping: E_L/L = E_R/L + mu at unit filling
    assert!(
        (best.energy_lab_per_site - (best.energy_r_per_site + 7.5 * best.filling)).abs() < 1e-12
    );
    println!(
        "scan: PASS — mu* = 7.5 with SO = {:.4}, filling = {:.4}; E_R/L = {:.4}, E_L/L = {:.4}",
        best.so, best.filling, best.energy_r_per_site, best.energy_lab_per_site
    );
}

#[test]
fn dwo_decays_with_separation_in_the_haldane_state() {
    // separation >= 10 has DWO < 0.01 while SO varies by < 20% between
    // separation 10 and L/2
    let run = hi_baseline();
    let near = observables::orders_of_state(&run.state, 20, 30).unwrap(); // separation 10
    let far = observables::orders_of_state(&run.state, 13, 36).unwrap(); // separation 23
    assert!(near.dwo < 0.01, "DWO at separation 10: {}", near.dwo);
    assert!(far.dwo < 0.01, "DWO at separation 23: {}", far.dwo);
    let rel = (near.so - far.so).abs() / far.so;
    assert!(rel < 0.20, "SO varies {:.1}% between separations", rel * 100.0);
    println!(
        "invariant: PASS — DWO {:.5} / {:.5} at separations 10 / 23 (< 0.01); SO drift {:.1}% (< 20%)",
        near.dwo, far.dwo, rel * 100.0
    );
}

#[test]
fn transient_so_peak_grows_with_drive() {
    // ordering-only check over Ω in {0.75, 1.25}: the stronger drive peaks
    // higher and its hidden order dies out sooner
    let strong = fig4_drive_ensemble(1.25, 5000);
    let weak = fig4_drive_ensemble(0.75, 6000);
    assert!(
        strong.peak_so >= weak.peak_so,
        "peak SO: Ω=1.25 gives {:.4}, Ω=0.75 gives {:.4}",
        strong.peak_so,
        weak.peak_so
    );
    assert!(
        strong.persistence <= weak.persistence,
        "persistence window: Ω=1.25 lasts {:.2}, Ω=0.75 lasts {:.2}",
        strong.persistence,
        weak.persistence
    );
    println!(
        "invariant: PASS — peak SO {:.4} (Ω=1.25) ≥ {:.4} (Ω=0.75); persistence {:.2} ≤ {:.2}",
        strong.peak_so, weak.peak_so, strong.persistence, weak.persistence
    );
}

struct DriveSummary {
    peak_so: f64,
    /// Width of the window where SO exceeds half its peak.
    persistence: f64,
}

fn fig4_drive_ensemble(omega: f64, base_seed: u64) -> DriveSummary {
    let p = fig4_params(20, 0.05, 3.3, omega);
    let scheme = TrotterScheme { dt: 0.025, order: TrotterOrder::Second };
    let policy = CompressionPolicy::new(64);
    let opts = TrajectoryOptions { obs_stride: 8, ..Default::default() };
    let res = run_ensemble(&p, 5.0, &scheme, &policy, 64, base_seed, &opts).unwrap();
    let peak_so = res.ensemble.points.iter().map(|pt| pt.so).fold(0.0f64, f64::max);
    let half = 0.5 * peak_so;
    let above: Vec<f64> = res
        .ensemble
        .points
        .iter()
        .filter(|pt| pt.so > half)
        .map(|pt| pt.time)
        .collect();
    let persistence = match (above.first(), above.last()) {
        (Some(a), Some(b)) => b - a,
        _ => 0.0,
    };
    DriveSummary { peak_so, persistence }
}
