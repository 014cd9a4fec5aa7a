//! Property-based invariants: gauge freedom, compression accounting,
//! Hermiticity over the parameter space, and landscape symmetries.

use ebhsim::meanfield::energy_real;
use ebhsim::model::{self, number, DriveKind, Frame, ModelParams};
use ebhsim::mps::{CompressionPolicy, Mps};
use num_complex::Complex64 as C64;
use proptest::prelude::*;

fn max_dev(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 16, ..ProptestConfig::default() })]

    #[test]
    fn gauge_invariance_of_expectations(seed in 0u64..1000, center in 1usize..=6) {
        let mps = Mps::random(6, 3, 8, seed);
        let n = number(3);
        let before: Vec<C64> = mps.expect_local_all(&n);
        let phase = ebhsim::observables::phase_string_op(3);
        let s_before = mps.string_correlator(&n, &phase, &n, 2, 5).unwrap();
        let mut moved = mps.clone();
        moved.canonicalize(center);
        let after: Vec<C64> = moved.expect_local_all(&n);
        for (x, y) in before.iter().zip(&after) {
            prop_assert!((x - y).norm() < 1e-12);
        }
        let s_after = moved.string_correlator(&n, &phase, &n, 2, 5).unwrap();
        prop_assert!((s_before - s_after).norm() < 1e-12);
    }

    #[test]
    fn no_discarded_weight_below_the_cap(seed in 0u64..1000) {
        // a random two-site unitary on a chi=4 state cannot exceed chi=12 on
        // the touched bond; with chi_max comfortably above, nothing is dropped
        let mut mps = Mps::random(5, 3, 4, seed);
        let mut h = vec![C64::new(0.0, 0.0); 81];
        let mut rng_state = seed.wrapping_mul(0x9E3779B97F4A7C15).wrapping_add(1);
        let mut next = || {
            rng_state ^= rng_state << 13;
            rng_state ^= rng_state >> 7;
            rng_state ^= rng_state << 17;
            (rng_state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        for i in 0..9 {
            for j in 0..=i {
                let z = C64::new(next(), next());
                h[i + j * 9] = z;
                h[j + i * 9] = z.conj();
            }
        }
        let gate = ebhsim::linalg::expm_hermitian(&h, 9, C64::new(0.0, -0.4));
        let before = mps.to_dense();
        mps.apply_two_site_gate(&gate, 2, &CompressionPolicy { chi_max: 64, sv_cutoff: 0.0 }).unwrap();
        prop_assert!(mps.trunc_log.iter().all(|&w| w < 1e-24), "trunc {:?}", mps.trunc_log);
        let after = mps.to_dense();
        let applied = ebhsim::oracle::apply_two_site_gate_dense(&before, &gate, 2, 5, 3);
        prop_assert!(max_dev(&after, &applied) < 1e-11);
    }

    #[test]
    fn hamiltonians_are_hermitian_everywhere(
        mu in -8.0..8.0f64,
        u in 0.0..8.0f64,
        v in 0.0..4.0f64,
        omega in 0.0..2.0f64,
        kind in 0usize..3,
        lab in proptest::bool::ANY,
        t in 0.0..5.0f64,
    ) {
        let mut p = ModelParams::rotating(3, 3, mu);
        p.onsite_u = u;
        p.cross_v = v;
        p.drive_amp = omega;
        p.drive_kind = [DriveKind::None, DriveKind::Parametric, DriveKind::Onsite][kind];
        let t_arg = if lab {
            p.frame = Frame::Lab;
            p.omega_d = mu;
            Some(t)
        } else {
            None
        };
        let h = model::build_hamiltonian(&p, t_arg).unwrap().to_dense();
        let dim = 27;
        for r in 0..dim {
            for c in 0..=r {
                prop_assert!((h[r + c * dim] - h[c + r * dim].conj()).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn landscape_symmetries(
        b in -2.0..2.0f64,
        c in -2.0..2.0f64,
        u in 0.0..8.0f64,
        v in 0.0..4.0f64,
        omega in 0.0..1.0f64,
    ) {
        let e = energy_real(b, c, u, v, 1.0, omega);
        prop_assert!((e - energy_real(-b, -c, u, v, 1.0, omega)).abs() < 1e-12);
        prop_assert!((e - energy_real(c, b, u, v, 1.0, omega)).abs() < 1e-12);
        // extra reflections exactly when the drive term vanishes
        let e0 = energy_real(b, c, u, v, 1.0, 0.0);
        prop_assert!((e0 - energy_real(-b, c, u, v, 1.0, 0.0)).abs() < 1e-12);
        prop_assert!((e0 - energy_real(b, -c, u, v, 1.0, 0.0)).abs() < 1e-12);
    }

    #[test]
    fn checkpoint_roundtrip(seed in 0u64..1000) {
        let dir = std::env::temp_dir().join(format!("ebhsim_prop_io_{seed}"));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("state.mps");
        let mps = Mps::random(4, 3, 5, seed);
        mps.save(&path).unwrap();
        let back = Mps::load(&path).unwrap();
        prop_assert!((back.overlap(&mps).norm() - 1.0).abs() < 1e-12);
        std::fs::remove_dir_all(&dir).ok();
    }
}
