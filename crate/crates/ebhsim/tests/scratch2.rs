use ebhsim::dynamics::*;
use ebhsim::model::{DriveKind, ModelParams};
use ebhsim::mps::CompressionPolicy;
use std::time::Instant;

fn fig4(gamma: f64, v: f64) -> ModelParams {
    let mut p = ModelParams::rotating(20, 5, 6.28);
    p.onsite_u = 5.0;
    p.cross_v = v;
    p.gamma = gamma;
    p.drive_amp = 1.25;
    p.drive_kind = DriveKind::Parametric;
    p
}

#[test]
fn ensemble_pilot() {
    let policy = CompressionPolicy::new(64);
    let scheme = TrotterScheme { dt: 0.025, order: TrotterOrder::Second };
    let opts = TrajectoryOptions { obs_stride: 8, ..Default::default() };
    for (label, gamma, v) in [
        ("g05_v33", 0.05, 3.3),
        ("g10_v33", 0.1, 3.3),
        ("g20_v33", 0.2, 3.3),
        ("g05_v00", 0.05, 0.0),
    ] {
        let p = fig4(gamma, v);
        let t0 = Instant::now();
        let res = run_ensemble(&p, 5.0, &scheme, &policy, 24, 1000, &opts).unwrap();
        let peak_so = res.ensemble.points.iter().cloned().fold((0.0f64, 0.0f64), |acc, pt| {
            if pt.so > acc.0 { (pt.so, pt.time) } else { acc }
        });
        let peak_dwo = res.ensemble.points.iter().map(|pt| pt.dwo).fold(0.0f64, f64::max);
        let last = res.ensemble.points.last().unwrap();
        println!(
            "{label}: wall {:.0?} | peak SO {:.4} @ t={:.2} (se {:.4}), peak DWO {:.4}, final SO {:.4}",
            t0.elapsed(),
            peak_so.0,
            peak_so.1,
            res.ensemble.points.iter().map(|pt| pt.so_se).fold(0.0f64, f64::max),
            peak_dwo,
            last.so
        );
    }
}
