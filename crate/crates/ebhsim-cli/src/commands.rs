//! Subcommand implementations and the dispatch entry point.

use std::collections::BTreeSet;
use std::path::Path;
use std::time::Instant;

use ebhsim::dynamics::{
    self, aggregate, EnsembleSeries, TrajectoryOptions, TrajectoryRecord, TrotterOrder, TrotterScheme,
};
use ebhsim::groundstate::{self, pinned_product_state, DmrgConfig};
use ebhsim::meanfield;
use ebhsim::model::{self, DriveKind, Frame, ModelParams};
use ebhsim::mps::{CompressionPolicy, Mps};
use ebhsim::observables;
use ebhsim::{circuit, oracle};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::config::*;
use crate::io::{self, fmt, RunManifest, TrajectoryFile};
use crate::presets::{self, Preset};
use crate::HarnessError;

pub fn run(cli: Cli) -> Result<RunManifest, HarnessError> {
    match cli.command {
        Command::Groundstate(args) => run_groundstate(args),
        Command::Dynamics(args) => run_dynamics(args),
        Command::Meanfield(args) => run_meanfield(args),
        Command::Oracle(args) => run_oracle(args),
        Command::Circuit(args) => run_circuit(args),
        Command::Preset(args) => run_preset(args),
        Command::Resume(args) => run_resume(args),
    }
}

fn measurement_pair(sites: usize) -> Result<(usize, usize), HarnessError> {
    if sites >= 8 {
        Ok(observables::finite_size_pair(sites)?)
    } else if sites >= 2 {
        Ok((1, sites))
    } else {
        Err(HarnessError::Config("need at least 2 sites".into()))
    }
}

#[derive(Serialize)]
struct GroundResultFile {
    energy: f64,
    energy_r_per_site: f64,
    energy_lab_per_site: f64,
    filling: f64,
    so: f64,
    dwo: f64,
    site_pair: (usize, usize),
    converged: bool,
    sweeps: usize,
    max_chi: usize,
}

fn ground_single(
    params: &ModelParams,
    chi: usize,
    sv_cutoff: f64,
    sweeps: usize,
    energy_tol: f64,
    pin: f64,
) -> Result<(GroundResultFile, groundstate::GroundStateResult), HarnessError> {
    let bare = model::build_mpo(params)?;
    let mpo = if pin > 0.0 { groundstate::pin_edges(&bare, pin) } else { bare.clone() };
    let init = if pin > 0.0 {
        pinned_product_state(params.sites, params.local_cutoff)
    } else {
        Mps::product_state(params.sites, params.local_cutoff, &vec![1; params.sites])?
    };
    let cfg = DmrgConfig { chi_max: chi, sv_cutoff, max_sweeps: sweeps, energy_tol, pin_strength: pin };
    let result = groundstate::dmrg(&mpo, &init, &cfg)?;
    let pair = measurement_pair(params.sites)?;
    let filling = observables::filling(&result.state);
    let orders = observables::orders_of_state(&result.state, pair.0, pair.1)?;
    let e_r = bare.expectation(&result.state).re / params.sites as f64;
    let file = GroundResultFile {
        energy: result.energy,
        energy_r_per_site: e_r,
        energy_lab_per_site: e_r + params.mu() * filling,
        filling,
        so: orders.so,
        dwo: orders.dwo,
        site_pair: pair,
        converged: result.converged,
        sweeps: result.sweep_history.len(),
        max_chi: result.state.max_bond(),
    };
    Ok((file, result))
}

fn run_groundstate(args: GroundstateArgs) -> Result<RunManifest, HarnessError> {
    let t0 = Instant::now();
    let params = args.resolved_model()?;
    if params.frame != Frame::Rotating {
        return Err(HarnessError::Config("ground-state search runs in the rotating frame".into()));
    }
    let dir = &args.out_dir;
    std::fs::create_dir_all(dir)?;
    let terms = model::build_hamiltonian(&params, None)?;
    let config = json!({
        "model": params,
        "chi": args.chi,
        "sv_cutoff": args.sv_cutoff,
        "sweeps": args.sweeps,
        "energy_tol": args.energy_tol,
        "pin": args.pin,
        "scan_mu": args.scan_mu,
        "site_pair": measurement_pair(params.sites).ok(),
        "hamiltonian_terms": terms,
    });
    let mut manifest = RunManifest::new("groundstate", config);

    if let Some(grid) = &args.scan_mu {
        let cfg = DmrgConfig {
            chi_max: args.chi,
            sv_cutoff: args.sv_cutoff,
            max_sweeps: args.sweeps,
            energy_tol: args.energy_tol,
            pin_strength: args.pin,
        };
        let scan = groundstate::scan_mu(&params, grid, &cfg)?;
        let mut csv = String::from("mu,filling,SO,DWO,energy_r_per_site,energy_lab_per_site,converged\n");
        for row in &scan.rows {
            csv.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                fmt(row.mu),
                fmt(row.filling),
                fmt(row.so),
                fmt(row.dwo),
                fmt(row.energy_r_per_site),
                fmt(row.energy_lab_per_site),
                row.converged
            ));
        }
        io::write_text(&dir.join("scan.csv"), &csv)?;
        io::write_json(
            &dir.join("scan.json"),
            &json!({
                "mu_star": scan.mu_star,
                "site_pair": scan.site_pair,
                "rows": scan.rows,
            }),
        )?;
        manifest.outputs = vec!["scan.csv".into(), "scan.json".into()];
        manifest.convergence = json!({ "all_converged": scan.rows.iter().all(|r| r.converged) });
        manifest.wall_time_s = t0.elapsed().as_secs_f64();
        manifest.save(dir)?;
        return Ok(manifest);
    }

    let (file, result) = ground_single(&params, args.chi, args.sv_cutoff, args.sweeps, args.energy_tol, args.pin)?;
    let mut csv = String::from("sweep,energy\n");
    for (k, e) in result.sweep_history.iter().enumerate() {
        csv.push_str(&format!("{},{}\n", k + 1, fmt(*e)));
    }
    io::write_text(&dir.join("sweeps.csv"), &csv)?;
    io::write_json(&dir.join("result.json"), &file)?;
    manifest.outputs = vec!["sweeps.csv".into(), "result.json".into()];
    manifest.convergence = json!({ "converged": result.converged, "sweeps": result.sweep_history });
    manifest.incomplete = !result.converged;
    manifest.wall_time_s = t0.elapsed().as_secs_f64();
    manifest.save(dir)?;
    if !result.converged {
        return Err(HarnessError::Numerical(format!(
            "DMRG did not converge within {} sweeps (see {})",
            args.sweeps,
            dir.display()
        )));
    }
    Ok(manifest)
}

/// Shared ensemble driver with streaming per-trajectory checkpoints: already
/// completed indices are loaded from disk, the rest run in deterministic
/// parallel batches and are written as they finish.
#[allow(clippy::too_many_arguments)]
pub fn ensemble_with_checkpoints(
    params: &ModelParams,
    t_final: f64,
    scheme: &TrotterScheme,
    policy: &CompressionPolicy,
    n_traj: usize,
    base_seed: u64,
    obs_stride: usize,
    save_states: bool,
    dir: &Path,
) -> Result<(EnsembleSeries, Vec<usize>), HarnessError> {
    let pair = measurement_pair(params.sites)?;
    let opts = TrajectoryOptions {
        obs_stride,
        site_pair: Some(pair),
        initial_state: None,
        keep_final_state: save_states,
    };
    let mut records: Vec<Option<TrajectoryRecord>> = (0..n_traj).map(|_| None).collect();
    let mut todo = Vec::new();
    for k in 0..n_traj {
        let path = io::trajectory_path(dir, k);
        if path.exists() {
            let text = std::fs::read_to_string(&path)?;
            let file: TrajectoryFile = serde_json::from_str(&text).map_err(|e| {
                HarnessError::Data(format!("corrupt trajectory checkpoint {}: {e}", path.display()))
            })?;
            if file.seed != base_seed + k as u64 || file.index != k {
                return Err(HarnessError::Data(format!(
                    "trajectory checkpoint {} does not belong to this run (seed mismatch)",
                    path.display()
                )));
            }
            records[k] = Some(file.into_record());
        } else {
            todo.push(k);
        }
    }
    let batch = rayon::current_num_threads().max(1) * 2;
    for chunk in todo.chunks(batch) {
        let done: Vec<(usize, TrajectoryRecord)> = chunk
            .par_iter()
            .map(|&k| {
                dynamics::evolve_trajectory(params, t_final, scheme, policy, base_seed + k as u64, &opts)
                    .map(|r| (k, r))
                    .map_err(HarnessError::from)
            })
            .collect::<Result<Vec<_>, _>>()?;
        for (k, mut rec) in done {
            if save_states {
                if let Some(state) = rec.final_state.take() {
                    state.save(io::state_path(dir, k))?;
                }
            }
            io::write_json(&io::trajectory_path(dir, k), &TrajectoryFile::from_record(k, &rec))?;
            records[k] = Some(rec);
        }
    }
    let records: Vec<TrajectoryRecord> = records.into_iter().map(|r| r.unwrap()).collect();
    let ensemble = aggregate(&records);
    Ok((ensemble, (0..n_traj).collect()))
}

fn trotter_order(order: u8) -> Result<TrotterOrder, HarnessError> {
    match order {
        1 => Ok(TrotterOrder::First),
        2 => Ok(TrotterOrder::Second),
        o => Err(HarnessError::Config(format!("unsupported Trotter order {o}"))),
    }
}

fn dynamics_config_json(
    params: &ModelParams,
    chi: usize,
    sv_cutoff: f64,
    dt: f64,
    order: u8,
    t_final: f64,
    trajectories: usize,
    seed: u64,
    obs_stride: usize,
    save_states: bool,
) -> serde_json::Value {
    let terms = model::build_hamiltonian(params, None).ok();
    let jumps = model::jump_operators(params).ok();
    json!({
        "model": params,
        "chi": chi,
        "sv_cutoff": sv_cutoff,
        "dt": dt,
        "order": order,
        "t_final": t_final,
        "trajectories": trajectories,
        "seed": seed,
        "obs_stride": obs_stride,
        "save_states": save_states,
        "site_pair": measurement_pair(params.sites).ok(),
        "hamiltonian_terms": terms,
        "jump_operators": jumps,
    })
}

fn run_dynamics_inner(
    command: &str,
    params: &ModelParams,
    chi: usize,
    sv_cutoff: f64,
    dt: f64,
    order: u8,
    t_final: f64,
    trajectories: usize,
    seed: u64,
    obs_stride: usize,
    save_states: bool,
    dir: &Path,
) -> Result<RunManifest, HarnessError> {
    let t0 = Instant::now();
    if params.frame != Frame::Rotating {
        return Err(HarnessError::Config("dynamics requires the rotating frame".into()));
    }
    params.validate()?;
    std::fs::create_dir_all(dir)?;
    let scheme = TrotterScheme { dt, order: trotter_order(order)? };
    let policy = CompressionPolicy { chi_max: chi, sv_cutoff };
    let config = dynamics_config_json(
        params, chi, sv_cutoff, dt, order, t_final, trajectories, seed, obs_stride, save_states,
    );
    let mut manifest = RunManifest::new(command, config);
    manifest.seed = Some(seed);

    let (ensemble, completed) = ensemble_with_checkpoints(
        params, t_final, &scheme, &policy, trajectories, seed, obs_stride, save_states, dir,
    )?;
    io::write_text(&dir.join("ensemble.csv"), &io::ensemble_csv(&ensemble))?;
    io::write_json(&dir.join("ensemble.json"), &ensemble)?;
    manifest.outputs = vec!["ensemble.csv".into(), "ensemble.json".into()];
    for &k in &completed {
        manifest.outputs.push(format!("traj_{k:05}.json"));
    }
    manifest.completed_trajectories = completed;
    manifest.wall_time_s = t0.elapsed().as_secs_f64();
    manifest.save(dir)?;
    Ok(manifest)
}

fn run_dynamics(args: DynamicsArgs) -> Result<RunManifest, HarnessError> {
    let params = args.resolved_model()?;
    run_dynamics_inner(
        "dynamics",
        &params,
        args.chi,
        args.sv_cutoff,
        args.dt,
        args.order,
        args.t_final,
        args.trajectories,
        args.seed,
        args.obs_stride,
        args.save_states,
        &args.out_dir,
    )
}

fn run_meanfield(args: MeanfieldArgs) -> Result<RunManifest, HarnessError> {
    let t0 = Instant::now();
    let params = meanfield::LandscapeParams { u: args.u, v: args.v, j: args.j, omega: args.omega };
    let dir = &args.out_dir;
    std::fs::create_dir_all(dir)?;
    let grid = meanfield::landscape(params, (args.b_min, args.b_max), (args.c_min, args.c_max), args.resolution)?;
    let e_min = grid.energies.iter().cloned().fold(f64::INFINITY, f64::min);
    let tol = args.degeneracy_tol.unwrap_or_else(|| meanfield::default_degeneracy_tol(e_min));
    let report = meanfield::find_minima(&grid, args.refine_tol, tol);

    let mut csv = String::from("b,c,E\n");
    for (ib, b) in grid.b_axis.iter().enumerate() {
        for (ic, c) in grid.c_axis.iter().enumerate() {
            csv.push_str(&format!("{},{},{}\n", fmt(*b), fmt(*c), fmt(grid.at(ib, ic))));
        }
    }
    io::write_text(&dir.join("landscape.csv"), &csv)?;
    io::write_json(&dir.join("minima.json"), &report)?;

    let mut manifest = RunManifest::new(
        "meanfield",
        json!({
            "params": params,
            "b_range": [args.b_min, args.b_max],
            "c_range": [args.c_min, args.c_max],
            "resolution": args.resolution,
            "refine_tol": args.refine_tol,
            "degeneracy_tol": tol,
        }),
    );
    manifest.outputs = vec!["landscape.csv".into(), "minima.json".into()];
    manifest.convergence = json!({ "count": report.count, "flat": report.flat });
    manifest.wall_time_s = t0.elapsed().as_secs_f64();
    manifest.save(dir)?;
    Ok(manifest)
}

fn run_oracle(args: OracleArgs) -> Result<RunManifest, HarnessError> {
    let t0 = Instant::now();
    let params = args.resolved_model()?;
    let dir = &args.out_dir;
    std::fs::create_dir_all(dir)?;
    let mut manifest = RunManifest::new("oracle", json!({ "model": params, "task": format!("{:?}", args.task) }));
    match args.task {
        OracleTask::Ground => {
            let (energy, state) = oracle::exact_ground_state(&params)?;
            let rho = oracle::DensityMatrix::pure(&state);
            let pair = measurement_pair(params.sites)?;
            let (_, fillings) = oracle::density_moments(&rho, params.sites, params.local_cutoff, pair.0, pair.1);
            io::write_json(
                &dir.join("ground.json"),
                &json!({
                    "energy": energy,
                    "energy_per_site": energy / params.sites as f64,
                    "fillings": fillings,
                }),
            )?;
            manifest.outputs = vec!["ground.json".into()];
        }
        OracleTask::Spectrum => {
            let sectors = oracle::spectrum_manifolds(&params)?;
            io::write_json(&dir.join("spectrum.json"), &sectors)?;
            manifest.outputs = vec!["spectrum.json".into()];
        }
        OracleTask::Lindblad => {
            let dim = params.local_cutoff.pow(params.sites as u32);
            let mut vac = vec![num_complex::Complex64::new(0.0, 0.0); dim];
            vac[0] = num_complex::Complex64::new(1.0, 0.0);
            let rho0 = oracle::DensityMatrix::pure(&vac);
            let run = oracle::lindblad_evolve(&params, &rho0, args.t_final, args.dt, args.sample_stride)?;
            let pair = measurement_pair(params.sites)?;
            let mut csv = String::from("time,filling,SO,DWO,purity,trace\n");
            for (t, rho) in run.times.iter().zip(&run.states) {
                let (set, fillings) = oracle::density_moments(&rho, params.sites, params.local_cutoff, pair.0, pair.1);
                let n_bar = fillings.iter().sum::<f64>() / params.sites as f64;
                let raw = observables::RawStringSet {
                    g_nn: set.g_nn,
                    g_n1: set.g_n1,
                    g_1n: set.g_1n,
                    g_11: set.g_11,
                };
                let moments = observables::DensityMoments {
                    n_i: fillings[pair.0 - 1],
                    n_j: fillings[pair.1 - 1],
                    nn: set.nn.re,
                };
                let orders = observables::assemble_orders(&raw, &moments, n_bar, pair.0, pair.1);
                csv.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    fmt(*t),
                    fmt(n_bar),
                    fmt(orders.so),
                    fmt(orders.dwo),
                    fmt(rho.purity()),
                    fmt(rho.trace().re)
                ));
            }
            io::write_text(&dir.join("lindblad.csv"), &csv)?;
            manifest.outputs = vec!["lindblad.csv".into()];
        }
    }
    manifest.wall_time_s = t0.elapsed().as_secs_f64();
    manifest.save(dir)?;
    Ok(manifest)
}

fn run_circuit(args: CircuitArgs) -> Result<RunManifest, HarnessError> {
    let t0 = Instant::now();
    let dir = &args.out_dir;
    std::fs::create_dir_all(dir)?;

    #[derive(serde::Deserialize, Default)]
    struct FileElems {
        c: Option<f64>,
        c_j: Option<f64>,
        l: Option<f64>,
        l_prime: Option<f64>,
        e_j_u: Option<f64>,
        e_j_omega: Option<f64>,
    }
    let file: FileElems = match &args.config {
        None => FileElems::default(),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| HarnessError::Config(format!("cannot read config {}: {e}", p.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| HarnessError::Config(format!("invalid config {}: {e}", p.display())))?
        }
    };
    let need = |flag: Option<f64>, file_v: Option<f64>, name: &str| {
        flag.or(file_v)
            .ok_or_else(|| HarnessError::Config(format!("missing circuit element --{name}")))
    };
    let c = need(args.c, file.c, "c")?;
    let c_j = need(args.c_j, file.c_j, "c-j")?;
    let l = need(args.l, file.l, "l")?;
    let l_prime = need(args.l_prime, file.l_prime, "l-prime")?;
    let e_j_u = need(args.e_j_u, file.e_j_u, "e-j-u")?;
    let e_j_omega = file.e_j_omega.unwrap_or(args.e_j_omega);
    let elements = if args.si {
        circuit::CircuitElements::si(c, c_j, l, l_prime, e_j_u, e_j_omega)
    } else {
        circuit::CircuitElements::natural(c, c_j, l, l_prime, e_j_u, e_j_omega)
    };
    let derived = circuit::derived_params(&elements)?;
    let reference = args.reference.then(|| circuit::reference_report(circuit::ReferenceInputs::quoted()));
    io::write_json(
        &dir.join("report.json"),
        &json!({
            "elements": elements,
            "derived": derived,
            "warnings": derived.warnings.iter().map(|w| w.to_string()).collect::<Vec<_>>(),
            "reference": reference,
        }),
    )?;
    let mut outputs = vec!["report.json".to_string()];

    if let Some(spec) = &args.sweep {
        let (name, range) = spec
            .split_once('=')
            .ok_or_else(|| HarnessError::Config("sweep needs name=start:stop:steps".into()))?;
        let parts: Vec<&str> = range.split(':').collect();
        if parts.len() != 3 {
            return Err(HarnessError::Config("sweep needs name=start:stop:steps".into()));
        }
        let lo: f64 = parts[0].parse().map_err(|_| HarnessError::Config("bad sweep start".into()))?;
        let hi: f64 = parts[1].parse().map_err(|_| HarnessError::Config("bad sweep stop".into()))?;
        let steps: usize = parts[2].parse().map_err(|_| HarnessError::Config("bad sweep steps".into()))?;
        if steps < 2 {
            return Err(HarnessError::Config("sweep needs at least 2 steps".into()));
        }
        let mut csv = String::from("value,c_tilde,l_tilde,omega,lambda,delta_omega,U,J,warnings\n");
        for k in 0..steps {
            let v = lo + (hi - lo) * k as f64 / (steps - 1) as f64;
            let mut el = elements;
            match name {
                "c" => el.c = v,
                "c_j" => el.c_j = v,
                "l" => el.l = v,
                "l_prime" => el.l_prime = v,
                "e_j_u" => el.e_j_u = v,
                "e_j_omega" => el.e_j_omega = v,
                other => return Err(HarnessError::Config(format!("unknown sweep element '{other}'"))),
            }
            match circuit::derived_params(&el) {
                Ok(d) => csv.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{}\n",
                    fmt(v),
                    fmt(d.c_tilde),
                    fmt(d.l_tilde),
                    fmt(d.omega),
                    fmt(d.lambda),
                    fmt(d.delta_omega),
                    fmt(d.u),
                    fmt(d.j),
                    d.warnings.len()
                )),
                Err(e) => csv.push_str(&format!("{},,,,,,,,unstable: {e}\n", fmt(v))),
            }
        }
        io::write_text(&dir.join("sweep.csv"), &csv)?;
        outputs.push("sweep.csv".into());
    }

    let mut manifest = RunManifest::new("circuit", json!({ "elements": elements, "si": args.si }));
    manifest.outputs = outputs;
    manifest.wall_time_s = t0.elapsed().as_secs_f64();
    manifest.save(dir)?;
    Ok(manifest)
}

fn run_preset(args: PresetArgs) -> Result<RunManifest, HarnessError> {
    let preset = presets::resolve(&args.name, args.paper_scale)?;
    let dir = args.out_dir.clone();
    match preset {
        Preset::Landscape { name, params } => {
            let mf = MeanfieldArgs {
                u: params.u,
                v: params.v,
                j: params.j,
                omega: params.omega,
                b_min: -2.0,
                b_max: 2.0,
                c_min: -2.0,
                c_max: 2.0,
                resolution: 201,
                refine_tol: 1e-6,
                degeneracy_tol: None,
                out_dir: dir,
            };
            let mut manifest = run_meanfield(mf)?;
            manifest.command = format!("preset:{name}");
            Ok(manifest)
        }
        Preset::GroundScan { name, mut base, chi, omegas, onsite_omegas } => {
            let t0 = Instant::now();
            if let Some(s) = args.sites {
                base.sites = s;
            }
            let chi = args.chi.unwrap_or(chi);
            std::fs::create_dir_all(&dir)?;
            let mut csv = String::from("drive_kind,omega,filling,SO,DWO,energy_r_per_site,converged\n");
            let mut all_converged = true;
            for (kind, omega_list) in [(DriveKind::Parametric, &omegas), (DriveKind::Onsite, &onsite_omegas)] {
                for &omega in omega_list {
                    let mut p = base.clone();
                    p.drive_amp = omega;
                    p.drive_kind = if omega == 0.0 { DriveKind::None } else { kind };
                    let (file, _) = ground_single(&p, chi, 1e-10, 24, 1e-9, 50.0)?;
                    all_converged &= file.converged;
                    let kind_name = match p.drive_kind {
                        DriveKind::None => "none",
                        DriveKind::Parametric => "parametric",
                        DriveKind::Onsite => "onsite",
                    };
                    csv.push_str(&format!(
                        "{},{},{},{},{},{},{}\n",
                        kind_name,
                        fmt(omega),
                        fmt(file.filling),
                        fmt(file.so),
                        fmt(file.dwo),
                        fmt(file.energy_r_per_site),
                        file.converged
                    ));
                }
            }
            io::write_text(&dir.join("fig3.csv"), &csv)?;
            let mut manifest = RunManifest::new(
                &format!("preset:{name}"),
                json!({ "model": base, "chi": chi, "omegas": omegas, "onsite_omegas": onsite_omegas }),
            );
            manifest.outputs = vec!["fig3.csv".into()];
            manifest.convergence = json!({ "all_converged": all_converged });
            manifest.wall_time_s = t0.elapsed().as_secs_f64();
            manifest.save(&dir)?;
            if !all_converged {
                return Err(HarnessError::Numerical("a DMRG point did not converge".into()));
            }
            Ok(manifest)
        }
        Preset::Ensemble { name, mut params, chi, trajectories, t_final, dt } => {
            if let Some(s) = args.sites {
                params.sites = s;
            }
            let chi = args.chi.unwrap_or(chi);
            let trajectories = args.trajectories.unwrap_or(trajectories);
            let seed = args.seed.unwrap_or(1);
            let t_final = args.t_final.unwrap_or(t_final);
            let dt = args.dt.unwrap_or(dt);
            run_dynamics_inner(
                &format!("preset:{name}"),
                &params,
                chi,
                1e-10,
                dt,
                2,
                t_final,
                trajectories,
                seed,
                10,
                false,
                &dir,
            )
        }
    }
}

fn run_resume(args: ResumeArgs) -> Result<RunManifest, HarnessError> {
    let manifest = RunManifest::load(&args.manifest)?;
    let dir = args
        .manifest
        .parent()
        .ok_or_else(|| HarnessError::Data("manifest has no parent directory".into()))?
        .to_path_buf();
    let cfg = &manifest.config;
    let is_dynamics = manifest.command == "dynamics" || manifest.command.starts_with("preset:fig4");
    if !is_dynamics {
        return Err(HarnessError::Config(format!(
            "resume only applies to dynamics runs, not '{}'",
            manifest.command
        )));
    }
    let params: ModelParams = serde_json::from_value(cfg["model"].clone())
        .map_err(|e| HarnessError::Data(format!("manifest model block unreadable: {e}")))?;
    let get_u64 = |k: &str| cfg[k].as_u64().ok_or_else(|| HarnessError::Data(format!("manifest missing {k}")));
    let get_f64 = |k: &str| cfg[k].as_f64().ok_or_else(|| HarnessError::Data(format!("manifest missing {k}")));
    let chi = get_u64("chi")? as usize;
    let sv_cutoff = get_f64("sv_cutoff")?;
    let dt = get_f64("dt")?;
    let order = get_u64("order")? as u8;
    let t_final = get_f64("t_final")?;
    let trajectories = get_u64("trajectories")? as usize;
    let seed = get_u64("seed")?;
    let obs_stride = get_u64("obs_stride")? as usize;
    let save_states = cfg["save_states"].as_bool().unwrap_or(false);

    // validate whatever checkpoints exist before doing any work
    let mut existing = BTreeSet::new();
    for k in 0..trajectories {
        let path = io::trajectory_path(&dir, k);
        if path.exists() {
            let text = std::fs::read_to_string(&path)?;
            let file: TrajectoryFile = serde_json::from_str(&text).map_err(|e| {
                HarnessError::Data(format!("corrupt trajectory checkpoint {}: {e}", path.display()))
            })?;
            if file.seed != seed + k as u64 {
                return Err(HarnessError::Data(format!(
                    "checkpoint {} has seed {} but the manifest implies {}",
                    path.display(),
                    file.seed,
                    seed + k as u64
                )));
            }
            existing.insert(k);
        }
    }
    run_dynamics_inner(
        &manifest.command,
        &params,
        chi,
        sv_cutoff,
        dt,
        order,
        t_final,
        trajectories,
        seed,
        obs_stride,
        save_states,
        &dir,
    )
}
