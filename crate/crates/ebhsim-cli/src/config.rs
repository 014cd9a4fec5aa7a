//! Command-line surface and the flag/config-file merge.
//!
//! Every physical option is optional on the command line; values omitted there
//! are taken from `--config <file.json>` (same key names), and whatever is
//! still unset falls back to the documented defaults. Flags always win.

use clap::{Args, Parser, Subcommand, ValueEnum};
use ebhsim::model::{DriveKind, Frame, ModelParams};
use serde::{Deserialize, Serialize};

use crate::HarnessError;

#[derive(Debug, Parser)]
#[command(name = "ebhsim", version, about = "Driven-dissipative extended Bose-Hubbard lattice simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// DMRG ground-state search (optionally a detuning scan).
    Groundstate(GroundstateArgs),
    /// Quantum-trajectory TEBD ensemble evolution.
    Dynamics(DynamicsArgs),
    /// Mean-field energy landscape and degenerate minima.
    Meanfield(MeanfieldArgs),
    /// Dense brute-force reference runs.
    Oracle(OracleArgs),
    /// Circuit parameter extraction.
    Circuit(CircuitArgs),
    /// Figure-preset runs with fixed physical parameters.
    Preset(PresetArgs),
    /// Complete the missing trajectories of an interrupted dynamics run.
    Resume(ResumeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriveKindArg {
    None,
    Parametric,
    Onsite,
}

impl From<DriveKindArg> for DriveKind {
    fn from(k: DriveKindArg) -> Self {
        match k {
            DriveKindArg::None => DriveKind::None,
            DriveKindArg::Parametric => DriveKind::Parametric,
            DriveKindArg::Onsite => DriveKind::Onsite,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrameArg {
    Lab,
    Rotating,
}

/// Model flags shared by the physics subcommands; everything is in units of
/// the hopping `J = 1`.
#[derive(Debug, Clone, Args, Serialize, Deserialize, Default)]
pub struct ModelFlags {
    /// Number of lattice sites.
    #[arg(long)]
    pub sites: Option<usize>,
    /// Local Hilbert-space dimension (max photons per site + 1).
    #[arg(long)]
    pub cutoff: Option<usize>,
    /// Detuning mu = omega_d - omega_r.
    #[arg(long)]
    pub mu: Option<f64>,
    /// On-site Kerr U.
    #[arg(long)]
    pub onsite_u: Option<f64>,
    /// Cross-Kerr V.
    #[arg(long)]
    pub cross_v: Option<f64>,
    /// Drive amplitude.
    #[arg(long)]
    pub drive_amp: Option<f64>,
    /// Drive kind.
    #[arg(long, value_enum)]
    pub drive_kind: Option<DriveKindArg>,
    /// Photon loss rate.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Reference frame (dynamics and MPO work require rotating).
    #[arg(long, value_enum)]
    pub frame: Option<FrameArg>,
}

impl ModelFlags {
    /// Merge: self (flags) wins over `other` (config file).
    pub fn merged_under(mut self, other: &ModelFlags) -> Self {
        self.sites = self.sites.or(other.sites);
        self.cutoff = self.cutoff.or(other.cutoff);
        self.mu = self.mu.or(other.mu);
        self.onsite_u = self.onsite_u.or(other.onsite_u);
        self.cross_v = self.cross_v.or(other.cross_v);
        self.drive_amp = self.drive_amp.or(other.drive_amp);
        self.drive_kind = self.drive_kind.or(other.drive_kind);
        self.gamma = self.gamma.or(other.gamma);
        self.frame = self.frame.or(other.frame);
        self
    }

    pub fn resolve(&self, defaults: &ModelParams) -> Result<ModelParams, HarnessError> {
        let mut p = defaults.clone();
        if let Some(v) = self.sites {
            p.sites = v;
        }
        if let Some(v) = self.cutoff {
            p.local_cutoff = v;
        }
        if let Some(v) = self.mu {
            p.set_mu(v);
        }
        if let Some(v) = self.onsite_u {
            p.onsite_u = v;
        }
        if let Some(v) = self.cross_v {
            p.cross_v = v;
        }
        if let Some(v) = self.drive_amp {
            p.drive_amp = v;
        }
        if let Some(k) = self.drive_kind {
            p.drive_kind = k.into();
        }
        if let Some(v) = self.gamma {
            p.gamma = v;
        }
        if let Some(f) = self.frame {
            p.frame = match f {
                FrameArg::Lab => Frame::Lab,
                FrameArg::Rotating => Frame::Rotating,
            };
        }
        p.validate().map_err(|e| HarnessError::Config(e.to_string()))?;
        Ok(p)
    }
}

fn load_config_flags(path: &Option<std::path::PathBuf>) -> Result<ModelFlags, HarnessError> {
    match path {
        None => Ok(ModelFlags::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| HarnessError::Config(format!("cannot read config {}: {e}", p.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| HarnessError::Config(format!("invalid config {}: {e}", p.display())))
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct GroundstateArgs {
    #[command(flatten)]
    pub model: ModelFlags,
    /// Optional JSON file supplying defaults for the model flags.
    #[arg(long)]
    pub config: Option<std::path::PathBuf>,
    /// Maximal bond dimension.
    #[arg(long, default_value_t = 64)]
    pub chi: usize,
    /// Relative singular-value floor.
    #[arg(long, default_value_t = 1e-10)]
    pub sv_cutoff: f64,
    #[arg(long, default_value_t = 24)]
    pub sweeps: usize,
    /// Relative per-sweep energy change that counts as converged.
    #[arg(long, default_value_t = 1e-9)]
    pub energy_tol: f64,
    /// Edge pinning strength; 0 disables pinning.
    #[arg(long, default_value_t = 50.0)]
    pub pin: f64,
    /// Comma-separated detuning grid; runs the scan driver instead of a
    /// single ground-state search.
    #[arg(long, value_delimiter = ',')]
    pub scan_mu: Option<Vec<f64>>,
    #[arg(long, default_value = "out")]
    pub out_dir: std::path::PathBuf,
}

impl GroundstateArgs {
    pub fn resolved_model(&self) -> Result<ModelParams, HarnessError> {
        let file = load_config_flags(&self.config)?;
        let merged = self.model.clone().merged_under(&file);
        let mut defaults = ModelParams::rotating(48, 5, 7.5);
        defaults.onsite_u = 5.0;
        defaults.cross_v = 3.3;
        merged.resolve(&defaults)
    }
}

#[derive(Debug, Clone, Args)]
pub struct DynamicsArgs {
    #[command(flatten)]
    pub model: ModelFlags,
    #[arg(long)]
    pub config: Option<std::path::PathBuf>,
    #[arg(long, default_value_t = 64)]
    pub chi: usize,
    #[arg(long, default_value_t = 1e-10)]
    pub sv_cutoff: f64,
    /// Trotter step (units of 1/J).
    #[arg(long, default_value_t = 0.01)]
    pub dt: f64,
    /// Trotter order (1 or 2).
    #[arg(long, default_value_t = 2)]
    pub order: u8,
    #[arg(long, default_value_t = 6.0)]
    pub t_final: f64,
    #[arg(long, default_value_t = 100)]
    pub trajectories: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Observables are recorded every this many steps.
    #[arg(long, default_value_t = 10)]
    pub obs_stride: usize,
    /// Also checkpoint each trajectory's final state in the MPS binary format.
    #[arg(long, default_value_t = false)]
    pub save_states: bool,
    #[arg(long, default_value = "out")]
    pub out_dir: std::path::PathBuf,
}

impl DynamicsArgs {
    pub fn resolved_model(&self) -> Result<ModelParams, HarnessError> {
        let file = load_config_flags(&self.config)?;
        let merged = self.model.clone().merged_under(&file);
        let mut defaults = ModelParams::rotating(20, 5, 6.28);
        defaults.onsite_u = 5.0;
        defaults.cross_v = 3.3;
        defaults.gamma = 0.05;
        defaults.drive_amp = 1.25;
        defaults.drive_kind = DriveKind::Parametric;
        merged.resolve(&defaults)
    }
}

#[derive(Debug, Clone, Args)]
pub struct MeanfieldArgs {
    #[arg(long, default_value_t = 5.0)]
    pub u: f64,
    #[arg(long, default_value_t = 2.8)]
    pub v: f64,
    #[arg(long, default_value_t = 1.0)]
    pub j: f64,
    #[arg(long, default_value_t = 0.0)]
    pub omega: f64,
    #[arg(long, default_value_t = -2.0)]
    pub b_min: f64,
    #[arg(long, default_value_t = 2.0)]
    pub b_max: f64,
    #[arg(long, default_value_t = -2.0)]
    pub c_min: f64,
    #[arg(long, default_value_t = 2.0)]
    pub c_max: f64,
    #[arg(long, default_value_t = 201)]
    pub resolution: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub refine_tol: f64,
    /// Energy window for degeneracy counting; default scales with |E_min|.
    #[arg(long)]
    pub degeneracy_tol: Option<f64>,
    #[arg(long, default_value = "out")]
    pub out_dir: std::path::PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OracleTask {
    /// Exact ground state of the dense Hamiltonian.
    Ground,
    /// Number-sector spectra of the undriven Hamiltonian.
    Spectrum,
    /// Dense Lindblad integration from the vacuum.
    Lindblad,
}

#[derive(Debug, Clone, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub model: ModelFlags,
    #[arg(long)]
    pub config: Option<std::path::PathBuf>,
    #[arg(long, value_enum)]
    pub task: OracleTask,
    /// Integration horizon for the Lindblad task.
    #[arg(long, default_value_t = 5.0)]
    pub t_final: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    #[arg(long, default_value_t = 100)]
    pub sample_stride: usize,
    #[arg(long, default_value = "out")]
    pub out_dir: std::path::PathBuf,
}

impl OracleArgs {
    pub fn resolved_model(&self) -> Result<ModelParams, HarnessError> {
        let file = load_config_flags(&self.config)?;
        let merged = self.model.clone().merged_under(&file);
        let mut defaults = ModelParams::rotating(4, 3, 6.28);
        defaults.onsite_u = 5.0;
        defaults.cross_v = 3.3;
        merged.resolve(&defaults)
    }
}

#[derive(Debug, Clone, Args)]
pub struct CircuitArgs {
    /// Coupling capacitance.
    #[arg(long)]
    pub c: Option<f64>,
    /// Junction capacitance.
    #[arg(long)]
    pub c_j: Option<f64>,
    /// Coupling inductance.
    #[arg(long)]
    pub l: Option<f64>,
    /// Shunt inductance.
    #[arg(long)]
    pub l_prime: Option<f64>,
    /// On-site junction energy.
    #[arg(long)]
    pub e_j_u: Option<f64>,
    /// Pump junction energy.
    #[arg(long, default_value_t = 0.0)]
    pub e_j_omega: f64,
    /// Key-value JSON file with the same element names.
    #[arg(long)]
    pub config: Option<std::path::PathBuf>,
    /// Treat inputs as SI units (farads, henries, joules).
    #[arg(long, default_value_t = false)]
    pub si: bool,
    /// Also emit the quoted-reference-point report.
    #[arg(long, default_value_t = false)]
    pub reference: bool,
    /// Sweep one element: `name=start:stop:steps` (emits CSV).
    #[arg(long)]
    pub sweep: Option<String>,
    #[arg(long, default_value = "out")]
    pub out_dir: std::path::PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct PresetArgs {
    /// One of: fig2a, fig2b, fig3, fig4a..fig4i.
    #[arg(long)]
    pub name: String,
    /// Desk-scale overrides (presets fix all physical parameters).
    #[arg(long)]
    pub sites: Option<usize>,
    #[arg(long)]
    pub chi: Option<usize>,
    #[arg(long)]
    pub trajectories: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub t_final: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    /// Run at the published scale instead of the desk scale.
    #[arg(long, default_value_t = false)]
    pub paper_scale: bool,
    #[arg(long, default_value = "out")]
    pub out_dir: std::path::PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct ResumeArgs {
    /// Manifest of the interrupted dynamics run.
    #[arg(long)]
    pub manifest: std::path::PathBuf,
}
