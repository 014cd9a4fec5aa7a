//! Output files: CSV writers with fixed column layouts, the run manifest, and
//! per-trajectory checkpoints.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use ebhsim::dynamics::{EnsembleSeries, ObservableSeries, TrajectoryRecord};
use serde::{Deserialize, Serialize};

use crate::HarnessError;

/// Deterministic float formatting used in every CSV cell.
pub fn fmt(v: f64) -> String {
    format!("{v:.12e}")
}

pub fn write_text(path: &Path, text: &str) -> Result<(), HarnessError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut f = fs::File::create(path)?;
    f.write_all(text.as_bytes())?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), HarnessError> {
    let text = serde_json::to_string_pretty(value)?;
    write_text(path, &(text + "\n"))
}

/// Ensemble CSV: one row per recorded time.
pub fn ensemble_csv(series: &EnsembleSeries) -> String {
    let mut out = String::from(
        "time,filling,filling_se,SO,SO_se,DWO,DWO_se,max_chi,discarded_weight\n",
    );
    for p in &series.points {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            fmt(p.time),
            fmt(p.filling),
            fmt(p.filling_se),
            fmt(p.so),
            fmt(p.so_se),
            fmt(p.dwo),
            fmt(p.dwo_se),
            p.max_chi,
            fmt(p.discarded_weight),
        ));
    }
    out
}

/// Serializable slice of a trajectory (the state checkpoint lives in a
/// separate binary file when requested).
#[derive(Debug, Serialize, Deserialize)]
pub struct TrajectoryFile {
    pub index: usize,
    pub seed: u64,
    pub jump_times: Vec<(f64, usize)>,
    pub series: ObservableSeries,
}

impl TrajectoryFile {
    pub fn from_record(index: usize, rec: &TrajectoryRecord) -> Self {
        Self {
            index,
            seed: rec.seed,
            jump_times: rec.jump_times.clone(),
            series: rec.series.clone(),
        }
    }

    pub fn into_record(self) -> TrajectoryRecord {
        TrajectoryRecord {
            seed: self.seed,
            jump_times: self.jump_times,
            series: self.series,
            final_state: None,
        }
    }
}

pub fn trajectory_path(dir: &Path, index: usize) -> PathBuf {
    dir.join(format!("traj_{index:05}.json"))
}

pub fn state_path(dir: &Path, index: usize) -> PathBuf {
    dir.join(format!("traj_{index:05}.mps"))
}

/// Everything needed to reproduce and resume a run.
#[derive(Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub command: String,
    pub code_version: String,
    /// Fully resolved configuration (JSON object, command-specific).
    pub config: serde_json::Value,
    pub seed: Option<u64>,
    pub outputs: Vec<String>,
    pub wall_time_s: f64,
    /// Trajectory indices with a completed checkpoint on disk.
    pub completed_trajectories: Vec<usize>,
    pub incomplete: bool,
    pub convergence: serde_json::Value,
}

impl RunManifest {
    pub fn new(command: &str, config: serde_json::Value) -> Self {
        Self {
            schema_version: 1,
            command: command.to_string(),
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            config,
            seed: None,
            outputs: Vec::new(),
            wall_time_s: 0.0,
            completed_trajectories: Vec::new(),
            incomplete: false,
            convergence: serde_json::Value::Null,
        }
    }

    pub fn save(&self, dir: &Path) -> Result<(), HarnessError> {
        write_json(&dir.join("manifest.json"), self)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = fs::read_to_string(path)
            .map_err(|e| HarnessError::Data(format!("cannot read manifest {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| HarnessError::Data(format!("corrupt manifest {}: {e}", path.display())))
    }
}
