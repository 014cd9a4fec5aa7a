//! Experiment harness behind the `ebhsim` binary: figure presets, ad-hoc
//! parameter runs, deterministic seeded trajectory ensembles with
//! checkpoint/resume, and CSV/JSON emission.
//!
//! Exit codes: 0 success, 64 configuration error, 65 data error (missing or
//! corrupt files), 70 numerical failure (non-convergence, divergence).

pub mod commands;
pub mod config;
pub mod io;
pub mod presets;

use std::fmt;

#[derive(Debug)]
pub enum HarnessError {
    Config(String),
    Data(String),
    Numerical(String),
}

impl fmt::Display for HarnessError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HarnessError::Config(m) => write!(f, "configuration error: {m}"),
            HarnessError::Data(m) => write!(f, "data error: {m}"),
            HarnessError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl std::error::Error for HarnessError {}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 64,
            HarnessError::Data(_) => 65,
            HarnessError::Numerical(_) => 70,
        }
    }
}

impl From<std::io::Error> for HarnessError {
    fn from(e: std::io::Error) -> Self {
        HarnessError::Data(e.to_string())
    }
}

impl From<serde_json::Error> for HarnessError {
    fn from(e: serde_json::Error) -> Self {
        HarnessError::Data(e.to_string())
    }
}

impl From<ebhsim::model::ModelError> for HarnessError {
    fn from(e: ebhsim::model::ModelError) -> Self {
        HarnessError::Config(e.to_string())
    }
}

impl From<ebhsim::groundstate::DmrgError> for HarnessError {
    fn from(e: ebhsim::groundstate::DmrgError) -> Self {
        use ebhsim::groundstate::DmrgError::*;
        match e {
            Model(ref m) => HarnessError::Config(m.to_string()),
            EmptyGrid => HarnessError::Config(e.to_string()),
            _ => HarnessError::Numerical(e.to_string()),
        }
    }
}

impl From<ebhsim::dynamics::DynamicsError> for HarnessError {
    fn from(e: ebhsim::dynamics::DynamicsError) -> Self {
        use ebhsim::dynamics::DynamicsError::*;
        match e {
            Model(ref m) => HarnessError::Config(m.to_string()),
            RotatingFrameRequired | TooFewSites | NonPositiveStep(_) => {
                HarnessError::Config(e.to_string())
            }
            _ => HarnessError::Numerical(e.to_string()),
        }
    }
}

impl From<ebhsim::meanfield::MeanFieldError> for HarnessError {
    fn from(e: ebhsim::meanfield::MeanFieldError) -> Self {
        HarnessError::Config(e.to_string())
    }
}

impl From<ebhsim::circuit::CircuitError> for HarnessError {
    fn from(e: ebhsim::circuit::CircuitError) -> Self {
        HarnessError::Config(e.to_string())
    }
}

impl From<ebhsim::oracle::OracleError> for HarnessError {
    fn from(e: ebhsim::oracle::OracleError) -> Self {
        HarnessError::Numerical(e.to_string())
    }
}

impl From<ebhsim::observables::ObservablesError> for HarnessError {
    fn from(e: ebhsim::observables::ObservablesError) -> Self {
        HarnessError::Config(e.to_string())
    }
}

impl From<ebhsim::mps::MpsError> for HarnessError {
    fn from(e: ebhsim::mps::MpsError) -> Self {
        HarnessError::Data(e.to_string())
    }
}

/// Configure the global worker pool from `EBHSIM_WORKERS` (best effort; the
/// pool may already be initialized in-process).
pub fn init_workers() {
    if let Ok(val) = std::env::var("EBHSIM_WORKERS") {
        if let Ok(n) = val.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
        }
    }
}
