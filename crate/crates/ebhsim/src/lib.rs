//! Simulation library for one-dimensional driven-dissipative nonlinear photonic
//! lattices of the extended Bose-Hubbard type.
//!
//! The crate provides:
//!
//! * [`model`] — bosonic Hamiltonians (lab and rotating frame), parametric and
//!   on-site drives, loss operators, and the spin-1 chain mapping;
//! * [`mps`] — a dense complex matrix-product-state/operator kernel with
//!   truncated two-site updates and string correlators;
//! * [`groundstate`] — two-site DMRG with edge pinning and a detuning scan;
//! * [`dynamics`] — quantum-trajectory TEBD evolution of the lossy chain and
//!   deterministic ensemble aggregation;
//! * [`observables`] — filling, string order, and density-wave order;
//! * [`meanfield`] — the variational energy landscape of the transformed spin
//!   chain and degenerate-minima counting;
//! * [`oracle`] — dense brute-force references (exact diagonalization, Lindblad
//!   integration, the Kennedy-Tasaki unitary) used to validate everything else;
//! * [`circuit`] — circuit-QED parameter extraction for a lattice
//!   implementation.
//!
//! Energies are expressed in units of the hopping strength `J`; time in units
//! of `1/J` (`ħ = 1`).

pub mod circuit;
pub mod dynamics;
pub mod groundstate;
pub mod linalg;
pub mod meanfield;
pub mod model;
pub mod mps;
pub mod observables;
pub mod oracle;
pub(crate) mod tensor;

pub use model::{DriveKind, Frame, ModelParams};
pub use mps::{CompressionPolicy, Mpo, Mps};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
