//! Simulation workbench for quantum nonlinear spectroscopy with sequential
//! weak Faraday-rotation measurements.
//!
//! The crate is organised bottom-up:
//!
//! * [`quantum`] dense operator algebra, spin constructors and target models;
//! * [`correlations`] time-ordered superoperator correlations `C^{η_K…η_1}`;
//! * [`optics`] polarization pseudo-spin on a truncated two-mode Fock space
//!   and the polarizing Mach-Zehnder network;
//! * [`weak`] the per-shot measurement maps and the sequential correlation `G^(K)`;
//! * [`trajectory`] photon-counting Monte Carlo of the full protocol;
//! * [`snr`] closed-form signal-to-noise and material feasibility estimates.
//!
//! Tensor products of sensor and target are always ordered `sensor ⊗ target`.

pub mod correlations;
mod error;
pub mod exec;
pub mod optics;
pub mod quantum;
pub mod snr;
pub mod trajectory;
pub mod weak;

pub use error::{Error, Result};
pub use exec::Execution;
pub use quantum::{DensityMatrix, Operator, TargetModel, Tolerances, TOLERANCES};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
