//! Dense complex operator algebra and spin-system constructors.

mod model;
mod operator;
mod spin;

pub use model::{InitialState, TargetModel};
pub use operator::{
    hermitian_expm, kron, matmul, partial_trace_sensor, thermal_state, DensityMatrix,
    HermitianEigen, Operator,
};
pub use spin::{pauli, spin_operators, SpinOperators};

/// Numerical tolerances shared by every module.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// Hermiticity, unit trace and positivity of states and models.
    pub structural: f64,
    /// `‖U†U − I‖_max` for computed unitaries.
    pub unitarity: f64,
    /// Eigenvalues closer than this are clustered into one spectral projector.
    pub degeneracy: f64,
    /// Largest imaginary part tolerated in a trace that must be real.
    pub imaginary_residue: f64,
}

pub const TOLERANCES: Tolerances = Tolerances {
    structural: 1e-10,
    unitarity: 1e-9,
    degeneracy: 1e-9,
    imaginary_residue: 1e-10,
};
