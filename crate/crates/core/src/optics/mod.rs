//! Photon polarization as a pseudo-spin sensor.
//!
//! Two polarization modes `H` and `V` are truncated at `n_max` photons each.
//! The Stokes operators `S₁ = (n_H − n_V)/2`, `S₂ = (a_H†a_V + a_V†a_H)/2`,
//! `S₃ = −i(a_H†a_V − a_V†a_H)/2` conserve the total photon number `N`, so
//! the heavy lifting is done on complete `N ≤ n_max` blocks where the
//! truncation is exact. Dense full-space matrices are available for small
//! cutoffs.

mod fock;
mod interferometer;

pub use fock::{
    coherent_state, selection_traces, stokes_operators, BlockState, FockSpace, FockTruncation,
    SelectionTraces, Stokes, StokesOperators, TraceTriple,
};
pub use interferometer::{
    interferometer_amplitudes, network_outputs, MeasurementBasis, OutputAmplitudes, SensorConfig,
};
