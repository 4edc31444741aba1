//! Exact solver for the finite Kronig–Penney model: a hard-wall box holding
//! delta scatterers at arbitrary positions with arbitrary heights.
//!
//! Natural units `m = ħ = 1` are used throughout; a quasimomentum `k`
//! carries energy `k²/2`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bethe;
pub mod eigensolve;
pub mod error;
pub mod model;
pub mod oracle;
pub mod roots;
pub mod sweeps;
pub mod topology;
pub mod wavefunction;

pub use bethe::{bethe_mismatch, bethe_polynomial_form, transfer_matrix};
pub use eigensolve::{
    count_states_below, find_roots, QuasimomentumRoot, SolverConfig, SolverOptions,
};
pub use error::{Error, Result};
pub use model::{InstanceSpec, ScattererSet};
pub use oracle::{compare, fd_spectrum, FdSpectrum};
pub use sweeps::{
    sweep_flux, sweep_shift, FluxSweep, Grid, HeightsSpec, Provenance, ShiftSweep, SweepTable,
};
pub use topology::{
    bloch_bands, bloch_state, bulk_gaps, chern_number, BandGap, BlochState, ChernResult, UnitCell,
};
pub use wavefunction::{build_state, density_grid, edge_weight, EigenState};

/// Shortest decimal representation that round-trips to the same `f64`.
pub fn format_float(x: f64) -> String {
    format!("{x:?}")
}
