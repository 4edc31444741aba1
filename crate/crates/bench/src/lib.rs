//! Benchmark fixtures.

use kp_core::model::{modulated_lattice, uniform_lattice};
use kp_core::{FluxSweep, Grid, HeightsSpec, ScattererSet, ShiftSweep, SolverOptions, UnitCell};

/// Equidistant lattice of 11 barriers, `h = 0.4`, in a box of length 11.
pub fn edge_lattice(delta: f64) -> ScattererSet {
    uniform_lattice(11.0, 11, 0.4, delta).expect("valid lattice")
}

/// Cosine-modulated lattice of 17 barriers with mixed-sign heights.
pub fn mixed_lattice(phi: f64) -> ScattererSet {
    modulated_lattice(18.0, 17, -0.5, 0.5, phi).expect("valid lattice")
}

pub fn unit_cell() -> UnitCell {
    UnitCell::single(1.0, 0.4).expect("valid cell")
}

pub fn shift_sweep(points: usize) -> ShiftSweep {
    ShiftSweep {
        length: 11.0,
        count: 11,
        heights: HeightsSpec::Uniform { h: 0.4 },
        delta: Grid {
            start: -1.0,
            stop: 1.0,
            points,
        },
        k_max: 7.0,
        options: SolverOptions::default(),
    }
}

pub fn flux_sweep(points: usize) -> FluxSweep {
    FluxSweep {
        length: 18.0,
        count: 17,
        h_min: 0.1,
        h_max: 1.5,
        phi: Grid {
            start: 0.0,
            stop: 9.0,
            points,
        },
        k_max: 10.0,
        options: SolverOptions::default(),
    }
}
