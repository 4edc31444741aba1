//! All allowed quasimomenta below a cutoff.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::bethe::{bethe_mismatch, bethe_mismatch_scaled};
use crate::error::{Error, Result};
use crate::model::ScattererSet;
use crate::roots::{self, Candidate, ScanSettings};

/// Lower end of the scanned quasimomentum range; `k = 0` is excluded.
pub const K_MIN: f64 = 1e-6;

/// Relative floor for tangential zeros of the mismatch.
pub const TANGENT_FLOOR: f64 = 1e-10;

/// Tunables of [`find_roots`]. The scan step is `π / (L Q)` with
/// `Q = q_factor (M + 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    pub q_factor: f64,
    pub tol_rel: f64,
    pub tol_sep: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            q_factor: 8.0,
            tol_rel: 1e-12,
            tol_sep: 1e-9,
        }
    }
}

impl SolverOptions {
    pub fn scan_step(&self, set: &ScattererSet) -> f64 {
        PI / (set.length() * self.q_factor * (set.len() as f64 + 1.0))
    }
}

/// Solver options plus the cutoff, as read from a config file:
/// `{"k_max": 7.0, "q_factor": 8, "tol_rel": 1e-12, "tol_sep": 1e-9}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub k_max: f64,
    #[serde(flatten)]
    pub options: SolverOptions,
}

/// One allowed quasimomentum. The energy is `k²/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuasimomentumRoot {
    pub k: f64,
    pub energy: f64,
    pub bracket: (f64, f64),
    /// `|mismatch(k)|` relative to the local scale of the transfer state.
    pub residual: f64,
    /// Set for zeros found as touching extrema rather than sign changes.
    pub multiplicity_flag: bool,
}

impl QuasimomentumRoot {
    fn new(set: &ScattererSet, k: f64, bracket: (f64, f64), tangent: bool) -> Self {
        let (value, scale) = bethe_mismatch_scaled(set, k);
        Self {
            k,
            energy: 0.5 * k * k,
            bracket,
            residual: value.abs() / scale,
            multiplicity_flag: tangent,
        }
    }
}

/// Finds every root of the mismatch in `(K_MIN, k_max)`, ascending.
pub fn find_roots(
    set: &ScattererSet,
    k_max: f64,
    options: &SolverOptions,
) -> Result<Vec<QuasimomentumRoot>> {
    if !(k_max > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "k_max must be positive, got {k_max}"
        )));
    }
    if !(options.q_factor > 0.0 && options.tol_rel > 0.0 && options.tol_sep >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "bad solver options {options:?}"
        )));
    }
    let f = |k: f64| bethe_mismatch_scaled(set, k);
    let settings = ScanSettings {
        step: options.scan_step(set),
        tangent_floor: TANGENT_FLOOR,
    };
    let candidates = roots::scan(&f, K_MIN, k_max, settings)?;

    let mut found: Vec<QuasimomentumRoot> = Vec::with_capacity(candidates.len());
    for candidate in candidates {
        let root = match candidate {
            Candidate::Bracket { lo, hi } => {
                let k = roots::brent(|k| bethe_mismatch(set, k), lo, hi, options.tol_rel)?;
                QuasimomentumRoot::new(set, k, (lo, hi), false)
            }
            Candidate::Tangent { x, lo, hi } => QuasimomentumRoot::new(set, x, (lo, hi), true),
            Candidate::Exact { x, lo, hi } => QuasimomentumRoot::new(set, x, (lo, hi), false),
        };
        match found.last_mut() {
            Some(last) if (root.k - last.k).abs() <= options.tol_sep => {
                last.multiplicity_flag |= root.multiplicity_flag;
                last.bracket = (
                    last.bracket.0.min(root.bracket.0),
                    last.bracket.1.max(root.bracket.1),
                );
            }
            _ => found.push(root),
        }
    }
    Ok(found)
}

/// Number of eigenvalues strictly below `energy`, by oscillation counting.
///
/// Tracks the Prüfer angle `θ` of `(ψ, ψ'/k)` across the box. Free segments
/// advance it by `k d`; a delta jump changes `ψ'` but not `ψ`, so it moves
/// `θ` only within its current half-turn. The number of interior nodes is
/// the number of multiples of `π` strictly inside `(0, θ(L/2))`.
pub fn count_states_below(set: &ScattererSet, energy: f64) -> usize {
    if !(energy > 0.0) {
        return 0;
    }
    let k = (2.0 * energy).sqrt();
    let mut theta = 0.0_f64;
    let mut x = -0.5 * set.length();
    for (&y, &h) in set.positions().iter().zip(set.heights()) {
        theta += k * (y - x);
        x = y;
        let turns = (theta / PI).floor();
        let local = theta - turns * PI;
        if local == 0.0 {
            continue;
        }
        // In the current half-turn sin θ keeps its sign, so work with the
        // representative in (0, π): ψ ∝ sin, ψ'/k ∝ cos.
        let (s, c) = local.sin_cos();
        let c = c + 2.0 * h * s / k;
        theta = turns * PI + s.atan2(c);
    }
    theta += k * (0.5 * set.length() - x);
    let nodes = (theta / PI).ceil() - 1.0;
    nodes.max(0.0) as usize
}
