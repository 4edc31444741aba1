//! Spectra along a one-parameter family of instances: rigid shifts of an
//! equidistant lattice, or the flux of a height modulation.

use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eigensolve::{find_roots, SolverOptions};
use crate::error::{Error, Result};
use crate::format_float;
use crate::model::{self, ScattererSet};
use crate::wavefunction::{build_state, default_edge_fraction, edge_weight};

pub const CSV_HEADER: &str = "param,param_value,state_index,k,energy,edge_weight";

/// How heights are assigned along a shifted lattice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HeightsSpec {
    Uniform { h: f64 },
    Alternating { pattern: Vec<f64> },
    Random { h_min: f64, h_max: f64, seed: u64 },
    Explicit { heights: Vec<f64> },
}

impl HeightsSpec {
    pub fn heights(&self, count: usize) -> Result<Vec<f64>> {
        match self {
            HeightsSpec::Uniform { h } => Ok(vec![*h; count]),
            HeightsSpec::Alternating { pattern } => {
                if pattern.is_empty() {
                    return Err(Error::InvalidParameter("empty height pattern".into()));
                }
                Ok(model::alternating_heights(count, pattern))
            }
            HeightsSpec::Random { h_min, h_max, seed } => {
                Ok(model::random_heights(count, *h_min, *h_max, *seed))
            }
            HeightsSpec::Explicit { heights } => {
                if heights.len() != count {
                    return Err(Error::LengthMismatch {
                        positions: count,
                        heights: heights.len(),
                    });
                }
                Ok(heights.clone())
            }
        }
    }
}

/// `points` equally spaced values from `start` to `stop` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl Grid {
    pub fn single(value: f64) -> Self {
        Self {
            start: value,
            stop: value,
            points: 1,
        }
    }

    pub fn values(&self) -> Vec<f64> {
        match self.points {
            0 => Vec::new(),
            1 => vec![self.start],
            n => {
                let step = (self.stop - self.start) / (n - 1) as f64;
                (0..n)
                    .map(|i| {
                        if i == n - 1 {
                            self.stop
                        } else {
                            self.start + step * i as f64
                        }
                    })
                    .collect()
            }
        }
    }

    fn check_within(&self, lo: f64, hi: f64, name: &str) -> Result<()> {
        if self.points == 0 {
            return Err(Error::InvalidParameter(format!("{name} grid is empty")));
        }
        let inside = |x: f64| x.is_finite() && lo <= x && x <= hi;
        if !inside(self.start) || !inside(self.stop) {
            return Err(Error::InvalidParameter(format!(
                "{name} grid [{}, {}] outside [{lo}, {hi}]",
                self.start, self.stop
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftSweep {
    #[serde(rename = "L")]
    pub length: f64,
    #[serde(rename = "M")]
    pub count: usize,
    pub heights: HeightsSpec,
    pub delta: Grid,
    pub k_max: f64,
    #[serde(default)]
    pub options: SolverOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluxSweep {
    #[serde(rename = "L")]
    pub length: f64,
    #[serde(rename = "M")]
    pub count: usize,
    pub h_min: f64,
    pub h_max: f64,
    pub phi: Grid,
    pub k_max: f64,
    #[serde(default)]
    pub options: SolverOptions,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub param_value: f64,
    /// 1-based, ascending in `k` at fixed parameter.
    pub state_index: usize,
    pub k: f64,
    pub energy: f64,
    pub edge_weight: f64,
}

/// Everything needed to regenerate an output file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: serde_json::Value,
}

impl Provenance {
    pub fn new<T: Serialize>(command: &str, config: &T) -> Self {
        Self {
            tool: "kp".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            config: serde_json::to_value(config).expect("config serializes"),
        }
    }

    /// Single-line comment form used at the top of CSV files.
    pub fn header_line(&self) -> String {
        format!(
            "# {}",
            serde_json::to_string(self).expect("provenance serializes")
        )
    }

    pub fn parse_header_line(line: &str) -> Option<Self> {
        serde_json::from_str(line.strip_prefix("# ")?).ok()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub provenance: Provenance,
    pub parameter: String,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn write_csv<W: Write>(&self, out: &mut W) -> io::Result<()> {
        writeln!(out, "{}", self.provenance.header_line())?;
        writeln!(out, "{CSV_HEADER}")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                self.parameter,
                format_float(r.param_value),
                r.state_index,
                format_float(r.k),
                format_float(r.energy),
                format_float(r.edge_weight)
            )?;
        }
        Ok(())
    }

    /// Distinct parameter values in table order.
    pub fn parameter_values(&self) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for r in &self.rows {
            if out.last() != Some(&r.param_value) {
                out.push(r.param_value);
            }
        }
        out
    }

    pub fn rows_at(&self, value: f64) -> impl Iterator<Item = &SweepRow> {
        self.rows.iter().filter(move |r| r.param_value == value)
    }
}

fn solve_point(
    set: &ScattererSet,
    value: f64,
    k_max: f64,
    options: &SolverOptions,
) -> Result<Vec<SweepRow>> {
    let fraction = default_edge_fraction(set);
    find_roots(set, k_max, options)?
        .iter()
        .enumerate()
        .map(|(i, root)| {
            let state = build_state(set, root)?;
            Ok(SweepRow {
                param_value: value,
                state_index: i + 1,
                k: root.k,
                energy: root.energy,
                edge_weight: edge_weight(&state, fraction)?,
            })
        })
        .collect()
}

fn run<F>(
    name: &str,
    values: &[f64],
    build: F,
    k_max: f64,
    options: &SolverOptions,
) -> Result<Vec<SweepRow>>
where
    F: Fn(f64) -> Result<ScattererSet> + Sync,
{
    let chunks = values
        .par_iter()
        .map(|&v| {
            build(v)
                .and_then(|set| solve_point(&set, v, k_max, options))
                .map_err(|e| Error::AtParameter {
                    name: name.into(),
                    value: v,
                    source: Box::new(e),
                })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(chunks.into_iter().flatten().collect())
}

/// Spectrum of the equidistant lattice at every shift `Δ` of the grid.
pub fn sweep_shift(config: &ShiftSweep) -> Result<SweepTable> {
    config.delta.check_within(-1.0, 1.0, "delta")?;
    let heights = config.heights.heights(config.count)?;
    let build = |delta: f64| {
        let positions = model::uniform_positions(config.length, config.count, delta)?;
        ScattererSet::new(config.length, positions, heights.clone())
    };
    let rows = run(
        "delta",
        &config.delta.values(),
        build,
        config.k_max,
        &config.options,
    )?;
    Ok(SweepTable {
        provenance: Provenance::new("sweep-shift", config),
        parameter: "delta".into(),
        rows,
    })
}

/// Spectrum of the flux-modulated lattice at every `φ` of the grid.
pub fn sweep_flux(config: &FluxSweep) -> Result<SweepTable> {
    config
        .phi
        .check_within(0.0, model::flux_period(config.count), "phi")?;
    let build = |phi: f64| {
        model::modulated_lattice(config.length, config.count, config.h_min, config.h_max, phi)
    };
    let rows = run(
        "phi",
        &config.phi.values(),
        build,
        config.k_max,
        &config.options,
    )?;
    Ok(SweepTable {
        provenance: Provenance::new("sweep-flux", config),
        parameter: "phi".into(),
        rows,
    })
}
