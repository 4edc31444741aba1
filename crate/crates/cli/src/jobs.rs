//! Fully resolved runs. A job's serialized form is the `config` of the
//! provenance header, so a header alone reproduces its file.

use std::fmt::Write as _;

use kp_core::model::flux_period;
use kp_core::oracle::Comparison;
use kp_core::wavefunction::{density_grid, write_density_csv};
use kp_core::{
    build_state, chern_number, compare, find_roots, format_float, sweep_flux, sweep_shift,
    FluxSweep, Grid, HeightsSpec, InstanceSpec, Provenance, ScattererSet, ShiftSweep, SolverConfig,
    SolverOptions, UnitCell,
};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::failure::Failure;
use crate::kv::Params;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveJob {
    pub instance: InstanceSpec,
    pub solver: SolverConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WavefunctionJob {
    pub instance: InstanceSpec,
    pub solver: SolverConfig,
    pub state: usize,
    pub samples: usize,
}

/// Unit cell with positions in `[0, a)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSpec {
    pub a: f64,
    pub y: Vec<f64>,
    pub h: Vec<f64>,
}

impl CellSpec {
    pub fn parse(text: &str) -> Result<Self, Failure> {
        let mut p = Params::parse("cell", text)?;
        let a = p.required("a")?;
        let h = p
            .list("h")?
            .ok_or_else(|| Failure::config("--cell: missing `h`"))?;
        let y = p.list("y")?.unwrap_or_else(|| {
            (0..h.len())
                .map(|i| a * i as f64 / h.len() as f64)
                .collect()
        });
        p.finish()?;
        Ok(Self { a, y, h })
    }

    fn build(&self) -> Result<UnitCell, Failure> {
        UnitCell::new(self.a, self.y.clone(), self.h.clone())
            .map_err(|e| Failure::from_core("chern", &e))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChernJob {
    pub cell: CellSpec,
    pub band: usize,
    pub n_q: usize,
    pub n_delta: usize,
    pub n_x: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyJob {
    pub instance: InstanceSpec,
    pub states: usize,
    pub grid: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Job {
    Solve(SolveJob),
    Wavefunction(WavefunctionJob),
    SweepShift(ShiftSweep),
    SweepFlux(FluxSweep),
    Chern(ChernJob),
    Verify(VerifyJob),
}

/// Output of a job in both formats.
#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    pub provenance: Provenance,
    /// Column line and rows, without the provenance comment.
    pub csv: String,
    /// Object whose fields follow `provenance` in the JSON form.
    pub json: Value,
}

impl Document {
    pub fn render_csv(&self) -> String {
        format!("{}\n{}", self.provenance.header_line(), self.csv)
    }

    pub fn render_json(&self) -> String {
        let mut object = serde_json::Map::new();
        object.insert(
            "provenance".into(),
            serde_json::to_value(&self.provenance).expect("provenance serializes"),
        );
        if let Value::Object(fields) = &self.json {
            object.extend(fields.clone());
        }
        let mut text =
            serde_json::to_string_pretty(&Value::Object(object)).expect("document serializes");
        text.push('\n');
        text
    }
}

/// Shift-sweep parameters: `L`, `M` and one of `h`, `pattern`, or
/// `h_min`/`h_max`/`seed`.
pub fn shift_sweep(
    text: &str,
    points: usize,
    from: Option<f64>,
    to: Option<f64>,
    k_max: f64,
) -> Result<Job, Failure> {
    let mut p = Params::parse("shift", text)?;
    let length = p.required("L")?;
    let count = p.required("M")?;
    let heights = if let Some(h) = p.optional("h")? {
        HeightsSpec::Uniform { h }
    } else if let Some(pattern) = p.list("pattern")? {
        HeightsSpec::Alternating { pattern }
    } else if p.has("h_min") {
        HeightsSpec::Random {
            h_min: p.required("h_min")?,
            h_max: p.required("h_max")?,
            seed: p.optional("seed")?.unwrap_or(0),
        }
    } else {
        return Err(Failure::config("--shift: give h, pattern, or h_min/h_max"));
    };
    p.finish()?;
    Ok(Job::SweepShift(ShiftSweep {
        length,
        count,
        heights,
        delta: Grid {
            start: from.unwrap_or(-1.0),
            stop: to.unwrap_or(1.0),
            points,
        },
        k_max,
        options: SolverOptions::default(),
    }))
}

pub fn flux_sweep(
    text: &str,
    points: usize,
    from: Option<f64>,
    to: Option<f64>,
    k_max: f64,
) -> Result<Job, Failure> {
    let mut p = Params::parse("flux", text)?;
    let length = p.required("L")?;
    let count = p.required("M")?;
    let job = FluxSweep {
        length,
        count,
        h_min: p.required("h_min")?,
        h_max: p.required("h_max")?,
        phi: Grid {
            start: from.unwrap_or(0.0),
            stop: to.unwrap_or(flux_period(count)),
            points,
        },
        k_max,
        options: SolverOptions::default(),
    };
    p.finish()?;
    Ok(Job::SweepFlux(job))
}

pub fn solver_config(k_max: f64) -> SolverConfig {
    SolverConfig {
        k_max,
        options: SolverOptions::default(),
    }
}

impl Job {
    pub fn command(&self) -> &'static str {
        match self {
            Job::Solve(_) => "solve",
            Job::Wavefunction(_) => "wavefunction",
            Job::SweepShift(_) => "sweep-shift",
            Job::SweepFlux(_) => "sweep-flux",
            Job::Chern(_) => "chern",
            Job::Verify(_) => "verify",
        }
    }

    pub fn provenance(&self) -> Provenance {
        match self {
            Job::Solve(j) => Provenance::new(self.command(), j),
            Job::Wavefunction(j) => Provenance::new(self.command(), j),
            Job::SweepShift(j) => Provenance::new(self.command(), j),
            Job::SweepFlux(j) => Provenance::new(self.command(), j),
            Job::Chern(j) => Provenance::new(self.command(), j),
            Job::Verify(j) => Provenance::new(self.command(), j),
        }
    }

    pub fn from_provenance(provenance: &Provenance) -> Result<Self, Failure> {
        fn config<T: serde::de::DeserializeOwned>(p: &Provenance) -> Result<T, Failure> {
            serde_json::from_value(p.config.clone())
                .map_err(|e| Failure::config(format!("provenance config for {}: {e}", p.command)))
        }
        Ok(match provenance.command.as_str() {
            "solve" => Job::Solve(config(provenance)?),
            "wavefunction" => Job::Wavefunction(config(provenance)?),
            "sweep-shift" => Job::SweepShift(config(provenance)?),
            "sweep-flux" => Job::SweepFlux(config(provenance)?),
            "chern" => Job::Chern(config(provenance)?),
            "verify" => Job::Verify(config(provenance)?),
            other => {
                return Err(Failure::config(format!(
                    "unknown command `{other}` in provenance"
                )))
            }
        })
    }

    /// Label used in error messages: the command and its compact config.
    fn label(&self) -> String {
        format!("{} {}", self.command(), self.provenance().config)
    }

    fn core<T>(&self, result: kp_core::Result<T>) -> Result<T, Failure> {
        result.map_err(|e| Failure::from_core(&self.label(), &e))
    }

    fn instance(&self, spec: &InstanceSpec) -> Result<ScattererSet, Failure> {
        self.core(spec.build())
    }

    pub fn run(&self) -> Result<Document, Failure> {
        let provenance = self.provenance();
        let (csv, json) = match self {
            Job::Solve(j) => {
                let set = self.instance(&j.instance)?;
                let roots = self.core(find_roots(&set, j.solver.k_max, &j.solver.options))?;
                let mut csv = String::from("index,k,energy\n");
                let mut rows = Vec::new();
                for (i, r) in roots.iter().enumerate() {
                    writeln!(
                        csv,
                        "{},{},{}",
                        i + 1,
                        format_float(r.k),
                        format_float(r.energy)
                    )
                    .unwrap();
                    rows.push(json!({"index": i + 1, "k": r.k, "energy": r.energy}));
                }
                (csv, json!({ "roots": rows }))
            }
            Job::Wavefunction(j) => {
                let set = self.instance(&j.instance)?;
                let roots = self.core(find_roots(&set, j.solver.k_max, &j.solver.options))?;
                if j.state == 0 || j.state > roots.len() {
                    return Err(Failure::range(format!(
                        "{}: state {} requested, {} states below k_max = {}",
                        self.label(),
                        j.state,
                        roots.len(),
                        j.solver.k_max
                    )));
                }
                let root = roots[j.state - 1];
                let state = self.core(build_state(&set, &root))?;
                let samples = self.core(density_grid(&state, j.samples))?;
                let mut bytes = Vec::new();
                write_density_csv(&mut bytes, &samples).expect("writing to memory");
                let rows: Vec<Value> = samples
                    .iter()
                    .map(|s| json!({"x": s.x, "psi_re": s.psi.re, "psi_im": s.psi.im, "density": s.density}))
                    .collect();
                (
                    String::from_utf8(bytes).expect("ascii csv"),
                    json!({"state": j.state, "k": root.k, "energy": root.energy, "samples": rows}),
                )
            }
            Job::SweepShift(j) => table(self.core(sweep_shift(j))?),
            Job::SweepFlux(j) => table(self.core(sweep_flux(j))?),
            Job::Chern(j) => {
                let cell = j.cell.build()?;
                let r = self.core(chern_number(&cell, j.band, j.n_q, j.n_delta, j.n_x))?;
                let csv = format!(
                    "band,chern,n_q,n_delta,min_overlap\n{},{},{},{},{}\n",
                    r.band,
                    r.chern,
                    r.grid[0],
                    r.grid[1],
                    format_float(r.min_overlap)
                );
                (csv, serde_json::to_value(&r).expect("result serializes"))
            }
            Job::Verify(j) => {
                let set = self.instance(&j.instance)?;
                let c: Comparison = self.core(compare(&set, j.states, j.grid))?;
                let mut csv = String::from("index,exact,oracle,relative_error\n");
                for (i, (e, o)) in c.exact.iter().zip(&c.oracle).enumerate() {
                    writeln!(
                        csv,
                        "{},{},{},{}",
                        i + 1,
                        format_float(*e),
                        format_float(*o),
                        format_float((o - e).abs() / e)
                    )
                    .unwrap();
                }
                (
                    csv,
                    serde_json::to_value(&c).expect("comparison serializes"),
                )
            }
        };
        Ok(Document {
            provenance,
            csv,
            json,
        })
    }
}

fn table(t: kp_core::SweepTable) -> (String, Value) {
    let mut bytes = Vec::new();
    t.write_csv(&mut bytes).expect("writing to memory");
    let text = String::from_utf8(bytes).expect("ascii csv");
    let body = text
        .split_once('\n')
        .map_or(String::new(), |(_, rest)| rest.to_string());
    let json = json!({"parameter": t.parameter, "rows": t.rows});
    (body, json)
}
