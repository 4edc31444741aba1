//! Command-line surface.

use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use kp_core::model::{ModulatedSpec, RandomSpec, UniformSpec};
use kp_core::InstanceSpec;

use crate::failure::Failure;
use crate::kv::Params;

#[derive(Debug, Parser)]
#[command(
    name = "kp",
    version,
    about = "Exact spectra of delta scatterers in a hard-wall box"
)]
pub struct Cli {
    /// Worker threads (default: KP_THREADS, else all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Allowed quasimomenta and energies up to a cutoff.
    Solve {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long)]
        kmax: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Sampled wavefunction and density of one eigenstate.
    Wavefunction {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long)]
        kmax: f64,
        /// 1-based index in ascending k.
        #[arg(long)]
        state: usize,
        #[arg(long, default_value_t = 512)]
        samples: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Spectrum along a lattice shift or a flux.
    Sweep {
        #[command(flatten)]
        mode: SweepMode,
        #[arg(long, default_value_t = 201)]
        points: usize,
        /// First grid value (default: -1 for shifts, 0 for flux).
        #[arg(long, allow_hyphen_values = true)]
        from: Option<f64>,
        /// Last grid value (default: 1 for shifts, the flux period for flux).
        #[arg(long, allow_hyphen_values = true)]
        to: Option<f64>,
        #[arg(long)]
        kmax: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Chern number of one band over the (q, shift) torus.
    Chern {
        /// `a=1,h=0.4` or `a=2,y=0:1,h=0.4:1.4` (positions within [0, a)).
        #[arg(long)]
        cell: String,
        #[arg(long, default_value_t = 1)]
        band: usize,
        #[arg(long, default_value_t = 32)]
        nq: usize,
        #[arg(long, default_value_t = 32)]
        ndelta: usize,
        /// Samples per cell for the Bloch functions.
        #[arg(long, default_value_t = 256)]
        nx: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Compares the lowest states against a finite-difference solution.
    Verify {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long, default_value_t = 10)]
        states: usize,
        /// Interior grid points of the finite-difference box.
        #[arg(long, default_value_t = 20000)]
        grid: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Regenerates an output file from its provenance header.
    Replay {
        file: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct InstanceArgs {
    #[command(flatten)]
    pub source: InstanceSource,
    /// Seed for `--random`.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct InstanceSource {
    /// Empty box: `L=3.14`.
    #[arg(long = "box", value_name = "PARAMS")]
    pub empty: Option<String>,
    /// Equidistant equal heights: `L=11,M=11,h=0.4,delta=0`.
    #[arg(long, value_name = "PARAMS")]
    pub uniform: Option<String>,
    /// Cosine-modulated heights: `L=18,M=17,h_min=0.1,h_max=1.5,phi=0.3`.
    #[arg(long, value_name = "PARAMS")]
    pub modulated: Option<String>,
    /// Random heights: `M=6` with optional `L` (M+1), `h_min` (-0.5),
    /// `h_max` (1.5), `delta` (0), `seed` (0).
    #[arg(long, value_name = "PARAMS")]
    pub random: Option<String>,
    /// JSON instance file.
    #[arg(long, value_name = "FILE")]
    pub instance: Option<PathBuf>,
}

impl InstanceArgs {
    pub fn resolve(&self) -> Result<InstanceSpec, Failure> {
        let source = &self.source;
        if self.seed.is_some() && source.random.is_none() {
            return Err(Failure::config("--seed applies to --random instances only"));
        }
        if let Some(text) = &source.empty {
            let mut p = Params::parse("box", text)?;
            let length = p.required("L")?;
            p.finish()?;
            return Ok(InstanceSpec::Explicit {
                length,
                scatterers: Vec::new(),
            });
        }
        if let Some(text) = &source.uniform {
            let mut p = Params::parse("uniform", text)?;
            let spec = UniformSpec {
                length: p.required("L")?,
                count: p.required("M")?,
                h: p.required("h")?,
                delta: p.optional("delta")?.unwrap_or(0.0),
            };
            p.finish()?;
            return Ok(InstanceSpec::Uniform { uniform: spec });
        }
        if let Some(text) = &source.modulated {
            let mut p = Params::parse("modulated", text)?;
            let spec = ModulatedSpec {
                length: p.required("L")?,
                count: p.required("M")?,
                h_min: p.required("h_min")?,
                h_max: p.required("h_max")?,
                phi: p.optional("phi")?.unwrap_or(0.0),
            };
            p.finish()?;
            return Ok(InstanceSpec::Modulated { modulated: spec });
        }
        if let Some(text) = &source.random {
            let mut p = Params::parse("random", text)?;
            if p.has("seed") && self.seed.is_some() {
                return Err(Failure::config("seed given both in --random and --seed"));
            }
            let count: usize = p.required("M")?;
            let spec = RandomSpec {
                length: p.optional("L")?.unwrap_or(count as f64 + 1.0),
                count,
                h_min: p.optional("h_min")?.unwrap_or(-0.5),
                h_max: p.optional("h_max")?.unwrap_or(1.5),
                seed: p.optional("seed")?.or(self.seed).unwrap_or(0),
                delta: p.optional("delta")?.unwrap_or(0.0),
            };
            p.finish()?;
            return Ok(InstanceSpec::Random { random: spec });
        }
        let path = source
            .instance
            .as_ref()
            .expect("clap enforces one instance source");
        let text = fs::read_to_string(path)
            .map_err(|e| Failure::config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Failure::config(format!("{}: {e}", path.display())))
    }
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct SweepMode {
    /// Shift sweep: `L=11,M=11,h=0.4`; heights may instead be
    /// `pattern=0.4:1.4` or `h_min=..,h_max=..,seed=..`.
    #[arg(long, value_name = "PARAMS")]
    pub shift: Option<String>,
    /// Flux sweep: `L=18,M=17,h_min=0.1,h_max=1.5`.
    #[arg(long, value_name = "PARAMS")]
    pub flux: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output format (default: csv for tables, json for chern and verify).
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Output file (default: standard output).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Result<Cli, clap::Error> {
        Cli::try_parse_from(std::iter::once("kp").chain(args.iter().copied()))
    }

    #[test]
    fn instance_sources_are_exclusive() {
        assert!(parse(&[
            "solve",
            "--box",
            "L=1",
            "--uniform",
            "L=1,M=1,h=1",
            "--kmax",
            "3"
        ])
        .is_err());
        assert!(parse(&["solve", "--kmax", "3"]).is_err());
        let cli = parse(&["solve", "--box", "L=1", "--seed", "3", "--kmax", "3"]).unwrap();
        let Command::Solve { instance, .. } = cli.command else {
            panic!("wrong subcommand");
        };
        assert!(instance.resolve().is_err());
    }

    #[test]
    fn random_defaults() {
        let cli = parse(&["verify", "--random", "M=6", "--seed", "7"]).unwrap();
        let Command::Verify { instance, .. } = cli.command else {
            panic!("wrong subcommand");
        };
        let InstanceSpec::Random { random } = instance.resolve().unwrap() else {
            panic!("wrong instance");
        };
        assert_eq!((random.length, random.count, random.seed), (7.0, 6, 7));
        assert_eq!((random.h_min, random.h_max, random.delta), (-0.5, 1.5, 0.0));
    }

    #[test]
    fn negative_grid_bounds_parse() {
        let cli = parse(&[
            "sweep",
            "--shift",
            "L=11,M=11,h=0.4",
            "--from",
            "-0.5",
            "--kmax",
            "7",
        ])
        .unwrap();
        let Command::Sweep { from, .. } = cli.command else {
            panic!("wrong subcommand");
        };
        assert_eq!(from, Some(-0.5));
    }
}
