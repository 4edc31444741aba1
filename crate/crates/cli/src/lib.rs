//! Command-line front end for `kp-core`.

pub mod args;
pub mod failure;
pub mod jobs;
pub mod kv;

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use clap::Parser;
use kp_core::Provenance;

use args::{Cli, Command, Format, OutputArgs};
use failure::Failure;
use jobs::{solver_config, CellSpec, ChernJob, Job, SolveJob, VerifyJob, WavefunctionJob};

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("error: {f}");
            f.code()
        }
    }
}

fn threads(flag: Option<usize>) -> Result<usize, Failure> {
    let n = match (flag, std::env::var("KP_THREADS")) {
        (Some(n), _) => n,
        (None, Ok(v)) => v
            .trim()
            .parse()
            .map_err(|_| Failure::config(format!("KP_THREADS=`{v}` is not a thread count")))?,
        (None, Err(_)) => 0,
    };
    Ok(n)
}

fn run(cli: Cli) -> Result<(), Failure> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads(cli.threads)?)
        .build()
        .map_err(|e| Failure::config(format!("thread pool: {e}")))?;
    let (job, format, out) = match cli.command {
        Command::Solve {
            instance,
            kmax,
            output,
        } => {
            let job = Job::Solve(SolveJob {
                instance: instance.resolve()?,
                solver: solver_config(kmax),
            });
            (job, output.format_or(Format::Csv), output.out)
        }
        Command::Wavefunction {
            instance,
            kmax,
            state,
            samples,
            output,
        } => {
            let job = Job::Wavefunction(WavefunctionJob {
                instance: instance.resolve()?,
                solver: solver_config(kmax),
                state,
                samples,
            });
            (job, output.format_or(Format::Csv), output.out)
        }
        Command::Sweep {
            mode,
            points,
            from,
            to,
            kmax,
            output,
        } => {
            let job = match (&mode.shift, &mode.flux) {
                (Some(text), _) => jobs::shift_sweep(text, points, from, to, kmax)?,
                (_, Some(text)) => jobs::flux_sweep(text, points, from, to, kmax)?,
                _ => unreachable!("clap enforces one sweep mode"),
            };
            (job, output.format_or(Format::Csv), output.out)
        }
        Command::Chern {
            cell,
            band,
            nq,
            ndelta,
            nx,
            output,
        } => {
            let job = Job::Chern(ChernJob {
                cell: CellSpec::parse(&cell)?,
                band,
                n_q: nq,
                n_delta: ndelta,
                n_x: nx,
            });
            (job, output.format_or(Format::Json), output.out)
        }
        Command::Verify {
            instance,
            states,
            grid,
            output,
        } => {
            let job = Job::Verify(VerifyJob {
                instance: instance.resolve()?,
                states,
                grid,
            });
            (job, output.format_or(Format::Json), output.out)
        }
        Command::Replay { file, out } => {
            let text = fs::read_to_string(&file)
                .map_err(|e| Failure::config(format!("cannot read {}: {e}", file.display())))?;
            let (provenance, format) = read_provenance(&text).ok_or_else(|| {
                Failure::config(format!("{}: no provenance header", file.display()))
            })?;
            if provenance.version != env!("CARGO_PKG_VERSION") {
                eprintln!(
                    "warning: {} was written by version {}, replaying with {}",
                    file.display(),
                    provenance.version,
                    env!("CARGO_PKG_VERSION")
                );
            }
            (Job::from_provenance(&provenance)?, format, out)
        }
    };
    let document = pool.install(|| job.run())?;
    let text = match format {
        Format::Csv => document.render_csv(),
        Format::Json => document.render_json(),
    };
    write_output(out.as_deref(), &text)
}

/// Provenance of a file written by this tool, and the file's format.
pub fn read_provenance(text: &str) -> Option<(Provenance, Format)> {
    if text.starts_with('#') {
        let line = text.lines().next()?;
        return Provenance::parse_header_line(line).map(|p| (p, Format::Csv));
    }
    let value: serde_json::Value = serde_json::from_str(text).ok()?;
    let p = serde_json::from_value(value.get("provenance")?.clone()).ok()?;
    Some((p, Format::Json))
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(path) => fs::write(path, text)
            .map_err(|e| Failure::config(format!("cannot write {}: {e}", path.display()))),
        None => io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::config(format!("cannot write to stdout: {e}"))),
    }
}

impl OutputArgs {
    fn format_or(&self, default: Format) -> Format {
        self.format.unwrap_or(default)
    }
}
