//! `jetc`: batch analysis of jet-calculus problem files.
//!
//! Every subcommand loads one `.jet` file (see [`format`]), runs one
//! engine operation, and prints a human-readable report (or a versioned
//! JSON report with `--json`). Exit code 0 means the computation
//! succeeded and the queried property holds, 1 that the property fails,
//! 2 that something went wrong.

pub mod commands;
pub mod format;

use clap::{Args, Parser, Subcommand};
use commands::{CliError, Tolerances};
use std::io::Write;
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(
    name = "jetc",
    about = "Jet-calculus engine: connections, curvature, prolongation, integration",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct CommonFlags {
    /// Tolerance for numeric zero tests and pointwise comparisons.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    /// Sample count for randomized zero tests.
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
    /// Emit the report as JSON (schema 1).
    #[arg(long)]
    pub json: bool,
    /// Accept only symbolic vanishing; no numeric fallback.
    #[arg(long)]
    pub symbolic: bool,
    /// Strict mode (refuse non-geometric connections in `solve`).
    #[arg(long)]
    pub strict: bool,
}

impl CommonFlags {
    fn tolerances(&self) -> Tolerances {
        Tolerances {
            tol: self.tol,
            samples: self.samples,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Symbolic curvature components of the problem's first-order system.
    Curvature {
        file: PathBuf,
        #[command(flatten)]
        flags: CommonFlags,
    },
    /// Per-component flatness verdicts and the aggregate.
    Flat {
        file: PathBuf,
        #[command(flatten)]
        flags: CommonFlags,
    },
    /// Is the connection geometric (below-top rows raise, tops symmetric)?
    Geometric {
        file: PathBuf,
        #[command(flatten)]
        flags: CommonFlags,
    },
    /// Defining equations of the prolongation of an order-0 connection.
    Prolong {
        file: PathBuf,
        #[command(flatten)]
        flags: CommonFlags,
    },
    /// Does the prolongation surject over the given point?
    #[command(name = "surjective-at")]
    SurjectiveAt {
        file: PathBuf,
        /// Point: a named point from the file or comma-separated values in
        /// coordinate order.
        #[arg(long)]
        at: String,
        #[command(flatten)]
        flags: CommonFlags,
    },
    /// Integrate over a grid box and report holonomy diagnostics.
    Solve {
        file: PathBuf,
        /// Initial point (named or comma-separated, full coordinate list).
        #[arg(long)]
        init: String,
        /// Box `lo:hi,...` per axis, or a named box from the file.
        #[arg(long = "box")]
        box_spec: Option<String>,
        /// Grid step.
        #[arg(long)]
        step: Option<f64>,
        /// Write the trace as CSV.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        flags: CommonFlags,
    },
    /// Terminal discrepancy over all axis-order integration paths.
    Paths {
        file: PathBuf,
        #[arg(long)]
        init: String,
        /// Target base corner, comma-separated (or a named point binding
        /// the base coordinates).
        #[arg(long)]
        corner: String,
        #[arg(long, default_value_t = 0.01)]
        step: f64,
        #[command(flatten)]
        flags: CommonFlags,
    },
    /// Is the order-(k+1) extension a connection on the equation set?
    #[command(name = "eps-check")]
    EpsCheck {
        file: PathBuf,
        #[command(flatten)]
        flags: CommonFlags,
    },
    /// Both obstruction families of an extended solved-form PDE.
    #[command(name = "phg-curvature")]
    PhgCurvature {
        file: PathBuf,
        #[command(flatten)]
        flags: CommonFlags,
    },
    /// Pointwise exactness probe: independent preimage search vs the
    /// evaluated obstruction.
    #[command(name = "exactness-at")]
    ExactnessAt {
        file: PathBuf,
        /// Point over the parameter coordinates `(x, y_(k-1))`.
        #[arg(long)]
        at: String,
        #[command(flatten)]
        flags: CommonFlags,
    },
}

/// Run a parsed command, writing the report to `out`. Returns the exit
/// code; errors are rendered to stderr by [`run_cli`].
pub fn run(command: &Command, out: &mut impl Write) -> Result<i32, CliError> {
    match command {
        Command::Curvature { file, flags } => {
            let problem = format::load(file)?;
            let report = commands::curvature(&problem)?;
            report.print(flags.json, out)?;
            Ok(report.exit)
        }
        Command::Flat { file, flags } => {
            let problem = format::load(file)?;
            let report = commands::flat(&problem, &flags.tolerances(), flags.symbolic)?;
            report.print(flags.json, out)?;
            Ok(report.exit)
        }
        Command::Geometric { file, flags } => {
            let problem = format::load(file)?;
            let report = commands::geometric(&problem, &flags.tolerances())?;
            report.print(flags.json, out)?;
            Ok(report.exit)
        }
        Command::Prolong { file, flags } => {
            let problem = format::load(file)?;
            let report = commands::prolong(&problem)?;
            report.print(flags.json, out)?;
            Ok(report.exit)
        }
        Command::SurjectiveAt { file, at, flags } => {
            let problem = format::load(file)?;
            let report = commands::surjective_at(&problem, at, &flags.tolerances())?;
            report.print(flags.json, out)?;
            Ok(report.exit)
        }
        Command::Solve {
            file,
            init,
            box_spec,
            step,
            out: out_path,
            flags,
        } => {
            let problem = format::load(file)?;
            let report = commands::solve(
                &problem,
                init,
                box_spec.as_deref(),
                *step,
                out_path.as_deref(),
                &flags.tolerances(),
                flags.strict,
            )?;
            report.print(flags.json, out)?;
            Ok(report.exit)
        }
        Command::Paths {
            file,
            init,
            corner,
            step,
            flags,
        } => {
            let problem = format::load(file)?;
            let report = commands::paths(&problem, init, corner, *step)?;
            report.print(flags.json, out)?;
            Ok(report.exit)
        }
        Command::EpsCheck { file, flags } => {
            let problem = format::load(file)?;
            let report = commands::eps_check(&problem, &flags.tolerances(), flags.symbolic)?;
            report.print(flags.json, out)?;
            Ok(report.exit)
        }
        Command::PhgCurvature { file, flags } => {
            let problem = format::load(file)?;
            let report = commands::phg_curvature(&problem, &flags.tolerances(), flags.symbolic)?;
            report.print(flags.json, out)?;
            Ok(report.exit)
        }
        Command::ExactnessAt { file, at, flags } => {
            let problem = format::load(file)?;
            let report = commands::exactness_at(&problem, at, &flags.tolerances())?;
            report.print(flags.json, out)?;
            Ok(report.exit)
        }
    }
}

/// Entry point shared by the binary and the tests.
pub fn run_cli(cli: &Cli, out: &mut impl Write) -> i32 {
    match run(&cli.command, out) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            2
        }
    }
}
