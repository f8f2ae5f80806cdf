//! `convspec`: forward spectra, inverse reconstructions and round-trip checks from the
//! command line. Reports go to stdout as JSON, data files to the paths given by flags.

mod commands;
mod report;
mod validate;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use report::{error_object, exit_code};

#[derive(Parser)]
#[command(name = "convspec", version, about = "Forward and inverse spectral problems for a convolution integro-differential operator")]
struct Cli {
    /// Add wall-clock timings to the report (makes it non-deterministic).
    #[arg(long, global = true)]
    timing: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
pub struct GridArgs {
    /// Run manifest JSON; missing fields take their defaults.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Grid intervals, overriding the manifest.
    #[arg(long)]
    pub grid_n: Option<usize>,
}

#[derive(Args, Clone)]
pub struct ForwardArgs {
    #[command(flatten)]
    pub grid: GridArgs,
    /// Memory kernel M as a function CSV.
    #[arg(long)]
    pub kernel: PathBuf,
    /// Highest eigenvalue index K, overriding the manifest.
    #[arg(long)]
    pub num_eigs: Option<usize>,
    /// Characteristic-function strategy.
    #[arg(long, default_value = "model")]
    pub char_fn: String,
    /// Root localization strategy.
    #[arg(long, default_value = "auto")]
    pub locator: String,
}

#[derive(Args, Clone)]
pub struct InverseArgs {
    #[command(flatten)]
    pub grid: GridArgs,
    /// Spectrum CSV.
    #[arg(long)]
    pub spectrum: PathBuf,
    /// Main-equation solver strategy.
    #[arg(long, default_value = "marching-affine")]
    pub solver: String,
    /// Root localization strategy for the forward consistency check.
    #[arg(long, default_value = "auto")]
    pub locator: String,
    /// Relative tolerance of the forward consistency check; 0 disables it.
    #[arg(long, default_value_t = 1e-3)]
    pub consistency_tol: f64,
    /// Where to write the recovered M.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalues of L(M, h, H) from a kernel file.
    Forward {
        #[command(flatten)]
        args: ForwardArgs,
        /// Where to write the spectrum CSV.
        #[arg(long)]
        out: PathBuf,
    },
    /// Reconstruct M from a spectrum with h and H taken from the manifest.
    Inverse1 {
        #[command(flatten)]
        args: InverseArgs,
    },
    /// Reconstruct M and H from a spectrum with h = 0.
    Inverse2 {
        #[command(flatten)]
        args: InverseArgs,
    },
    /// Forward, inverse, forward again; exit 1 when an error exceeds its limit.
    Roundtrip {
        #[command(flatten)]
        args: ForwardArgs,
        /// Inverse algorithm.
        #[arg(long, default_value = "algorithm-1")]
        algorithm: String,
        #[arg(long, default_value = "marching-affine")]
        solver: String,
        /// Limit on the L2 error of M on [0, 0.9pi], relative to max(1, |M|).
        #[arg(long, default_value_t = 1e-2)]
        kernel_tol: f64,
        /// Limit on max |lambda_k - lambda_k'| / (1 + |lambda_k|).
        #[arg(long, default_value_t = 1e-3)]
        spectrum_tol: f64,
        /// Optional path for the recovered M.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cross-check the independent evaluation routes; exit 1 when one disagrees.
    Validate {
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        kernel: PathBuf,
        #[command(flatten)]
        limits: validate::Limits,
    },
}

/// A closed stdout is not worth a panic; the exit code still reports the outcome.
fn emit(text: &str) {
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let (name, outcome) = match &cli.command {
        Command::Forward { args, out } => ("forward", commands::forward(args, out)),
        Command::Inverse1 { args } => ("inverse1", commands::inverse(args, false)),
        Command::Inverse2 { args } => ("inverse2", commands::inverse(args, true)),
        Command::Roundtrip {
            args,
            algorithm,
            solver,
            kernel_tol,
            spectrum_tol,
            out,
        } => (
            "roundtrip",
            commands::roundtrip(args, algorithm, solver, *kernel_tol, *spectrum_tol, out.as_deref()),
        ),
        Command::Validate { grid, kernel, limits } => ("validate", validate::run(grid, kernel, limits)),
    };
    match outcome {
        Ok(mut report) => {
            if cli.timing {
                report.timing_ms = Some([("total", start.elapsed().as_secs_f64() * 1e3)].into_iter().collect());
            }
            emit(&serde_json::to_string_pretty(&report).expect("report serializes"));
            if report.all_checks_pass() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            emit(&serde_json::to_string_pretty(&error_object(name, &e)).expect("error serializes"));
            ExitCode::from(exit_code(&e))
        }
    }
}
