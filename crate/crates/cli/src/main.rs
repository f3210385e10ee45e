//! `gkp`: kernel tables, solitary-wave solves and verification reports.
//!
//! Exit status: 0 when every check passes, 1 when checks ran and some failed
//! (or a solve did not converge), 2 for configuration, input and guard errors.

mod cmd;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "gkp", version, about = "Solitary waves and kernels of generalized KP equations")]
struct Cli {
    /// Run file of `key = value` lines; command-line flags override it.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Directory for output files and manifest.json.
    #[arg(long, global = true, value_name = "DIR")]
    out_dir: Option<PathBuf>,
    /// Seed for randomized point sets and seeds.
    #[arg(long, global = true)]
    rng_seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Physical-space kernel values, limits and exponent fits.
    Kernel(cmd::kernel::KernelArgs),
    /// Compute a solitary wave by stabilized fixed-point iteration.
    Solve(cmd::solve::SolveArgs),
    /// Pohozaev, energy, profile and decay checks on a wave file.
    Verify(cmd::verify::VerifyArgs),
    /// Check the split representation of the composed Riesz kernel.
    Riesz(cmd::riesz::RieszArgs),
}

/// Quadrature flags shared by the kernel commands.
#[derive(Debug, Clone, Args)]
pub struct QuadArgs {
    #[arg(long, default_value_t = 1e-12)]
    abs_tol: f64,
    #[arg(long, default_value_t = 1e-8)]
    rel_tol: f64,
    /// Splitting radius (default 1/|x|).
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, default_value_t = 4000)]
    max_subdivisions: usize,
}

impl QuadArgs {
    fn spec(&self) -> Result<gkp_core::kernel::QuadratureSpec, CliError> {
        config::quadrature(self.abs_tol, self.rel_tol, self.lambda, self.max_subdivisions)
    }
}

pub struct Globals {
    pub out_dir: Option<PathBuf>,
    pub rng_seed: Option<u64>,
    pub command_line: String,
}

fn run(cli: Cli, command_line: String) -> Result<bool, CliError> {
    let globals = Globals {
        out_dir: cli.out_dir,
        rng_seed: cli.rng_seed,
        command_line,
    };
    let go = move || match cli.command {
        Command::Kernel(a) => cmd::kernel::run(a, &globals),
        Command::Solve(a) => cmd::solve::run(a, &globals),
        Command::Verify(a) => cmd::verify::run(a, &globals),
        Command::Riesz(a) => cmd::riesz::run(a, &globals),
    };
    match cli.threads {
        Some(t) => gkp_core::par::with_threads(t, go),
        None => go(),
    }
}

fn main() -> ExitCode {
    let raw: Vec<_> = std::env::args_os().collect();
    let command_line = raw.iter().map(|a| a.to_string_lossy()).collect::<Vec<_>>().join(" ");
    let args = match config::expand_args(raw) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let level = if cli.verbose { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli, command_line) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
