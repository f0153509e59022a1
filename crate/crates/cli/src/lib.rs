//! Command-line driver: parses arguments, runs a suite and writes its report.

pub mod report;
pub mod suites;

use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use report::Report;
use suites::Settings;

#[derive(Debug)]
pub enum CliError {
    /// Bad arguments, unreadable or invalid configuration. Exit code 2.
    Config(String),
    /// A computation failed after the inputs were accepted.
    Runtime(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Runtime(m) => write!(f, "error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

pub const EXIT_PASS: i32 = 0;
pub const EXIT_TOLERANCE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "hyperrh", version, about = "(φ,ψ)-hyperholomorphic verification suites and Riemann-Hilbert solves")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON configuration; missing fields keep their defaults.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory for the JSON summary and CSV tables.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    #[arg(long, global = true, default_value_t = 7)]
    pub seed: u64,
    /// Resolution relative to the reference: 1x, 2x, 4x, ...
    #[arg(long, global = true, default_value = "1x", value_parser = parse_resolution)]
    pub resolution: u32,
    /// Algebra dimension where a command accepts one.
    #[arg(long, global = true)]
    pub m: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Clifford laws and the factorization of the Laplacian.
    VerifyAlgebra,
    /// Kernel closed forms, homogeneity and finite-difference residuals.
    VerifyKernels,
    /// Borel-Pompeiu formulas, indicator calibration and Teodorescu relations.
    VerifyBp,
    /// Jump of the Cauchy transform across the sphere.
    JumpTest,
    /// Box dimension, d-sum trends, Whitney cubes and the Whitney extension.
    Dimension,
    /// Solve a Riemann-Hilbert problem and verify the solution.
    Solve,
    /// Harmonicity without a maximum principle for a non-matching frame pair.
    Counterexample,
}

/// `"2x"` to one refinement step; the factor must be a power of two.
pub fn parse_resolution(s: &str) -> Result<u32, String> {
    let f: u64 = s
        .strip_suffix('x')
        .unwrap_or(s)
        .parse()
        .map_err(|_| format!("resolution {s:?} is not of the form 1x, 2x, 4x"))?;
    if f == 0 || !f.is_power_of_two() {
        return Err(format!("resolution factor {f} is not a power of two"));
    }
    Ok(f.trailing_zeros())
}

impl Cli {
    pub fn settings(&self) -> Settings {
        Settings {
            seed: self.seed,
            refine: self.resolution,
            m: self.m,
        }
    }
}

/// Runs one command without writing anything.
pub fn run(cli: &Cli) -> Result<Report, CliError> {
    let settings = cli.settings();
    let cfg = cli.config.as_deref();
    match cli.command {
        Command::VerifyAlgebra => Ok(suites::algebra::run(&settings, &suites::load_config(cfg)?)),
        Command::VerifyKernels => suites::kernels::run(&settings, &suites::load_config(cfg)?),
        Command::VerifyBp => suites::bp::run(&settings, &suites::load_config(cfg)?),
        Command::JumpTest => suites::jump::run(&settings, &suites::load_config(cfg)?),
        Command::Dimension => suites::dimension::run(&settings, &suites::load_config(cfg)?),
        Command::Solve => {
            let base = cfg.and_then(Path::parent);
            suites::solve::run(&settings, &suites::load_config(cfg)?, base)
        }
        Command::Counterexample => suites::counterexample::run(&settings),
    }
}

/// Runs, writes the report and returns the process exit code. With `echo`,
/// one PASS/FAIL line per check goes to stdout.
pub fn execute(cli: &Cli, echo: bool) -> i32 {
    let report = match run(cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("{e}");
            return match e {
                CliError::Config(_) => EXIT_CONFIG,
                CliError::Runtime(_) => EXIT_TOLERANCE,
            };
        }
    };
    if let Err(e) = report.write(&cli.out) {
        eprintln!("cannot write report to {}: {e}", cli.out.display());
        return EXIT_CONFIG;
    }
    for c in report.checks.iter().filter(|_| echo) {
        println!("{} {} = {}", if c.passed { "PASS" } else { "FAIL" }, c.name, report::num(c.value));
    }
    if report.passed() {
        EXIT_PASS
    } else {
        EXIT_TOLERANCE
    }
}
