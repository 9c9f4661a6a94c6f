//! `aqrm`: exact verification, derivation and numerical exploration of the
//! biased quantum Rabi model's hidden symmetries.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::output::Failure;

#[derive(Parser)]
#[command(name = "aqrm", version, about = "Hidden-symmetry toolkit for the biased quantum Rabi model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BasisArg {
    Original,
    Transformed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OpKind {
    /// The catalogued symmetry operator.
    J,
    /// The Hamiltonian.
    H,
}

#[derive(Args, Debug)]
pub struct OutputArgs {
    /// Directory for written artifacts.
    #[arg(long, env = "AQRM_OUT_DIR", default_value = "aqrm-out")]
    pub out: PathBuf,
    /// Artifact format; CSV is available for `scan` only.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Subcommand)]
enum Command {
    /// Check the catalogued J exactly: commutator, self-adjointness, Δ-flip and J².
    Verify {
        /// Bias as an exact rational, e.g. 1/2.
        #[arg(long, allow_hyphen_values = true)]
        eps: String,
        /// Coupling as an exact rational; symbolic when omitted.
        #[arg(long, allow_hyphen_values = true)]
        g: Option<String>,
        /// Level splitting as an exact rational; symbolic when omitted.
        #[arg(long, allow_hyphen_values = true)]
        delta: Option<String>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Solve the generating-function equations at order M for symbolic bias.
    Derive {
        #[arg(long = "M")]
        m: usize,
        /// Largest power of u = xy in the ansatz (default M + 2).
        #[arg(long)]
        bound: Option<usize>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Track the lowest levels over a coupling grid and locate minimal gaps.
    Scan {
        #[arg(long, allow_hyphen_values = true)]
        eps: String,
        #[arg(long, allow_hyphen_values = true, default_value = "0.7")]
        delta: String,
        #[arg(long, allow_hyphen_values = true, default_value = "0.05")]
        g_min: String,
        #[arg(long, allow_hyphen_values = true, default_value = "1.2")]
        g_max: String,
        #[arg(long, default_value_t = 400)]
        steps: usize,
        #[arg(long = "N", default_value_t = 60)]
        n: usize,
        #[arg(long, default_value_t = 8)]
        levels: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Find all symmetry operators of a given degree numerically.
    Discover {
        #[arg(long, allow_hyphen_values = true)]
        eps: String,
        #[arg(long, allow_hyphen_values = true, default_value = "0.8")]
        g: String,
        #[arg(long, allow_hyphen_values = true, default_value = "0.7")]
        delta: String,
        /// Degree of the operator ansatz.
        #[arg(long = "D")]
        d: u32,
        #[arg(long = "N", default_value_t = 40)]
        n: usize,
        /// Degree in H of the J² fit run on a one-dimensional result (default D).
        #[arg(long = "M")]
        m: Option<usize>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Fit J² by a polynomial in H on the untruncated block.
    FitJsq {
        #[arg(long, allow_hyphen_values = true)]
        eps: String,
        #[arg(long, allow_hyphen_values = true, default_value = "0.8")]
        g: String,
        #[arg(long, allow_hyphen_values = true, default_value = "0.7")]
        delta: String,
        /// Ansatz degree when J has to be discovered (default 2|ε|).
        #[arg(long = "D")]
        d: Option<u32>,
        #[arg(long = "N", default_value_t = 40)]
        n: usize,
        /// Degree of the polynomial in H (default D).
        #[arg(long = "M")]
        m: Option<usize>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Write an operator as JSON.
    ExportOp {
        #[arg(long, value_enum, default_value_t = OpKind::J)]
        op: OpKind,
        #[arg(long, allow_hyphen_values = true)]
        eps: String,
        #[arg(long, allow_hyphen_values = true)]
        g: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        delta: Option<String>,
        #[arg(long, value_enum, default_value_t = BasisArg::Original)]
        basis: BasisArg,
        #[command(flatten)]
        output: OutputArgs,
    },
}

fn run(cli: Cli) -> Result<bool, Failure> {
    match cli.command {
        Command::Verify { eps, g, delta, output } => commands::verify(&eps, g.as_deref(), delta.as_deref(), &output),
        Command::Derive { m, bound, output } => commands::derive(m, bound, &output),
        Command::Scan { eps, delta, g_min, g_max, steps, n, levels, output } => {
            commands::scan(&eps, &delta, &g_min, &g_max, steps, n, levels, &output)
        }
        Command::Discover { eps, g, delta, d, n, m, output } => commands::discover(&eps, &g, &delta, d, n, m, &output),
        Command::FitJsq { eps, g, delta, d, n, m, output } => commands::fit_jsq(&eps, &g, &delta, d, n, m, &output),
        Command::ExportOp { op, eps, g, delta, basis, output } => {
            commands::export_op(op, &eps, g.as_deref(), delta.as_deref(), basis, &output)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Checks(msg)) => {
            eprintln!("error: {}", msg);
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {}", msg);
            ExitCode::from(2)
        }
    }
}
