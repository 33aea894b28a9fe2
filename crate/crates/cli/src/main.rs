//! `diagforge`: reads a JSON spec, runs one construction or check, writes a
//! JSON report.
//!
//! Exit codes: 0 success, 2 infeasible (a certified negative answer),
//! 3 invalid input, 4 tolerance, model-size or verification failure.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use diagforge::Error;
use serde_json::json;

#[derive(Parser, Debug)]
#[command(name = "diagforge", version, about = "Prescribed diagonals of normal operators and projection families")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// JSON input file; stdin when absent or `-`.
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// Report destination; stdout when absent.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Target accuracy of a construction.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub eps: Option<f64>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Matrix-model dimension cap; overrides DIAGFORGE_MAX_DIM.
    #[arg(long, global = true)]
    pub max_dim: Option<usize>,
    /// Verification tolerance.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Unitary making the diagonal of U*NU constant.
    Flatten,
    /// Projection families with prescribed approximate diagonals.
    #[command(subcommand)]
    Carpenter(CarpenterCmd),
    /// Unitaries realizing a target diagonal up to eps.
    #[command(subcommand)]
    Synth(SynthCmd),
    /// Exact feasibility of a step diagonal in the tracial model.
    Feasibility,
    /// Certified obstructions.
    #[command(subcommand)]
    Obstruct(ObstructCmd),
    /// Re-checks emitted artifacts.
    #[command(subcommand)]
    Verify(VerifyCmd),
}

#[derive(Subcommand, Debug)]
pub enum CarpenterCmd {
    /// One block: diag(P_k) close to (α_k, β_k, ..., β_k).
    Block {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        alpha: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        beta: Option<Vec<f64>>,
    },
    /// Head plus periodic tail, realized on a truncation.
    Discrete,
    /// Partition of unity with trace targets in a matrix model.
    Tracial,
    /// Dyadic matrix model.
    Uhf,
}

#[derive(Subcommand, Debug)]
pub enum SynthCmd {
    Discrete,
    Tracial,
}

#[derive(Subcommand, Debug)]
pub enum ObstructCmd {
    /// Searches U(3) for the 3×3 obstruction and reports the empirical floor.
    Arveson {
        #[arg(long, default_value_t = 200)]
        restarts: usize,
        #[arg(long, default_value_t = 2000)]
        iters: usize,
    },
    /// Farkas certificate for the four-point square.
    Square,
    /// Runs the 3×3 search beside the truncated constructions.
    Contrast {
        #[arg(long, default_value_t = 200)]
        restarts: usize,
        #[arg(long, default_value_t = 2000)]
        iters: usize,
    },
}

#[derive(Subcommand, Debug)]
pub enum VerifyCmd {
    /// Projection axioms of a family or of the spectral projections of a
    /// synthesized unitary.
    Family,
    /// Diagonal entries inside the convex hull of the spectrum.
    Necessity,
}

/// Failure of a command with the exit code it maps to.
pub enum Failure {
    Core(Error),
    Input(String),
    /// Verification ran and failed.
    Check(String),
    /// Certified negative answer already reported on stdout.
    Negative,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Input(format!("malformed JSON: {e}"))
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Input(format!("i/o: {e}"))
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Infeasible(_) => 2,
        Error::ToleranceUnreachable(_) | Error::ModelTooCoarse(_) => 4,
        Error::NotNormal { .. }
        | Error::DegenerateHull
        | Error::DimensionMismatch { .. }
        | Error::InvalidInput(_)
        | Error::InfeasibleInput(_)
        | Error::NecessityViolated { .. } => 3,
    }
}

fn main() -> ExitCode {
    // clap exits 2 on usage errors, which would read as "infeasible".
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 3 } else { 0 });
        }
    };
    let result = match &cli.command {
        Command::Flatten => commands::flatten(&cli.global),
        Command::Carpenter(c) => commands::carpenter(&cli.global, c),
        Command::Synth(c) => commands::synth(&cli.global, c),
        Command::Feasibility => commands::feasibility(&cli.global),
        Command::Obstruct(c) => commands::obstruct(&cli.global, c),
        Command::Verify(c) => commands::verify(&cli.global, c),
    };
    let (code, body) = match result {
        Ok(()) => return ExitCode::SUCCESS,
        Err(Failure::Negative) => return ExitCode::from(2),
        Err(Failure::Core(e)) => {
            let code = exit_code(&e);
            let mut body = json!({ "kind": e.kind(), "message": e.to_string() });
            if let Error::Infeasible(cert) = &e {
                body["certificate"] = serde_json::to_value(cert).unwrap_or_default();
            }
            (code, body)
        }
        Err(Failure::Input(m)) => (3, json!({ "kind": "InvalidInput", "message": m })),
        Err(Failure::Check(m)) => (4, json!({ "kind": "VerificationFailed", "message": m })),
    };
    eprintln!("{}", output::to_json(&json!({ "error": body, "exit_code": code })));
    ExitCode::from(code)
}
