mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "precond-opt", version, about = "Approximately optimal diagonal preconditioners")]
struct Cli {
    /// TOML file with solver settings.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the seed from the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for reports, traces and diagonals.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Writes a synthetic `AᵀA + αI` matrix in MatrixMarket format.
    Gen(commands::GenArgs),
    /// Optimal preconditioner over the span of a basis.
    Precondition(commands::PreconditionArgs),
    /// Iterative improvement by pricing on the dual diagonal.
    Iterate(commands::IterateArgs),
    /// Condition number estimate.
    Estimate(MatrixArg),
    /// Conjugate-gradient matvec counts for several preconditioners.
    BenchPcg(commands::BenchArgs),
    /// Off-diagonal sparsity pattern score.
    Score(commands::ScoreArgs),
}

#[derive(Args, Debug)]
pub struct MatrixArg {
    /// MatrixMarket file.
    pub matrix: PathBuf,
    /// Caps each oracle run at this many Lanczos steps.
    #[arg(long)]
    pub oracle_iters: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(code) => code,
        Err(e) => {
            let code = commands::exit_code(&e);
            let body = serde_json::json!({
                "error": commands::error_kind(&e),
                "message": e.to_string(),
                "exit_code": code,
            });
            eprintln!("{body}");
            ExitCode::from(code)
        }
    }
}
