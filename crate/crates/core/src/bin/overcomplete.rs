use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use overcomplete::harness::commands::{self, DecomposeArgs, Outcome};

#[derive(Parser)]
#[command(name = "overcomplete", version, about = "Decompose overcomplete symmetric third-order tensors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample random unit components and optionally their tensor.
    Gen {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        rank: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        tensor_out: Option<PathBuf>,
    },
    /// Recover components from a tensor file.
    Decompose {
        #[arg(long)]
        tensor: PathBuf,
        #[arg(long)]
        rank: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        report: PathBuf,
        #[arg(long)]
        budget_scale: Option<f64>,
        #[arg(long)]
        accept_threshold: Option<f64>,
        #[arg(long)]
        dup_threshold: Option<f64>,
    },
    /// Match an estimate against the truth.
    Eval {
        #[arg(long)]
        truth: PathBuf,
        #[arg(long)]
        est: PathBuf,
        #[arg(long)]
        report: PathBuf,
    },
    /// Print the advisory condition checks for a component set.
    Diag {
        #[arg(long)]
        components: PathBuf,
    },
    /// Simultaneous diagonalisation baseline (rank at most the dimension).
    OracleJennrich {
        #[arg(long)]
        tensor: PathBuf,
        #[arg(long)]
        rank: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Time the pipeline over a grid of dimensions and ratios.
    Bench {
        #[arg(long)]
        grid: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        lift_iters: Option<usize>,
    },
}

fn run(cli: Cli) -> overcomplete::Result<Outcome> {
    match cli.command {
        Command::Gen { dim, rank, seed, out, tensor_out } => commands::gen(dim, rank, seed, &out, tensor_out.as_deref()),
        Command::Decompose { tensor, rank, seed, out, report, budget_scale, accept_threshold, dup_threshold } => {
            commands::decompose_file(&DecomposeArgs {
                tensor: &tensor,
                rank,
                seed,
                out: &out,
                report: &report,
                budget_scale,
                accept_threshold,
                dup_threshold,
            })
        }
        Command::Eval { truth, est, report } => commands::eval(&truth, &est, &report),
        Command::Diag { components } => {
            let (json, outcome) = commands::diag(&components)?;
            println!("{json}");
            Ok(outcome)
        }
        Command::OracleJennrich { tensor, rank, seed, out } => {
            println!("{}", commands::oracle_jennrich(&tensor, rank, seed, out.as_deref())?);
            Ok(Outcome::Complete)
        }
        Command::Bench { grid, seed, out, lift_iters } => commands::bench(&grid, seed, &out, lift_iters),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(o) => ExitCode::from(o.exit_code() as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
