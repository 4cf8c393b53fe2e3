use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use slicereg::{run, Command, Overrides};

/// Quaternionic slice-regular numerics from JSON job specs.
#[derive(Parser, Debug)]
#[command(name = "slicereg", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// Job spec (JSON).
    #[arg(long)]
    spec: PathBuf,
    /// Output file; defaults to the spec's "output" or standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Quadrature tolerance override.
    #[arg(long)]
    tol: Option<f64>,
    /// Seed for randomized point sets.
    #[arg(long)]
    seed: Option<u64>,
    /// Refinement levels (ladders) or solver level.
    #[arg(long)]
    refine: Option<u32>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let ov = Overrides { tol: cli.tol, seed: cli.seed, refine: cli.refine };
    match run(cli.command, &cli.spec, cli.out.as_deref(), ov) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("slicereg {}: {e}", cli.command.name());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
