use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use dirac_weyl::cli::{self, Command, OutputFormat, RunOptions};

/// Weyl functions, boundary triples and defect counts for Dirac-type systems.
#[derive(Debug, Parser)]
#[command(name = "dirac-weyl", version)]
struct Args {
    /// Pipeline to run.
    #[arg(value_enum)]
    command: Command,
    /// Scenario config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `outputs.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for the λ grid.
    #[arg(long)]
    threads: Option<usize>,
    /// Compute strip-regime candidates instead of refusing them.
    #[arg(long)]
    force: bool,
    /// Table format; overrides `outputs.format`.
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let args = Args::parse();
    let opts = RunOptions {
        out_dir: args.out,
        threads: args.threads,
        force: args.force,
        format: args.format,
    };
    match cli::run(args.command, &args.config, &opts) {
        Ok(outcome) => {
            print!("{}", outcome.summary);
            ExitCode::from(outcome.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
