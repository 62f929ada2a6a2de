use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use cocycle_lab_cli::{run, RunOptions};

/// Run one cocycle-lab experiment from a JSON config.
#[derive(Parser)]
#[command(version, about)]
struct Args {
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the seeds in the config.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let opts = RunOptions {
        config: args.config,
        out: args.out,
        seed: args.seed,
        threads: args.threads,
    };
    match run(&opts) {
        Ok(a) => {
            println!("{}", a.csv.display());
            println!("{}", a.json.display());
            println!("{}", a.manifest.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
