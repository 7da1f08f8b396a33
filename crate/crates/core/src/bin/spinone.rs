//! Batch experiment driver.
//!
//! ```text
//! spinone --config run.toml [--out DIR] [--seed N] [--threads N]
//! ```
//!
//! Runs the experiment family named in the config and writes CSV data files
//! plus `summary.json` into the output directory. Exits nonzero on any
//! module error.

use clap::Parser;
use spinone::experiments::{run_experiment, ExperimentConfig};
use std::path::PathBuf;

#[derive(Parser, Debug)]
#[command(name = "spinone", about = "Qutrit spin-1 chain simulation experiments")]
struct Args {
    /// Experiment config (TOML, one experiment per invocation).
    #[arg(long)]
    config: PathBuf,

    /// Output directory (defaults to the config's `out_dir` or `./out`).
    #[arg(long)]
    out: Option<PathBuf>,

    /// Override the config seed.
    #[arg(long)]
    seed: Option<u64>,

    /// Worker threads for sweep grids (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

fn main() {
    let args = Args::parse();
    if let Some(t) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("warning: could not set thread count: {e}");
        }
    }
    let mut cfg = match ExperimentConfig::load(&args.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(2);
        }
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let out_dir = args
        .out
        .or_else(|| cfg.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    match run_experiment(&cfg, &out_dir) {
        Ok(outcome) => {
            println!("wrote {} file(s) to {}", outcome.files.len(), out_dir.display());
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(1);
        }
    }
}
