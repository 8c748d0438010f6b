use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use fiberdraw::cli::{run_cli, Mode};

/// Thin-fiber drawing solver with runtime bound verification.
#[derive(Parser, Debug)]
#[command(name = "fiberdraw", version)]
struct Args {
    mode: Mode,
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides `output.directory`).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();
    if let Some(threads) = std::env::var("FIBERDRAW_THREADS").ok().and_then(|s| s.parse::<usize>().ok()) {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            log::warn!("cannot size the worker pool: {e}");
        }
    }
    match run_cli(args.mode, &args.config, args.out.as_deref()) {
        Ok(outcome) => {
            print!("{}", outcome.summary);
            ExitCode::from(outcome.exit_code as u8)
        }
        Err(e) => {
            eprintln!("fiberdraw: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
