use std::path::PathBuf;
use std::process::ExitCode;

use censorship_auction_cli::{run_to_dir, Command};
use clap::Parser;

/// Solve, simulate and verify censorship auctions from a JSON config.
#[derive(Debug, Parser)]
#[command(version)]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// JSON run config.
    #[arg(long)]
    config: PathBuf,
    /// Directory for `<command>.csv` and `summary.txt`.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Overrides the config's seed.
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run_to_dir(args.command, &args.config, &args.out, args.seed) {
        Ok(output) => {
            print!("{}", output.stdout);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("censor-auction {}: {e}", args.command.name());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
