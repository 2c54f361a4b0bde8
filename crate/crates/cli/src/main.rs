use std::process::ExitCode;

use clap::Parser;
use skewt_bench::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(manifest) => {
            for path in &manifest.outputs {
                eprintln!("wrote {}", path.display());
            }
            eprintln!("{}", manifest.summary);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
