use std::process::ExitCode;

use clap::Parser;
use tnorm_risk::cli::{self, Cli};

fn main() -> ExitCode {
    let args = Cli::parse();
    let stdout = std::io::stdout();
    match cli::run(&args, &mut stdout.lock()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
