use std::process::ExitCode;

use clap::Parser;
use opderiv_cli::{configure_threads, run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| run(&cli));
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("opderiv: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
