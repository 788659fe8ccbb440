use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = quasilin_cli::Cli::parse();
    match quasilin_cli::run(&cli) {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
