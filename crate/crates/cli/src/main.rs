use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = spikezo_cli::Cli::parse();
    match spikezo_cli::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("spikezo: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
