use std::process::ExitCode;

use clap::Parser;
use moea_cli::{execute, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut stdout = std::io::stdout().lock();
    match execute(&cli.command, &mut stdout) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("moea: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
