use std::process::ExitCode;

use clap::Parser;
use vortwave_cli::{exit, run, Cli};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::CONFIG as u8 } else { exit::PASS as u8 });
        }
    };
    match run(&cli) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::from(exit::PASS as u8)
        }
        Err(e) => {
            eprintln!("vortwave: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
