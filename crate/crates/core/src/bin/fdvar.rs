use std::process::ExitCode;

use clap::Parser;
use fdvar::harness::cli::{configure_threads, run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads(std::env::var("FDVAR_THREADS").ok().as_deref()) {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    let code = run(&cli, &mut std::io::stdout().lock(), &mut std::io::stderr().lock());
    ExitCode::from(code as u8)
}
