use std::process::ExitCode;

use clap::Parser;

mod args;
mod commands;
mod output;
mod verify;

use args::Cli;

const EXIT_FAILURE: u8 = 1;
const EXIT_USAGE: u8 = 2;

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("KPLUME_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .map_err(|_| format!("KPLUME_THREADS must be a non-negative integer, got `{raw}`"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(EXIT_USAGE);
    }
    match commands::run(&cli.command) {
        Ok(status) => ExitCode::from(status),
        Err(err) => {
            eprintln!("error: {err:#}");
            // invalid parameters are usage errors; everything else (I/O,
            // malformed manifests) is a plain failure
            if err.downcast_ref::<kplume::Error>().is_some() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::from(EXIT_FAILURE)
            }
        }
    }
}
