use std::process::ExitCode;

use chj_cli::config::{parse_config, Cli};
use chj_cli::run::{run, Status};
use chj_cli::{CliError, EXIT_INVALID, EXIT_VIOLATION};
use clap::Parser;

/// `CHJ_THREADS` caps rayon's worker count; unset or 0 leaves it automatic.
fn init_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("CHJ_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().map_err(|_| format!("CHJ_THREADS must be a nonnegative integer, got `{v}`"))?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            // --help and --version land here too.
            return ExitCode::from(if e.use_stderr() { EXIT_INVALID as u8 } else { 0 });
        }
    };
    if let Err(e) = init_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_INVALID as u8);
    }
    let result = parse_config(cli).and_then(|cfg| run(&cfg));
    match result {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Violation(msg)) => {
            eprintln!("property violation: {msg}");
            ExitCode::from(EXIT_VIOLATION as u8)
        }
        Err(CliError::BrokenPipe) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INVALID as u8)
        }
    }
}
