mod commands;
mod config;
mod table;

use std::process::ExitCode;

use clap::Parser;
use wgscatter::ScatterError;

use crate::config::{Cli, RunConfig};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let config = match RunConfig::resolve(cli.command, &cli.options) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let outcome = match commands::run(&config) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {} failed: {e}", config.command.name());
            let usage = matches!(e, ScatterError::InvalidParameter(_) | ScatterError::InvalidGrid(_));
            return ExitCode::from(if usage { 2 } else { 1 });
        }
    };
    match table::emit(&outcome.tables, config.format, config.out.as_deref()) {
        // reader closed early, e.g. `| head`
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => {}
        Err(e) => {
            eprintln!("error: cannot write output: {e}");
            return ExitCode::from(1);
        }
        Ok(()) => {}
    }
    if outcome.passed {
        ExitCode::SUCCESS
    } else {
        eprintln!("validation failed");
        ExitCode::from(1)
    }
}
