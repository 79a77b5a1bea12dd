// SPDX-License-Identifier: Apache-2.0

//! `gitteams` command-line entry point.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.

mod args;
mod commands;
mod config;
mod error;
mod report;
mod run;

use clap::error::ErrorKind;
use clap::Parser;

use crate::args::Cli;

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };

    let level = match cli.global.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();

    if let Err(e) = commands::dispatch(&cli.command, cli.global) {
        eprintln!("gitteams: {e}");
        std::process::exit(e.exit_code());
    }
}
