//! Command-line front end: `select`, `benchmark`, `toy` and `oracle-check`.

pub mod args;
pub mod commands;

use std::fmt;

pub use args::{Cli, Command};
pub use commands::toy::{toy_report, Status, ToyReport};

/// Bad flag combination found after parsing; exits with status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

/// Runs one subcommand and returns the process exit status.
pub fn run(cli: Cli) -> anyhow::Result<i32> {
    match cli.command {
        Command::Select(a) => commands::select::run(&a),
        Command::Benchmark(a) => commands::benchmark::run(&a),
        Command::Toy(a) => commands::toy::run(&a),
        Command::OracleCheck(a) => commands::oracle::run(&a),
    }
}
