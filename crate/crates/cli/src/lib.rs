//! Command-line front end for the `hairstep` crate and the HTTP service that
//! hands out depth-pair annotation tasks.

pub mod cli;
pub mod commands;
pub mod exit;
pub mod service;

pub use cli::Cli;

/// Runs one parsed command line.
pub fn run(cli: Cli) -> anyhow::Result<()> {
    commands::dispatch(cli.command)
}
