//! Command-line front end for `ising-rg-core`.
//!
//! Every command reads a flat `key = value` config (optionally from a file),
//! applies `--key value` overrides and emits one JSON document or a CSV table.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::io::Write;
use std::path::PathBuf;

use clap::Parser;

pub use commands::{run_command, Command, Document};
pub use config::{Format, RunConfig};
pub use error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(
    name = "ising-rg",
    version,
    about = "1D Ising transfer-matrix, RG flow and dynamics experiments"
)]
pub struct Cli {
    pub command: Command,
    /// Flat `key = value` file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Overrides as `--key value` or `--key=value`.
    #[arg(
        trailing_var_arg = true,
        allow_hyphen_values = true,
        value_name = "--KEY VALUE"
    )]
    pub overrides: Vec<String>,
}

impl Cli {
    pub fn run_config(&self) -> CliResult<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        cfg.apply_overrides(&self.overrides)?;
        Ok(cfg)
    }
}

/// Runs one command and writes its output. Returns whether its checks passed.
pub fn execute(cli: &Cli) -> CliResult<bool> {
    let cfg = cli.run_config()?;
    let format = cfg.format()?;
    let doc = run_command(cli.command, &cfg)?;
    let bytes = output::render(&doc, format)?;
    match cfg.output() {
        Some(path) => std::fs::write(path, &bytes)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(&bytes)?;
            out.flush()?;
        }
    }
    Ok(doc.passed())
}
