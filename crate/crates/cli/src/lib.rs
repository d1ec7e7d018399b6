//! Config-driven experiments on top of `gradclip`: single runs, parameter
//! sweeps, lower-bound fixed-point tables, smoothness certification and
//! trace-versus-bound checks.

pub mod commands;
pub mod config;
pub mod csv;
pub mod error;
pub mod setup;

use std::path::PathBuf;

pub use commands::Command;
pub use config::Config;
pub use error::{CliError, Result};

#[derive(Debug, Clone)]
pub struct Options {
    pub config: PathBuf,
    pub out: PathBuf,
    pub seed_offset: u64,
    pub threads: Option<usize>,
}

/// Loads the config, checks its `mode` (if any) against `command`, and runs it.
pub fn execute(command: Command, opts: &Options) -> Result<()> {
    let cfg = Config::load(&opts.config)?;
    if let Some(mode) = cfg.str("mode") {
        if mode != command.as_str() {
            return Err(CliError::config(format!(
                "config is for mode {mode:?}, invoked as {:?}",
                command.as_str()
            )));
        }
    }
    commands::dispatch(command, &cfg, opts)
}
