use crate::config::Config;
use crate::error::{CliError, Result};
use crate::Options;

mod bound;
mod certify;
mod fixedpoint;
mod run;
mod sweep;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Run,
    Sweep,
    Fixedpoint,
    Certify,
    Bound,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Run => "run",
            Command::Sweep => "sweep",
            Command::Fixedpoint => "fixedpoint",
            Command::Certify => "certify",
            Command::Bound => "bound",
        }
    }
}

const COMMON_KEYS: &[&str] = &["mode"];

pub(crate) fn dispatch(command: Command, cfg: &Config, opts: &Options) -> Result<()> {
    match command {
        Command::Run => run::execute(cfg, opts),
        Command::Sweep => sweep::execute(cfg, opts),
        Command::Fixedpoint => fixedpoint::execute(cfg, opts),
        Command::Certify => certify::execute(cfg, opts),
        Command::Bound => bound::execute(cfg, opts),
    }
}

pub(crate) fn thread_pool(threads: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        if n == 0 {
            return Err(CliError::config("--threads must be at least 1"));
        }
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| CliError::config(format!("cannot start thread pool: {e}")))
}
