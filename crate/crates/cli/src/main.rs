use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gradclip_cli::{execute, Command, Options};

/// Gradient-clipping experiments driven by key=value config files.
#[derive(Parser)]
#[command(name = "gradclip", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one optimizer configuration and write its trace as CSV.
    Run(CommonArgs),
    /// Run a (c, eta, seed) grid and write one summary row per cell.
    Sweep(CommonArgs),
    /// Tabulate the lower-bound constructions and their exact fixed points.
    Fixedpoint(CommonArgs),
    /// Check declared smoothness constants and analytic gradients.
    Certify(CommonArgs),
    /// Compare a trace or sweep file against a convergence bound.
    Bound(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Added to every seed in the config.
    #[arg(long, default_value_t = 0)]
    seed_offset: u64,
    /// Worker threads for sweeps; defaults to the number of cores.
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (command, args) = match cli.command {
        Cmd::Run(a) => (Command::Run, a),
        Cmd::Sweep(a) => (Command::Sweep, a),
        Cmd::Fixedpoint(a) => (Command::Fixedpoint, a),
        Cmd::Certify(a) => (Command::Certify, a),
        Cmd::Bound(a) => (Command::Bound, a),
    };
    let opts = Options {
        config: args.config,
        out: args.out,
        seed_offset: args.seed_offset,
        threads: args.threads,
    };
    match execute(command, &opts) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("gradclip: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
