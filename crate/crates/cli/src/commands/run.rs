use gradclip::optimizers::run;
use gradclip::{Error, Trace};

use super::COMMON_KEYS;
use crate::config::Config;
use crate::csv::{self, num, Table};
use crate::error::{CliError, Result};
use crate::setup::{build_problem, RunSettings, PROBLEM_KEYS, RUN_KEYS};
use crate::Options;

pub const TRACE_HEADER: &[&str] = &["iter", "f_val", "grad_norm", "applied_norm", "clipped_fraction"];

pub(crate) fn trace_csv(trace: &Trace) -> String {
    let mut table = Table::new(TRACE_HEADER);
    for r in &trace.records {
        table.row(&[
            r.t.to_string(),
            num(r.f_val),
            num(r.grad_norm),
            num(r.applied_norm),
            num(r.clipped_fraction),
        ]);
    }
    table.into_string()
}

/// One grid cell; writes the full trace. A diverged run still writes what it
/// recorded before failing.
pub(super) fn execute(cfg: &Config, opts: &Options) -> Result<()> {
    cfg.check_keys(&[COMMON_KEYS, PROBLEM_KEYS, RUN_KEYS])?;
    let problem = build_problem(cfg)?;
    let settings = RunSettings::from_config(cfg, problem.dim(), opts.seed_offset)?;
    let cells = settings.cells();
    let [cell] = cells.as_slice() else {
        return Err(CliError::config(format!(
            "run needs exactly one (c, eta, seed) cell, config has {}; use sweep",
            cells.len()
        )));
    };
    match run(problem.as_ref(), cell) {
        Ok(trace) => csv::write(&opts.out, &trace_csv(&trace)),
        Err(Error::Divergence { t, trace }) => {
            csv::write(&opts.out, &trace_csv(&trace))?;
            Err(CliError::Divergence(format!("iterate left the finite region at t = {t}")))
        }
        Err(e) => Err(e.into()),
    }
}
