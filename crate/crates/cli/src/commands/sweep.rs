use std::collections::BTreeMap;

use gradclip::optimizers::run;
use gradclip::theory::{
    bound_det_nonconvex, bound_dp_sgd, bound_stoch_nonconvex, BoundReport, RateParams, Regime,
};
use gradclip::{Error, Method, Problem, RunConfig, Trace};
use rayon::prelude::*;

use super::{thread_pool, COMMON_KEYS};
use crate::config::Config;
use crate::csv::{self, num, opt_int, opt_num, Table};
use crate::error::Result;
use crate::setup::{build_problem, RunSettings, PROBLEM_KEYS, RUN_KEYS};
use crate::Options;

pub const SWEEP_HEADER: &[&str] = &[
    "c",
    "eta",
    "seed",
    "c_eta",
    "status",
    "final_f",
    "final_grad_norm",
    "min_grad_norm",
    "avg_grad_norm",
    "iters_to_target",
    "bound",
    "bound_status",
    "best_eta",
];

struct CellResult {
    cfg: RunConfig,
    diverged: bool,
    trace: Trace,
    bound: Option<BoundReport>,
}

/// The non-convex predictor matching the cell: deterministic, stochastic or DP.
/// `None` when no lower bound on `f` is known.
pub(crate) fn cell_bound(problem: &dyn Problem, cfg: &RunConfig, iterations: usize) -> Result<Option<BoundReport>> {
    let meta = problem.meta();
    let Some(f_low) = meta.f_star.or(meta.f_lower) else {
        return Ok(None);
    };
    let p = RateParams {
        f0: problem.value(&cfg.x0)? - f_low,
        l0: meta.l0,
        l1: meta.l1,
        l: meta.l,
        mu: meta.mu,
        sigma: meta.sigma(),
        c: cfg.c,
        eta: cfg.eta,
        iterations,
        batch: cfg.batch,
        sigma_dp: cfg.sigma_dp,
        ..Default::default()
    };
    Ok(Some(match cfg.method {
        Method::DpSgd => bound_dp_sgd(&p),
        m if m.is_stochastic() && !meta.is_deterministic() => bound_stoch_nonconvex(&p),
        _ => bound_det_nonconvex(&p),
    }))
}

/// `pass`/`fail` for hard bounds whose step-size condition holds, otherwise
/// `vacuous` or `reported`.
pub(crate) fn bound_status(report: &BoundReport, min_grad: f64, avg_grad: f64) -> &'static str {
    if !report.stepsize_ok {
        return "vacuous";
    }
    if !report.constants_source.is_hard_bound() {
        return "reported";
    }
    let observed = match report.regime {
        Regime::SmallC => min_grad,
        _ => avg_grad,
    };
    if observed <= report.predicted {
        "pass"
    } else {
        "fail"
    }
}

fn run_cell(problem: &dyn Problem, cfg: RunConfig) -> Result<CellResult> {
    let (trace, diverged) = match run(problem, &cfg) {
        Ok(trace) => (trace, false),
        Err(Error::Divergence { trace, .. }) => (*trace, true),
        Err(e) => return Err(e.into()),
    };
    let bound = if diverged {
        None
    } else {
        cell_bound(problem, &cfg, trace.last().t)?
    };
    Ok(CellResult {
        cfg,
        diverged,
        trace,
        bound,
    })
}

/// `(η, iterations to target per seed)`, `None` once a seed misses it.
type EtaHits = (f64, Option<Vec<usize>>);

/// Per `c`, the step size whose seeds all reach the target with the fewest
/// mean iterations; ties go to the smaller step size.
fn best_etas(results: &[CellResult]) -> BTreeMap<u64, f64> {
    let mut per_cell: BTreeMap<(u64, u64), EtaHits> = BTreeMap::new();
    for r in results {
        let key = (r.cfg.c.to_bits(), r.cfg.eta.to_bits());
        let entry = per_cell.entry(key).or_insert((r.cfg.eta, Some(Vec::new())));
        match (r.trace.target_hit, &mut entry.1) {
            (Some(t), Some(hits)) if !r.diverged => hits.push(t),
            _ => entry.1 = None,
        }
    }
    let mut best: BTreeMap<u64, (f64, f64)> = BTreeMap::new();
    for ((c_bits, _), (eta, hits)) in per_cell {
        let Some(hits) = hits else { continue };
        let mean = hits.iter().sum::<usize>() as f64 / hits.len() as f64;
        let slot = best.entry(c_bits).or_insert((mean, eta));
        if mean < slot.0 || (mean == slot.0 && eta < slot.1) {
            *slot = (mean, eta);
        }
    }
    best.into_iter().map(|(c, (_, eta))| (c, eta)).collect()
}

/// All grid cells, run in parallel and written in `(c, eta, seed)` order.
/// Diverged cells are recorded and do not stop the sweep.
pub(super) fn execute(cfg: &Config, opts: &Options) -> Result<()> {
    cfg.check_keys(&[COMMON_KEYS, PROBLEM_KEYS, RUN_KEYS])?;
    let problem = build_problem(cfg)?;
    let settings = RunSettings::from_config(cfg, problem.dim(), opts.seed_offset)?;
    let pool = thread_pool(opts.threads)?;
    let results: Vec<CellResult> = pool.install(|| {
        settings
            .cells()
            .into_par_iter()
            .map(|cell| run_cell(problem.as_ref(), cell))
            .collect::<Result<_>>()
    })?;
    let best = best_etas(&results);

    let mut table = Table::new(SWEEP_HEADER);
    for r in &results {
        let last = r.trace.last();
        let (bound, status) = match &r.bound {
            Some(b) => (
                num(b.predicted),
                bound_status(b, r.trace.min_grad_norm, r.trace.mean_grad_norm),
            ),
            None => (String::new(), "n_a"),
        };
        table.row(&[
            num(r.cfg.c),
            num(r.cfg.eta),
            r.cfg.seed.to_string(),
            num(r.cfg.c * r.cfg.eta),
            if r.diverged { "diverged" } else { "ok" }.to_string(),
            num(last.f_val),
            num(last.grad_norm),
            num(r.trace.min_grad_norm),
            num(r.trace.mean_grad_norm),
            opt_int(r.trace.target_hit),
            bound,
            status.to_string(),
            opt_num(best.get(&r.cfg.c.to_bits()).copied()),
        ]);
    }
    csv::write(&opts.out, &table.into_string())
}
