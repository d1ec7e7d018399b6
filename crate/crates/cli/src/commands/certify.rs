use gradclip::theory::{certify_smoothness, gradient_check};

use super::COMMON_KEYS;
use crate::config::Config;
use crate::csv::{self, finding, num};
use crate::error::{CliError, Result};
use crate::setup::{build_problem, PROBLEM_KEYS};
use crate::Options;

const KEYS: &[&str] = &["l0", "l1", "pairs", "radius", "seed", "fd_points", "fd_tol"];

/// At most this many witnesses are written per report.
const MAX_WITNESSES: usize = 20;

/// Smoothness certificate for the configured problem with its declared
/// constants (or `l0`/`l1` overrides) plus a finite-difference gradient check.
pub(super) fn execute(cfg: &Config, opts: &Options) -> Result<()> {
    cfg.check_keys(&[COMMON_KEYS, PROBLEM_KEYS, KEYS])?;
    let problem = build_problem(cfg)?;
    let meta = problem.meta();
    let l0 = cfg.get_or("l0", meta.l0)?;
    let l1 = cfg.get_or("l1", meta.l1)?;
    let pairs = cfg.get_or("pairs", 1000)?;
    let radius = cfg.get_or("radius", 1.0)?;
    let seed = cfg.get_or("seed", 0u64)?.wrapping_add(opts.seed_offset);
    let fd_points = cfg.get_or("fd_points", 20)?;
    let fd_tol = cfg.get_or("fd_tol", 1e-5)?;

    let cert = certify_smoothness(problem.as_ref(), l0, l1, pairs, radius, seed)?;
    let fd = gradient_check(problem.as_ref(), fd_points, radius, seed)?;
    let fd_ok = fd.max_rel_error <= fd_tol;

    let mut report = finding(&[
        ("problem", problem.name().to_string()),
        ("l0", num(l0)),
        ("l1", num(l1)),
        ("pairs", pairs.to_string()),
        ("radius", num(radius)),
        ("violations", cert.violations.len().to_string()),
        ("domination_checked", cert.domination_checked.to_string()),
    ]);
    report += &finding(&[
        ("gradient_check_points", fd.points.to_string()),
        ("max_rel_error", num(fd.max_rel_error)),
        ("tolerance", num(fd_tol)),
        ("status", if fd_ok { "pass" } else { "fail" }.to_string()),
    ]);
    for v in cert.violations.iter().take(MAX_WITNESSES) {
        report += &finding(&[
            ("violation", v.kind.as_str().to_string()),
            ("lhs", num(v.lhs)),
            ("rhs", num(v.rhs)),
            ("x", format!("{:?}", v.x.coords())),
            ("y", format!("{:?}", v.y.coords())),
        ]);
    }
    let ok = cert.passed() && fd_ok;
    report += &finding(&[("status", if ok { "pass" } else { "fail" }.to_string())]);
    csv::write(&opts.out, &report)?;
    if !ok {
        return Err(CliError::Failed(format!(
            "{} smoothness violations, gradient error {}",
            cert.violations.len(),
            fd.max_rel_error
        )));
    }
    Ok(())
}
