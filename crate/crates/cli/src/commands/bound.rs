use std::collections::BTreeMap;

use gradclip::theory::{
    bound_det_convex, bound_det_nonconvex, bound_det_strongly_convex, bound_dp_sgd,
    bound_stoch_nonconvex, BoundReport, RateParams, Statistic, Theorem,
};

use super::COMMON_KEYS;
use crate::config::Config;
use crate::csv::{self, finding, num};
use crate::error::{CliError, Result};
use crate::Options;

const KEYS: &[&str] = &[
    "theorem",
    "trace",
    "sweep",
    "f0",
    "r0",
    "l0",
    "l1",
    "l",
    "mu",
    "sigma",
    "c",
    "eta",
    "iterations",
    "batch",
    "sigma_dp",
    "f_star",
    "epsilon",
    "trajectory_smoothness",
];

fn evaluate(theorem: Theorem, p: &RateParams, epsilon: Option<f64>) -> Result<BoundReport> {
    Ok(match theorem {
        Theorem::DetConvex => bound_det_convex(p),
        Theorem::DetNonconvex => bound_det_nonconvex(p),
        Theorem::StochNonconvex => bound_stoch_nonconvex(p),
        Theorem::DpSgd => bound_dp_sgd(p),
        Theorem::DetStronglyConvex => {
            let eps = epsilon.ok_or_else(|| CliError::config("det_strongly_convex needs epsilon"))?;
            bound_det_strongly_convex(p, eps)?
        }
    })
}

/// A comparison is asserted only for hard bounds with a satisfied step-size
/// condition on a statistic the input file carries.
fn status(report: &BoundReport, observed: Option<f64>) -> &'static str {
    if !report.stepsize_ok {
        "vacuous"
    } else if !report.constants_source.is_hard_bound() {
        "reported"
    } else {
        match observed {
            None => "reported",
            Some(v) if v <= report.predicted => "pass",
            Some(_) => "fail",
        }
    }
}

struct Check {
    lines: String,
    failures: usize,
}

impl Check {
    fn add(&mut self, label: &[(&str, String)], report: &BoundReport, observed: Option<f64>) {
        let st = status(report, observed);
        self.failures += usize::from(st == "fail");
        let mut fields: Vec<(&str, String)> = label.to_vec();
        fields.extend([
            ("theorem", report.theorem.as_str().to_string()),
            ("regime", report.regime.as_str().to_string()),
            ("statistic", report.statistic.as_str().to_string()),
            ("observed", observed.map(num).unwrap_or_else(|| "n_a".into())),
            ("predicted", num(report.predicted)),
            ("constants", report.constants_source.as_str().to_string()),
            ("status", st.to_string()),
        ]);
        self.lines += &finding(&fields);
    }
}

fn column(header: &[String], name: &str) -> Result<usize> {
    header
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| CliError::Data(format!("input file has no column {name:?}")))
}

fn parse_field(s: &str) -> Result<f64> {
    s.parse()
        .map_err(|_| CliError::Data(format!("cannot parse number {s:?}")))
}

/// Checks a run trace at every recorded `t` (each prefix is itself a run of
/// length `t`); stochastic bounds hold in expectation, so a single trace is
/// only compared at its end. The first violation and the final comparison are
/// reported. Gradient statistics are taken over the recorded rows.
fn check_trace(cfg: &Config, theorem: Theorem, base: RateParams, epsilon: Option<f64>, check: &mut Check) -> Result<()> {
    let path = cfg.path("trace").expect("checked by caller");
    let (header, rows) = csv::read(&path)?;
    let (i_t, i_f, i_g) = (column(&header, "iter")?, column(&header, "f_val")?, column(&header, "grad_norm")?);
    let f_star: Option<f64> = cfg.get("f_star")?;
    if theorem == Theorem::DetConvex && f_star.is_none() {
        return Err(CliError::config("det_convex needs f_star"));
    }
    let use_trajectory = cfg.bool_or("trajectory_smoothness", false)?;

    let mut grads = Vec::with_capacity(rows.len());
    let mut min_grad = f64::INFINITY;
    let mut traj = base.l0;
    let mut first_failure = None;
    let mut last = Check { lines: String::new(), failures: 0 };
    for (k, row) in rows.iter().enumerate() {
        let t: usize = row[i_t]
            .parse()
            .map_err(|_| CliError::Data(format!("bad iteration index {:?}", row[i_t])))?;
        let f = parse_field(&row[i_f])?;
        let g = parse_field(&row[i_g])?;
        grads.push(g);
        min_grad = min_grad.min(g);
        traj = traj.max(base.l0 + base.l1 * g);
        let p = RateParams {
            iterations: t,
            l_trajectory: use_trajectory.then_some(traj),
            ..base
        };
        let report = evaluate(theorem, &p, epsilon)?;
        let asserted = theorem != Theorem::StochNonconvex || k + 1 == rows.len();
        let observed = match report.statistic {
            _ if !asserted => None,
            Statistic::FinalGap => f_star.map(|fs| f - fs),
            Statistic::MinGradNorm => Some(min_grad),
            Statistic::AvgGradNorm => Some(grads.iter().sum::<f64>() / grads.len() as f64),
            Statistic::Iterations => None,
        };
        last = Check { lines: String::new(), failures: 0 };
        last.add(&[("t", t.to_string())], &report, observed);
        check.failures += last.failures;
        if last.failures > 0 && first_failure.is_none() {
            first_failure = Some(last.lines.clone());
        }
    }
    if let Some(line) = first_failure {
        check.lines += &line;
    }
    check.lines += &last.lines;
    check.lines += &finding(&[("rows_checked", rows.len().to_string())]);
    Ok(())
}

/// Checks a sweep summary: per `(c, eta)` cell the mean over non-diverged seeds
/// is compared with the bound at that cell's `c` and `eta`.
/// `(c, η, [final_f, min_grad_norm, avg_grad_norm] per ok seed)`
type SweepCell = (f64, f64, Vec<[f64; 3]>);

fn check_sweep(cfg: &Config, theorem: Theorem, base: RateParams, epsilon: Option<f64>, check: &mut Check) -> Result<()> {
    let path = cfg.path("sweep").expect("checked by caller");
    let (header, rows) = csv::read(&path)?;
    let cols = ["c", "eta", "status", "final_f", "min_grad_norm", "avg_grad_norm"]
        .map(|name| column(&header, name));
    let [i_c, i_eta, i_status, i_f, i_min, i_avg] = cols;
    let (i_c, i_eta, i_status, i_f, i_min, i_avg) = (i_c?, i_eta?, i_status?, i_f?, i_min?, i_avg?);
    let f_star: Option<f64> = cfg.get("f_star")?;

    let mut cells: BTreeMap<(u64, u64), SweepCell> = BTreeMap::new();
    for row in &rows {
        let c = parse_field(&row[i_c])?;
        let eta = parse_field(&row[i_eta])?;
        let entry = cells.entry((c.to_bits(), eta.to_bits())).or_insert((c, eta, Vec::new()));
        if row[i_status] == "ok" {
            entry.2.push([parse_field(&row[i_f])?, parse_field(&row[i_min])?, parse_field(&row[i_avg])?]);
        }
    }
    for (c, eta, seeds) in cells.into_values() {
        let p = RateParams { c, eta, ..base };
        let report = evaluate(theorem, &p, epsilon)?;
        let n = seeds.len() as f64;
        let mean = |k: usize| seeds.iter().map(|s| s[k]).sum::<f64>() / n;
        let observed = if seeds.is_empty() {
            None
        } else {
            match report.statistic {
                Statistic::FinalGap => f_star.map(|fs| mean(0) - fs),
                Statistic::MinGradNorm => Some(mean(1)),
                Statistic::AvgGradNorm => Some(mean(2)),
                Statistic::Iterations => None,
            }
        };
        check.add(
            &[("c", num(c)), ("eta", num(eta)), ("seeds", seeds.len().to_string())],
            &report,
            observed,
        );
    }
    Ok(())
}

pub(super) fn execute(cfg: &Config, opts: &Options) -> Result<()> {
    cfg.check_keys(&[COMMON_KEYS, KEYS])?;
    let theorem: Theorem = cfg.require_str("theorem")?.parse()?;
    let base = RateParams {
        f0: cfg.get_or("f0", 0.0)?,
        r0: cfg.get_or("r0", 0.0)?,
        l0: cfg.get_or("l0", 0.0)?,
        l1: cfg.get_or("l1", 0.0)?,
        l: cfg.get_or("l", 0.0)?,
        mu: cfg.get_or("mu", 0.0)?,
        sigma: cfg.get_or("sigma", 0.0)?,
        c: cfg.get_or("c", f64::INFINITY)?,
        eta: cfg.get_or("eta", 1.0)?,
        iterations: cfg.get_or("iterations", 1)?,
        batch: cfg.get_or("batch", 1)?,
        sigma_dp: cfg.get_or("sigma_dp", 0.0)?,
        l_trajectory: None,
    };
    let epsilon = cfg.get("epsilon")?;
    let mut check = Check {
        lines: String::new(),
        failures: 0,
    };
    match (cfg.contains("trace"), cfg.contains("sweep")) {
        (true, false) => check_trace(cfg, theorem, base, epsilon, &mut check)?,
        (false, true) => check_sweep(cfg, theorem, base, epsilon, &mut check)?,
        (false, false) => {
            let report = evaluate(theorem, &base, epsilon)?;
            check.add(&[], &report, None);
        }
        (true, true) => return Err(CliError::config("give either trace or sweep, not both")),
    }
    let overall = if check.failures > 0 { "fail" } else { "pass" };
    check.lines += &finding(&[("failures", check.failures.to_string()), ("status", overall.to_string())]);
    csv::write(&opts.out, &check.lines)?;
    if check.failures > 0 {
        return Err(CliError::Failed(format!("{} bound comparisons failed", check.failures)));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use gradclip::theory::Regime;

    #[test]
    fn status_gates() {
        let p = RateParams {
            r0: 1.0,
            l: 1.0,
            l0: 1.0,
            c: 1.0,
            eta: 0.5,
            iterations: 9,
            ..Default::default()
        };
        let r = bound_det_convex(&p);
        assert_eq!(status(&r, Some(r.predicted)), "pass");
        assert_eq!(status(&r, Some(r.predicted * 1.0001)), "fail");
        assert_eq!(status(&r, None), "reported");
        let r = bound_det_convex(&RateParams { eta: 0.6, ..p });
        assert_eq!(status(&r, Some(1e9)), "vacuous");
        let r = bound_dp_sgd(&RateParams { eta: 0.01, ..p });
        assert_eq!(status(&r, Some(1e9)), "reported");
        assert_eq!(r.regime, Regime::LargeC);
    }
}
