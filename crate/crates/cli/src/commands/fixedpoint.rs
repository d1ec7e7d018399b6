use gradclip::theory::{
    build_lower_bound, build_lower_bound_large_c, build_lower_bound_small_c, LowerBoundInstance,
    FIXED_POINT_RESIDUAL_TOL,
};

use super::COMMON_KEYS;
use crate::config::Config;
use crate::csv::{self, num, Table};
use crate::error::{CliError, Result};
use crate::Options;

const KEYS: &[&str] = &["sigma", "c", "regime"];

pub const FIXEDPOINT_HEADER: &[&str] = &[
    "sigma", "c", "regime", "a", "p", "x_fixed", "bias", "guarantee", "residual", "status",
];

fn build(regime: &str, sigma: f64, c: f64) -> Result<Option<LowerBoundInstance>> {
    if !(sigma > 0.0 && c > 0.0 && sigma.is_finite() && c.is_finite()) {
        return Ok(None);
    }
    let built = match regime {
        "auto" => build_lower_bound(sigma, c),
        "small_c" => build_lower_bound_small_c(sigma, c),
        "large_c" => build_lower_bound_large_c(sigma, c),
        other => return Err(CliError::config(format!("unknown regime {other:?}"))),
    };
    match built {
        Ok(inst) => Ok(Some(inst)),
        Err(gradclip::Error::Regime(_)) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

/// One row per `(σ, c)`: the lower-bound instance, its exact residual and
/// whether `bias ≥ guarantee` holds. Cells without a construction are `skipped`.
pub(super) fn execute(cfg: &Config, opts: &Options) -> Result<()> {
    cfg.check_keys(&[COMMON_KEYS, KEYS])?;
    let sigmas: Vec<f64> = cfg
        .list("sigma")?
        .ok_or_else(|| CliError::config("missing required key \"sigma\""))?;
    let cs: Vec<f64> = cfg
        .list("c")?
        .ok_or_else(|| CliError::config("missing required key \"c\""))?;
    let regime = cfg.str("regime").unwrap_or("auto");

    let mut table = Table::new(FIXEDPOINT_HEADER);
    let mut failures = 0;
    for &sigma in &sigmas {
        for &c in &cs {
            let Some(inst) = build(regime, sigma, c)? else {
                let mut row = vec![num(sigma), num(c), regime.to_string()];
                row.extend(std::iter::repeat_n(String::new(), 6));
                row.push("skipped".into());
                table.row(&row);
                continue;
            };
            let residual = inst.residual();
            let ok = residual.abs() <= FIXED_POINT_RESIDUAL_TOL && inst.satisfies_guarantee();
            failures += usize::from(!ok);
            table.row(&[
                num(sigma),
                num(c),
                inst.regime.as_str().to_string(),
                num(inst.a),
                num(inst.p),
                num(inst.x_fixed),
                num(inst.bias),
                num(inst.guarantee),
                num(residual),
                if ok { "pass" } else { "fail" }.to_string(),
            ]);
        }
    }
    csv::write(&opts.out, &table.into_string())?;
    if failures > 0 {
        return Err(CliError::Failed(format!("{failures} fixed-point cells failed")));
    }
    Ok(())
}
