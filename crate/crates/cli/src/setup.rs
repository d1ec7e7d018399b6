//! Problem and optimizer settings shared by the commands.

use std::fs::File;
use std::io::BufReader;

use gradclip::data::{parse_libsvm, subsample};
use gradclip::theory::build_lower_bound;
use gradclip::{
    BernoulliShiftQuadratic, ChiSquareQuadratic, LogisticOptions, LogisticRegressionProblem,
    Method, Point, Problem, Quadratic, RunConfig,
};

use crate::config::Config;
use crate::error::{CliError, Result};

pub const PROBLEM_KEYS: &[&str] = &[
    "problem",
    "dim",
    "l",
    "curvature",
    "center",
    "a",
    "p",
    "lb_sigma",
    "lb_c",
    "data",
    "subsample",
    "subsample_seed",
    "lambda",
    "intercept",
    "normalize",
];

pub const RUN_KEYS: &[&str] = &[
    "method",
    "c",
    "eta",
    "iterations",
    "batch",
    "sigma_dp",
    "seeds",
    "x0",
    "record_every",
    "target",
    "stop_at_target",
];

/// Problems by name:
///
/// * `quadratic`: `curvature` (list) and optional `center`, or isotropic `dim` and `l`;
/// * `bernoulli_shift`: `a`, `p`;
/// * `lower_bound`: the Bernoulli-shift construction for `lb_sigma`, `lb_c`;
/// * `chi_square`: `dim` (default 100), `l` (default 0.1);
/// * `logistic`: LIBSVM `data`, optional `subsample`, `lambda`, `intercept`, `normalize`.
pub fn build_problem(cfg: &Config) -> Result<Box<dyn Problem>> {
    let name = cfg.require_str("problem")?;
    Ok(match name {
        "quadratic" => {
            let pb = match cfg.list::<f64>("curvature")? {
                Some(h) => {
                    let center = cfg
                        .list::<f64>("center")?
                        .map_or_else(|| Point::zeros(h.len()), Point::new);
                    Quadratic::new(h, center)?
                }
                None => Quadratic::isotropic(cfg.require("dim")?, cfg.require("l")?)?,
            };
            Box::new(pb)
        }
        "bernoulli_shift" => Box::new(BernoulliShiftQuadratic::new(cfg.require("a")?, cfg.require("p")?)?),
        "lower_bound" => {
            let inst = build_lower_bound(cfg.require("lb_sigma")?, cfg.require("lb_c")?)?;
            Box::new(inst.problem())
        }
        "chi_square" => Box::new(ChiSquareQuadratic::new(
            cfg.get_or("dim", ChiSquareQuadratic::DEFAULT_DIM)?,
            cfg.get_or("l", ChiSquareQuadratic::DEFAULT_L)?,
        )?),
        "logistic" => {
            let path = cfg
                .path("data")
                .ok_or_else(|| CliError::config("logistic problem needs a data path"))?;
            let file = File::open(&path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
            let mut ds = parse_libsvm(BufReader::new(file))
                .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
            if let Some(k) = cfg.get::<usize>("subsample")? {
                ds = subsample(&ds, k, cfg.get_or("subsample_seed", 0)?)?;
            }
            let options = LogisticOptions {
                lambda: cfg.get_or("lambda", 0.0)?,
                intercept: cfg.bool_or("intercept", false)?,
                normalize: cfg.bool_or("normalize", false)?,
            };
            Box::new(LogisticRegressionProblem::new(&ds, options)?)
        }
        other => return Err(CliError::config(format!("unknown problem {other:?}"))),
    })
}

/// The optimizer part of a config, possibly a grid over `c`, `eta` and seeds.
#[derive(Debug, Clone)]
pub struct RunSettings {
    pub method: Method,
    pub cs: Vec<f64>,
    pub etas: Vec<f64>,
    pub seeds: Vec<u64>,
    pub template: RunConfig,
}

impl RunSettings {
    pub fn from_config(cfg: &Config, dim: usize, seed_offset: u64) -> Result<Self> {
        let method: Method = cfg.require_str("method")?.parse()?;
        let cs = match cfg.list::<f64>("c")? {
            Some(cs) => cs,
            None if !method.is_clipped() => vec![f64::INFINITY],
            None => return Err(CliError::config(format!("method {method} needs key \"c\""))),
        };
        let etas = cfg
            .list::<f64>("eta")?
            .ok_or_else(|| CliError::config("missing required key \"eta\""))?;
        let seeds = cfg
            .list::<u64>("seeds")?
            .unwrap_or_else(|| vec![0])
            .into_iter()
            .map(|s| s.wrapping_add(seed_offset))
            .collect();
        let x0 = match cfg.list::<f64>("x0")? {
            None => Point::zeros(dim),
            Some(v) if v.len() == 1 => Point::filled(dim, v[0]),
            Some(v) if v.len() == dim => Point::new(v),
            Some(v) => {
                return Err(CliError::config(format!(
                    "x0 has {} entries, problem dimension is {dim}",
                    v.len()
                )))
            }
        };
        let mut template = RunConfig::new(method, cs[0], etas[0], cfg.require("iterations")?, x0)
            .with_batch(cfg.get_or("batch", 1)?)
            .with_sigma_dp(cfg.get_or("sigma_dp", 0.0)?)
            .with_record_every(cfg.get_or("record_every", 1)?);
        if let Some(target) = cfg.get::<f64>("target")? {
            template = template.with_target(target, cfg.bool_or("stop_at_target", false)?);
        } else if cfg.contains("stop_at_target") {
            return Err(CliError::config("stop_at_target needs a target"));
        }
        let settings = RunSettings {
            method,
            cs,
            etas,
            seeds,
            template,
        };
        for cell in settings.cells() {
            cell.validate(dim)?;
        }
        Ok(settings)
    }

    /// Every grid cell in lexicographic `(c, eta, seed)` order.
    pub fn cells(&self) -> Vec<RunConfig> {
        let mut cells = Vec::with_capacity(self.cs.len() * self.etas.len() * self.seeds.len());
        let mut cs = self.cs.clone();
        let mut etas = self.etas.clone();
        let mut seeds = self.seeds.clone();
        cs.sort_by(f64::total_cmp);
        etas.sort_by(f64::total_cmp);
        seeds.sort_unstable();
        for &c in &cs {
            for &eta in &etas {
                for &seed in &seeds {
                    cells.push(RunConfig {
                        c,
                        eta,
                        seed,
                        ..self.template.clone()
                    });
                }
            }
        }
        cells
    }
}
