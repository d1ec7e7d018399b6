//! GD, clipped GD, SGD, clipped SGD and DP-SGD with per-iteration tracing.
//!
//! All methods share one recurrence,
//!
//! ```text
//! x_{t+1} = x_t − η ( (1/B) Σᵢ clip_c(gᵢ(x_t)) + z_t )
//! ```
//!
//! where `gᵢ` is the exact gradient for the deterministic methods and an
//! independent stochastic draw otherwise, and `z_t ~ N(0, σ_DP²/d · I)` only
//! for DP-SGD. Draw `i` of step `t` comes from [`StreamRng::at`]`(t, i)`, so a
//! run is a pure function of `(problem, config)`.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::clip::{check_threshold, coefficient_unchecked};
use crate::error::{Error, Result};
use crate::point::Point;
use crate::problems::Problem;
use crate::rng::{StreamRng, NOISE_INDEX};

/// Iterates or objective values beyond this magnitude abort the run.
pub const DIVERGENCE_LIMIT: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Gd,
    ClippedGd,
    Sgd,
    ClippedSgd,
    DpSgd,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Gd,
        Method::ClippedGd,
        Method::Sgd,
        Method::ClippedSgd,
        Method::DpSgd,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Gd => "gd",
            Method::ClippedGd => "clipped_gd",
            Method::Sgd => "sgd",
            Method::ClippedSgd => "clipped_sgd",
            Method::DpSgd => "dp_sgd",
        }
    }

    pub fn is_clipped(self) -> bool {
        matches!(self, Method::ClippedGd | Method::ClippedSgd | Method::DpSgd)
    }

    pub fn is_stochastic(self) -> bool {
        matches!(self, Method::Sgd | Method::ClippedSgd | Method::DpSgd)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::invalid(format!("unknown method {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub method: Method,
    /// Clipping threshold; `f64::INFINITY` for the unclipped methods.
    pub c: f64,
    pub eta: f64,
    /// Iteration budget; the trace holds `iterations + 1` states.
    pub iterations: usize,
    pub batch: usize,
    pub sigma_dp: f64,
    pub seed: u64,
    pub x0: Point,
    /// Keep every `record_every`-th record (plus the last one).
    pub record_every: usize,
    /// Gradient-norm target; the first `t` with `‖∇f(x_t)‖ ≤ target` is reported.
    pub target: Option<f64>,
    /// End the run as soon as the target is reached.
    pub stop_at_target: bool,
}

impl RunConfig {
    pub fn new(method: Method, c: f64, eta: f64, iterations: usize, x0: Point) -> Self {
        RunConfig {
            method,
            c,
            eta,
            iterations,
            batch: 1,
            sigma_dp: 0.0,
            seed: 0,
            x0,
            record_every: 1,
            target: None,
            stop_at_target: false,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_batch(mut self, batch: usize) -> Self {
        self.batch = batch;
        self
    }

    pub fn with_sigma_dp(mut self, sigma_dp: f64) -> Self {
        self.sigma_dp = sigma_dp;
        self
    }

    pub fn with_target(mut self, target: f64, stop: bool) -> Self {
        self.target = Some(target);
        self.stop_at_target = stop;
        self
    }

    pub fn with_record_every(mut self, stride: usize) -> Self {
        self.record_every = stride;
        self
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        self.x0.check_dim(dim)?;
        self.x0.check_finite()?;
        check_threshold(self.c)?;
        if self.method.is_clipped() != self.c.is_finite() {
            return Err(Error::invalid(format!(
                "method {} requires {} clipping threshold, got {}",
                self.method,
                if self.method.is_clipped() { "a finite" } else { "an infinite" },
                self.c
            )));
        }
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(Error::invalid(format!("step size must be positive, got {}", self.eta)));
        }
        if self.batch == 0 {
            return Err(Error::invalid("batch size must be at least 1"));
        }
        if !self.method.is_stochastic() && self.batch != 1 {
            return Err(Error::invalid("deterministic methods use batch size 1"));
        }
        if !(self.sigma_dp >= 0.0 && self.sigma_dp.is_finite()) {
            return Err(Error::invalid("privacy noise scale must be finite and nonnegative"));
        }
        if self.sigma_dp > 0.0 && self.method != Method::DpSgd {
            return Err(Error::invalid("privacy noise is only used by dp_sgd"));
        }
        if self.record_every == 0 {
            return Err(Error::invalid("record stride must be at least 1"));
        }
        if let Some(target) = self.target {
            if !(target >= 0.0) {
                return Err(Error::invalid("target gradient norm must be nonnegative"));
            }
        }
        Ok(())
    }
}

/// State of iterate `x_t` and the step taken from it. The final record has no
/// step, so its step fields are zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub t: usize,
    pub f_val: f64,
    /// `‖∇f(x_t)‖` from the exact oracle, also for stochastic runs.
    pub grad_norm: f64,
    /// Norm of the direction actually applied (clipped average plus noise).
    pub applied_norm: f64,
    /// Fraction of the per-sample gradients that were rescaled.
    pub clipped_fraction: f64,
    /// Largest per-sample clipped norm, before averaging.
    pub max_sample_norm: f64,
    /// `‖z_t‖²` of the privacy noise.
    pub noise_norm_sq: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub config: RunConfig,
    pub records: Vec<TraceRecord>,
    /// Minimum of `‖∇f(x_t)‖` over every visited iterate, recorded or not.
    pub min_grad_norm: f64,
    /// Mean of `‖∇f(x_t)‖` over every visited iterate.
    pub mean_grad_norm: f64,
    pub target_hit: Option<usize>,
    pub final_point: Point,
}

impl Trace {
    pub fn last(&self) -> &TraceRecord {
        self.records.last().expect("a trace always holds x_0")
    }

    /// Mean gradient norm over records with `t ≥ from`.
    pub fn mean_grad_norm_from(&self, from: usize) -> f64 {
        let tail: Vec<f64> = self
            .records
            .iter()
            .filter(|r| r.t >= from)
            .map(|r| r.grad_norm)
            .collect();
        tail.iter().sum::<f64>() / tail.len().max(1) as f64
    }

    /// `max_t (L0 + L1‖∇f(x_t)‖)` over the recorded iterates.
    pub fn trajectory_smoothness(&self, l0: f64, l1: f64) -> f64 {
        self.records
            .iter()
            .map(|r| l0 + l1 * r.grad_norm)
            .fold(l0, f64::max)
    }
}

struct Step {
    direction: Point,
    clipped_fraction: f64,
    max_sample_norm: f64,
    noise_norm_sq: f64,
}

fn deterministic_step(grad: &Point, c: f64) -> Step {
    let s = coefficient_unchecked(grad.coords(), c);
    let direction = grad.scaled(s);
    Step {
        max_sample_norm: direction.norm(),
        direction,
        clipped_fraction: if s < 1.0 { 1.0 } else { 0.0 },
        noise_norm_sq: 0.0,
    }
}

fn stochastic_step(
    problem: &dyn Problem,
    cfg: &RunConfig,
    streams: &StreamRng,
    x: &Point,
    t: usize,
) -> Result<Step> {
    let mut direction = Point::zeros(x.dim());
    let mut clipped = 0usize;
    let mut max_sample_norm = 0.0f64;
    let inv_b = 1.0 / cfg.batch as f64;
    for i in 0..cfg.batch {
        let mut rng = streams.at(t as u64, i as u64);
        let g = problem.sample_grad(x, &mut rng)?;
        let s = coefficient_unchecked(g.coords(), cfg.c);
        if s < 1.0 {
            clipped += 1;
        }
        let g = if s < 1.0 { g.scaled(s) } else { g };
        max_sample_norm = max_sample_norm.max(g.norm());
        direction.axpy(inv_b, &g);
    }
    let mut noise_norm_sq = 0.0;
    if cfg.method == Method::DpSgd && cfg.sigma_dp > 0.0 {
        let z = dp_noise(x.dim(), cfg.sigma_dp, streams, t as u64);
        noise_norm_sq = z.norm_sq();
        direction.axpy(1.0, &z);
    }
    Ok(Step {
        direction,
        clipped_fraction: clipped as f64 * inv_b,
        max_sample_norm,
        noise_norm_sq,
    })
}

/// The DP-SGD noise vector of step `t`: `N(0, σ_DP²/d · I)` in dimension `d`,
/// so that `E‖z‖² = σ_DP²`.
pub fn dp_noise(dim: usize, sigma_dp: f64, streams: &StreamRng, t: u64) -> Point {
    let mut rng = streams.at(t, NOISE_INDEX);
    let scale = sigma_dp / (dim as f64).sqrt();
    (0..dim)
        .map(|_| scale * rng.sample::<f64, _>(StandardNormal))
        .collect::<Vec<_>>()
        .into()
}

fn diverged(x: &Point, f: f64, grad_norm: f64) -> bool {
    !x.is_finite()
        || !f.is_finite()
        || !grad_norm.is_finite()
        || x.norm() > DIVERGENCE_LIMIT
        || f.abs() > DIVERGENCE_LIMIT
}

fn run_inner(problem: &dyn Problem, cfg: &RunConfig) -> Result<Trace> {
    cfg.validate(problem.dim())?;
    let streams = StreamRng::new(cfg.seed);
    let mut x = cfg.x0.clone();
    let mut trace = Trace {
        config: cfg.clone(),
        records: Vec::with_capacity(cfg.iterations / cfg.record_every + 2),
        min_grad_norm: f64::INFINITY,
        mean_grad_norm: 0.0,
        target_hit: None,
        final_point: x.clone(),
    };
    let mut grad_norm_sum = 0.0;
    let mut visited = 0usize;
    for t in 0..=cfg.iterations {
        let f_val = problem.value(&x)?;
        let grad = problem.grad(&x)?;
        let grad_norm = grad.norm();
        if diverged(&x, f_val, grad_norm) {
            trace.mean_grad_norm = grad_norm_sum / visited.max(1) as f64;
            trace.final_point = x;
            return Err(Error::Divergence {
                t,
                trace: Box::new(trace),
            });
        }
        visited += 1;
        grad_norm_sum += grad_norm;
        trace.min_grad_norm = trace.min_grad_norm.min(grad_norm);
        if trace.target_hit.is_none() && cfg.target.is_some_and(|eps| grad_norm <= eps) {
            trace.target_hit = Some(t);
        }

        let last = t == cfg.iterations || (cfg.stop_at_target && trace.target_hit.is_some());
        let mut record = TraceRecord {
            t,
            f_val,
            grad_norm,
            applied_norm: 0.0,
            clipped_fraction: 0.0,
            max_sample_norm: 0.0,
            noise_norm_sq: 0.0,
        };
        if !last {
            let step = if cfg.method.is_stochastic() {
                stochastic_step(problem, cfg, &streams, &x, t)?
            } else {
                deterministic_step(&grad, cfg.c)
            };
            record.applied_norm = step.direction.norm();
            record.clipped_fraction = step.clipped_fraction;
            record.max_sample_norm = step.max_sample_norm;
            record.noise_norm_sq = step.noise_norm_sq;
            x.axpy(-cfg.eta, &step.direction);
        }
        if last || t % cfg.record_every == 0 {
            trace.records.push(record);
        }
        if last {
            break;
        }
    }
    trace.mean_grad_norm = grad_norm_sum / visited as f64;
    trace.final_point = x;
    Ok(trace)
}

fn require(cfg: &RunConfig, allowed: &[Method]) -> Result<()> {
    if allowed.contains(&cfg.method) {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "method {} is not handled by this runner",
            cfg.method
        )))
    }
}

/// Full-gradient descent, clipped or not.
pub fn run_gd(problem: &dyn Problem, cfg: &RunConfig) -> Result<Trace> {
    require(cfg, &[Method::Gd, Method::ClippedGd])?;
    run_inner(problem, cfg)
}

/// Minibatch SGD with per-sample clipping before averaging.
pub fn run_clipped_sgd(problem: &dyn Problem, cfg: &RunConfig) -> Result<Trace> {
    require(cfg, &[Method::Sgd, Method::ClippedSgd])?;
    run_inner(problem, cfg)
}

pub fn run_dp_sgd(problem: &dyn Problem, cfg: &RunConfig) -> Result<Trace> {
    require(cfg, &[Method::DpSgd])?;
    run_inner(problem, cfg)
}

/// Dispatches on `cfg.method`.
pub fn run(problem: &dyn Problem, cfg: &RunConfig) -> Result<Trace> {
    match cfg.method {
        Method::Gd | Method::ClippedGd => run_gd(problem, cfg),
        Method::Sgd | Method::ClippedSgd => run_clipped_sgd(problem, cfg),
        Method::DpSgd => run_dp_sgd(problem, cfg),
    }
}
