use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::Regime;
use crate::clip::{check_threshold, coefficient_unchecked};
use crate::error::{Error, Result};
use crate::point::Point;
use crate::problems::{BernoulliShiftQuadratic, Problem};

/// `|h(x*)|` allowed at a reported fixed point.
pub const FIXED_POINT_RESIDUAL_TOL: f64 = 1e-12;

const BISECTION_STEPS: usize = 200;

/// A Bernoulli-shift instance on which clipped SGD provably stalls at
/// gradient norm `bias ≥ guarantee`.
#[derive(Debug, Clone, PartialEq)]
pub struct LowerBoundInstance {
    pub sigma: f64,
    pub c: f64,
    pub regime: Regime,
    pub a: f64,
    pub p: f64,
    /// Root of `E[clip_c(∇f_ξ(x))]`.
    pub x_fixed: f64,
    /// `|∇f(x_fixed)| = |x_fixed + p·a|`.
    pub bias: f64,
    /// `σ/12` or `σ²/(6c)`.
    pub guarantee: f64,
}

impl LowerBoundInstance {
    pub fn problem(&self) -> BernoulliShiftQuadratic {
        BernoulliShiftQuadratic::new(self.a, self.p).expect("constructed parameters are valid")
    }

    /// `h(x_fixed)`, which is zero up to rounding.
    pub fn residual(&self) -> f64 {
        expected_clipped_scalar(self.a, self.p, self.c, self.x_fixed)
    }

    pub fn satisfies_guarantee(&self) -> bool {
        self.bias >= self.guarantee
    }
}

fn check_sigma_c(sigma: f64, c: f64) -> Result<()> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::invalid(format!("noise level must be positive, got {sigma}")));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::invalid(format!("clipping threshold must be positive and finite, got {c}")));
    }
    Ok(())
}

fn instance(sigma: f64, c: f64, regime: Regime, a: f64, p: f64, guarantee: f64) -> LowerBoundInstance {
    let x_fixed = -p * c / (1.0 - p);
    LowerBoundInstance {
        sigma,
        c,
        regime,
        a,
        p,
        x_fixed,
        bias: p * (a - c / (1.0 - p)),
        guarantee,
    }
}

/// `c ≤ 2σ`: shift `a = 4σ` with probability `p = (2 − √3)/4`, so that
/// `p(1 − p)a² = σ²`. The fixed point sits at `−pc/(1 − p)` with bias at
/// least `σ/12`.
pub fn build_lower_bound_small_c(sigma: f64, c: f64) -> Result<LowerBoundInstance> {
    check_sigma_c(sigma, c)?;
    if c > 2.0 * sigma {
        return Err(Error::Regime(format!(
            "small-threshold construction needs c ≤ 2σ, got c = {c}, σ = {sigma}"
        )));
    }
    let p = (2.0 - 3f64.sqrt()) / 4.0;
    Ok(instance(sigma, c, Regime::SmallC, 4.0 * sigma, p, sigma / 12.0))
}

/// `c ≥ 2σ`: shift `a = 2c` with `p = (1 − √(1 − σ²/c²))/2`, so that
/// `p(1 − p)a² = σ²`. The bias is at least `σ²/(6c)`.
pub fn build_lower_bound_large_c(sigma: f64, c: f64) -> Result<LowerBoundInstance> {
    check_sigma_c(sigma, c)?;
    if c < 2.0 * sigma {
        return Err(Error::Regime(format!(
            "large-threshold construction needs c ≥ 2σ, got c = {c}, σ = {sigma}"
        )));
    }
    // Rationalized form of (1 − √(1 − 4q))/2, accurate when σ ≪ c.
    let q = sigma * sigma / (4.0 * c * c);
    let p = 2.0 * q / (1.0 + (1.0 - 4.0 * q).sqrt());
    Ok(instance(sigma, c, Regime::LargeC, 2.0 * c, p, sigma * sigma / (6.0 * c)))
}

/// The construction matching the `(σ, c)` pair; `c = 2σ` uses the small-threshold one.
pub fn build_lower_bound(sigma: f64, c: f64) -> Result<LowerBoundInstance> {
    if c <= 2.0 * sigma {
        build_lower_bound_small_c(sigma, c)
    } else {
        build_lower_bound_large_c(sigma, c)
    }
}

/// `h(x) = (1 − p)·clip_c(x) + p·clip_c(x + a)`, the expected clipped
/// gradient of [`BernoulliShiftQuadratic`].
pub fn expected_clipped_scalar(a: f64, p: f64, c: f64, x: f64) -> f64 {
    (1.0 - p) * x.clamp(-c, c) + p * (x + a).clamp(-c, c)
}

/// Root of [`expected_clipped_scalar`] in `x`.
///
/// The two closed forms (`x + a` clipped while `x` is not, or neither clipped)
/// are tried first; otherwise `h`, which is nondecreasing, is bisected on `[−a, 0]`.
pub fn exact_fixed_point(problem: &BernoulliShiftQuadratic, c: f64) -> Result<f64> {
    check_threshold(c)?;
    let (a, p) = (problem.a(), problem.p());
    if p == 0.0 {
        return Ok(0.0);
    }
    let h = |x: f64| expected_clipped_scalar(a, p, c, x);

    let upper_clipped = -p * c / (1.0 - p);
    if upper_clipped.abs() <= c && upper_clipped + a >= c {
        return Ok(upper_clipped);
    }
    let unclipped = -p * a;
    if unclipped.abs() <= c && (unclipped + a).abs() <= c {
        return Ok(unclipped);
    }

    let (mut lo, mut hi) = (-a, 0.0);
    if h(lo) > 0.0 || h(hi) < 0.0 {
        return Err(Error::NoFixedPoint { lo, hi });
    }
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if h(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(if h(lo).abs() <= h(hi).abs() { lo } else { hi })
}

/// `E[clip_c(∇f_ξ(x))]`, exact for two-outcome problems and a Monte-Carlo
/// mean otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpectedClipped {
    pub mean: Point,
    /// Per-coordinate standard error; `None` when the mean is exact.
    pub std_err: Option<Point>,
}

pub fn expected_clipped_grad(
    problem: &dyn Problem,
    x: &Point,
    c: f64,
    n_samples: usize,
    seed: u64,
) -> Result<ExpectedClipped> {
    check_threshold(c)?;
    x.check_dim(problem.dim())?;
    if let Some(b) = problem.as_bernoulli_shift() {
        let v = expected_clipped_scalar(b.a(), b.p(), c, x.coords()[0]);
        return Ok(ExpectedClipped {
            mean: Point::scalar(v),
            std_err: None,
        });
    }
    if problem.meta().is_deterministic() {
        let g = problem.grad(x)?;
        let s = coefficient_unchecked(g.coords(), c);
        return Ok(ExpectedClipped {
            mean: g.scaled(s),
            std_err: None,
        });
    }
    if n_samples < 2 {
        return Err(Error::invalid("Monte-Carlo estimate needs at least 2 samples"));
    }
    let dim = problem.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sum = vec![0.0; dim];
    let mut sum_sq = vec![0.0; dim];
    for _ in 0..n_samples {
        let g = problem.sample_grad(x, &mut rng)?;
        let s = coefficient_unchecked(g.coords(), c);
        for ((acc, acc_sq), gi) in sum.iter_mut().zip(&mut sum_sq).zip(g.coords()) {
            let v = s * gi;
            *acc += v;
            *acc_sq += v * v;
        }
    }
    let n = n_samples as f64;
    let mean: Vec<f64> = sum.iter().map(|s| s / n).collect();
    let std_err: Vec<f64> = sum_sq
        .iter()
        .zip(&mean)
        .map(|(sq, m)| ((sq / n - m * m).max(0.0) * n / (n - 1.0) / n).sqrt())
        .collect();
    Ok(ExpectedClipped {
        mean: mean.into(),
        std_err: Some(std_err.into()),
    })
}
