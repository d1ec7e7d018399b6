use rand::{Rng, RngCore};

use super::{Problem, ProblemMeta};
use crate::error::{Error, Result};
use crate::point::Point;

/// One-dimensional stochastic quadratic with `f_ξ(x) = ½(x + a)²` with
/// probability `p` and `½x²` otherwise, i.e. `∇f_ξ(x) = x + a·Bernoulli(p)`.
///
/// The noise has variance exactly `p(1 − p)a²` everywhere, and the clipped-SGD
/// fixed point can be written down in closed form, which is what makes this the
/// worst-case instance for the clipping bias.
#[derive(Debug, Clone)]
pub struct BernoulliShiftQuadratic {
    a: f64,
    p: f64,
    meta: ProblemMeta,
}

impl BernoulliShiftQuadratic {
    /// `a > 0`, `p ∈ [0, 1/2)`. `p = 0` is the deterministic degenerate case.
    pub fn new(a: f64, p: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::invalid(format!("shift must be positive, got {a}")));
        }
        if !(0.0..0.5).contains(&p) {
            return Err(Error::invalid(format!("probability must lie in [0, 1/2), got {p}")));
        }
        let sigma_sq = p * (1.0 - p) * a * a;
        let meta = ProblemMeta {
            dim: 1,
            l0: 1.0,
            l1: 0.0,
            l: 1.0,
            mu: 1.0,
            sigma_sq,
            f_star: Some(0.5 * sigma_sq),
            x_star: Some(Point::scalar(-p * a)),
            f_lower: Some(0.5 * sigma_sq),
        };
        Ok(BernoulliShiftQuadratic { a, p, meta })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    fn scalar(x: &Point) -> Result<f64> {
        x.check_dim(1)?;
        Ok(x.coords()[0])
    }
}

impl Problem for BernoulliShiftQuadratic {
    fn name(&self) -> &'static str {
        "bernoulli_shift"
    }

    fn meta(&self) -> &ProblemMeta {
        &self.meta
    }

    fn value(&self, x: &Point) -> Result<f64> {
        let x = Self::scalar(x)?;
        let shifted = x + self.a;
        Ok(0.5 * (self.p * shifted * shifted + (1.0 - self.p) * x * x))
    }

    fn grad(&self, x: &Point) -> Result<Point> {
        let x = Self::scalar(x)?;
        Ok(Point::scalar(x + self.p * self.a))
    }

    fn sample_grad(&self, x: &Point, rng: &mut dyn RngCore) -> Result<Point> {
        let x = Self::scalar(x)?;
        let hit = rng.random::<f64>() < self.p;
        Ok(Point::scalar(if hit { x + self.a } else { x }))
    }

    fn variance_at(&self, x: &Point) -> Result<f64> {
        Self::scalar(x)?;
        Ok(self.meta.sigma_sq)
    }

    fn as_bernoulli_shift(&self) -> Option<&BernoulliShiftQuadratic> {
        Some(self)
    }
}
