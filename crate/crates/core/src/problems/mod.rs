//! Objective oracles `f(x) = E_ξ[f_ξ(x)]` with exact values, exact gradients,
//! one-draw stochastic gradients and their analytic constants.

use std::fmt;

use rand::RngCore;

use crate::error::Result;
use crate::point::Point;

mod bernoulli;
mod chisq;
mod logistic;
mod quadratic;

pub use bernoulli::BernoulliShiftQuadratic;
pub use chisq::ChiSquareQuadratic;
pub use logistic::{LogisticOptions, LogisticRegressionProblem};
pub use quadratic::Quadratic;

/// Analytic constants of a problem.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemMeta {
    pub dim: usize,
    /// (L0, L1)-smoothness: `‖∇f(x) − ∇f(y)‖ ≤ (L0 + L1‖∇f(x)‖)‖x − y‖` whenever `‖x − y‖ ≤ 1/L1`.
    pub l0: f64,
    pub l1: f64,
    /// Classical Lipschitz constant of the gradient.
    pub l: f64,
    /// Strong convexity modulus, 0 when not strongly convex.
    pub mu: f64,
    /// Bound on `E‖∇f_ξ(x) − ∇f(x)‖²`.
    pub sigma_sq: f64,
    pub f_star: Option<f64>,
    pub x_star: Option<Point>,
    /// A known lower bound on `f`; equals `f_star` when that is known.
    pub f_lower: Option<f64>,
}

impl ProblemMeta {
    pub fn sigma(&self) -> f64 {
        self.sigma_sq.sqrt()
    }

    pub fn is_deterministic(&self) -> bool {
        self.sigma_sq == 0.0
    }
}

pub trait Problem: Send + Sync + fmt::Debug {
    fn name(&self) -> &'static str;

    fn meta(&self) -> &ProblemMeta;

    fn dim(&self) -> usize {
        self.meta().dim
    }

    /// Exact expected objective.
    fn value(&self, x: &Point) -> Result<f64>;

    /// Exact expected gradient.
    fn grad(&self, x: &Point) -> Result<Point>;

    /// One unbiased draw of `∇f_ξ(x)`.
    fn sample_grad(&self, x: &Point, rng: &mut dyn RngCore) -> Result<Point>;

    /// `E‖∇f_ξ(x) − ∇f(x)‖²` at `x`.
    fn variance_at(&self, x: &Point) -> Result<f64>;

    /// Two-outcome problems expose themselves here so fixed points can be
    /// computed exactly instead of by sampling.
    fn as_bernoulli_shift(&self) -> Option<&BernoulliShiftQuadratic> {
        None
    }
}
