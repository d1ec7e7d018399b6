//! Executable theory: step-size rules, convergence-bound predictors with
//! explicit constants, the clipping bias floor, the two-point lower-bound
//! constructions with their exact fixed points, and smoothness certifiers.

use std::fmt;
use std::str::FromStr;

use crate::error::Error;

mod bounds;
mod certify;
mod lower_bound;

pub use bounds::{
    bias_floor, bound_det_convex, bound_det_nonconvex, bound_det_strongly_convex, bound_dp_sgd,
    bound_stoch_nonconvex, dp_noise_calibration, effective_smoothness, max_stepsize,
};
pub use certify::{
    certify_smoothness, clip_probability_bound, gradient_check, ClipProbabilityReport,
    GradientCheck, SmoothnessCertificate, Violation, ViolationKind,
};
pub use lower_bound::{
    build_lower_bound, build_lower_bound_large_c, build_lower_bound_small_c,
    expected_clipped_grad, expected_clipped_scalar, exact_fixed_point, ExpectedClipped,
    LowerBoundInstance, FIXED_POINT_RESIDUAL_TOL,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Theorem {
    DetNonconvex,
    DetConvex,
    DetStronglyConvex,
    StochNonconvex,
    DpSgd,
}

impl Theorem {
    pub const ALL: [Theorem; 5] = [
        Theorem::DetNonconvex,
        Theorem::DetConvex,
        Theorem::DetStronglyConvex,
        Theorem::StochNonconvex,
        Theorem::DpSgd,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Theorem::DetNonconvex => "det_nonconvex",
            Theorem::DetConvex => "det_convex",
            Theorem::DetStronglyConvex => "det_strongly_convex",
            Theorem::StochNonconvex => "stoch_nonconvex",
            Theorem::DpSgd => "dp_sgd",
        }
    }
}

impl fmt::Display for Theorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Theorem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Theorem::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| Error::invalid(format!("unknown theorem {s:?}")))
    }
}

/// Which side of the `c = 4σ` split a stochastic bound is evaluated in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    SmallC,
    LargeC,
    NotApplicable,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::SmallC => "small_c",
            Regime::LargeC => "large_c",
            Regime::NotApplicable => "n_a",
        }
    }
}

/// How far a predictor's constants can be trusted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstantsSource {
    /// The explicit final inequality of a proof; a hard bound.
    PaperExplicit,
    /// Constants assembled from intermediate proof inequalities; a hard bound.
    DerivedAppendix,
    /// Only an O(·) statement exists; unit constants are used.
    OrderOfMagnitude,
}

impl ConstantsSource {
    pub fn as_str(self) -> &'static str {
        match self {
            ConstantsSource::PaperExplicit => "paper_explicit",
            ConstantsSource::DerivedAppendix => "derived_appendix",
            ConstantsSource::OrderOfMagnitude => "order_of_magnitude",
        }
    }

    pub fn is_hard_bound(self) -> bool {
        !matches!(self, ConstantsSource::OrderOfMagnitude)
    }
}

/// The trace statistic a bound applies to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Statistic {
    /// `f(x_T) − f*` for the final iterate.
    FinalGap,
    /// Number of iterations until `‖x_t − x*‖² ≤ ε`.
    Iterations,
    /// `min_t ‖∇f(x_t)‖`.
    MinGradNorm,
    /// `(1/(T+1)) Σ_t ‖∇f(x_t)‖`.
    AvgGradNorm,
}

impl Statistic {
    pub fn as_str(self) -> &'static str {
        match self {
            Statistic::FinalGap => "final_gap",
            Statistic::Iterations => "iterations",
            Statistic::MinGradNorm => "min_grad_norm",
            Statistic::AvgGradNorm => "avg_grad_norm",
        }
    }
}

/// Inputs shared by all predictors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateParams {
    /// `f(x_0) − f*` (an upper bound on it is also admissible).
    pub f0: f64,
    /// `‖x_0 − x*‖`
    pub r0: f64,
    pub l0: f64,
    pub l1: f64,
    pub l: f64,
    pub mu: f64,
    pub sigma: f64,
    pub c: f64,
    pub eta: f64,
    pub iterations: usize,
    pub batch: usize,
    pub sigma_dp: f64,
    /// Trajectory smoothness `max_t (L0 + L1‖∇f(x_t)‖)`, used in place of `l` when set.
    pub l_trajectory: Option<f64>,
}

impl Default for RateParams {
    fn default() -> Self {
        RateParams {
            f0: 0.0,
            r0: 0.0,
            l0: 0.0,
            l1: 0.0,
            l: 0.0,
            mu: 0.0,
            sigma: 0.0,
            c: f64::INFINITY,
            eta: 1.0,
            iterations: 1,
            batch: 1,
            sigma_dp: 0.0,
            l_trajectory: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub theorem: Theorem,
    pub predicted: f64,
    pub stepsize_ok: bool,
    pub regime: Regime,
    pub constants_source: ConstantsSource,
    pub statistic: Statistic,
    pub note: String,
}
