//! Gradient clipping for (stochastic) gradient descent.
//!
//! The crate bundles four pieces that are meant to be used together:
//!
//! * [`clip`]: the clipping operator and the single clipped step,
//! * [`problems`]: objective oracles with analytic metadata,
//! * [`optimizers`]: GD, clipped GD, (clipped) SGD and DP-SGD with per-iteration traces,
//! * [`theory`]: step-size rules, convergence-bound predictors, the clipping bias
//!   floor and the two-point constructions whose clipped-SGD fixed points are
//!   available in closed form.
//!
//! [`data`] parses LIBSVM files into sparse datasets for the logistic-regression problem.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod clip;
pub mod data;
pub mod error;
pub mod optimizers;
pub mod point;
pub mod problems;
pub mod rng;
pub mod theory;

pub use clip::{clip, clip_coefficient, clipped_step, ClipParams};
pub use data::{Dataset, SparseRow};
pub use error::{Error, Result};
pub use optimizers::{run, Method, RunConfig, Trace, TraceRecord};
pub use point::Point;
pub use problems::{
    BernoulliShiftQuadratic, ChiSquareQuadratic, LogisticOptions, LogisticRegressionProblem,
    Problem, ProblemMeta, Quadratic,
};
pub use theory::{BoundReport, LowerBoundInstance, RateParams, Theorem};
