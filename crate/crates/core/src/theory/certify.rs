use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::clip::check_threshold;
use crate::error::{Error, Result};
use crate::point::Point;
use crate::problems::Problem;

const REL_TOL: f64 = 1e-9;
const ABS_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    /// `‖∇f(x) − ∇f(y)‖ ≤ (L0 + L1‖∇f(x)‖)‖x − y‖`
    GradientLipschitz,
    /// `f(y) ≤ f(x) + ⟨∇f(x), y − x⟩ + (L0 + L1‖∇f(x)‖)/2 · ‖y − x‖²`
    Descent,
    /// `‖∇f(x)‖² ≤ 2(L0 + L1‖∇f(x)‖)(f(x) − f*)`
    GradientDomination,
}

impl ViolationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ViolationKind::GradientLipschitz => "gradient_lipschitz",
            ViolationKind::Descent => "descent",
            ViolationKind::GradientDomination => "gradient_domination",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub x: Point,
    pub y: Point,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmoothnessCertificate {
    pub pairs: usize,
    /// Whether the gradient-domination inequality was checked (needs `f*`).
    pub domination_checked: bool,
    pub violations: Vec<Violation>,
}

impl SmoothnessCertificate {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

fn within(lhs: f64, rhs: f64, scale: f64) -> bool {
    lhs <= rhs + REL_TOL * scale.abs() + ABS_TOL
}

fn gaussian(dim: usize, rng: &mut ChaCha8Rng) -> Point {
    (0..dim)
        .map(|_| rng.sample::<f64, _>(StandardNormal))
        .collect::<Vec<_>>()
        .into()
}

fn center(problem: &dyn Problem) -> Point {
    problem
        .meta()
        .x_star
        .clone()
        .unwrap_or_else(|| Point::zeros(problem.dim()))
}

/// Checks the (L0, L1)-smoothness inequalities on random pairs.
///
/// Points `x` are drawn around the minimizer (or the origin) at distance about
/// `radius`; partners `y` lie in a uniformly random direction at a distance
/// uniform in `(0, min(radius, 1/L1)]`. Every violated inequality is reported
/// with its witness pair.
pub fn certify_smoothness(
    problem: &dyn Problem,
    l0: f64,
    l1: f64,
    pairs: usize,
    radius: f64,
    seed: u64,
) -> Result<SmoothnessCertificate> {
    if !(l0 >= 0.0 && l1 >= 0.0 && l0.is_finite() && l1.is_finite()) {
        return Err(Error::invalid("smoothness constants must be finite and nonnegative"));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::invalid("certification radius must be positive"));
    }
    let dim = problem.dim();
    let center = center(problem);
    let f_star = problem.meta().f_star;
    let max_step = if l1 > 0.0 { radius.min(1.0 / l1) } else { radius };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = Vec::new();

    for _ in 0..pairs {
        let offset = gaussian(dim, &mut rng).scaled(radius / (dim as f64).sqrt());
        let x = center.add(&offset);
        let dir = gaussian(dim, &mut rng);
        let dir = dir.scaled(1.0 / dir.norm().max(f64::MIN_POSITIVE));
        let step = max_step * (1.0 - rng.random::<f64>());
        let y = x.add(&dir.scaled(step));

        let (fx, gx) = (problem.value(&x)?, problem.grad(&x)?);
        let (fy, gy) = (problem.value(&y)?, problem.grad(&y)?);
        let k = l0 + l1 * gx.norm();
        let dist = x.distance(&y);
        let mut report = |kind, lhs: f64, rhs: f64| {
            violations.push(Violation {
                kind,
                x: x.clone(),
                y: y.clone(),
                lhs,
                rhs,
            })
        };

        let lhs = gx.distance(&gy);
        let rhs = k * dist;
        if !within(lhs, rhs, rhs) {
            report(ViolationKind::GradientLipschitz, lhs, rhs);
        }

        let rhs = fx + gx.dot(&y.sub(&x)) + 0.5 * k * dist * dist;
        if !within(fy, rhs, fx.abs() + fy.abs()) {
            report(ViolationKind::Descent, fy, rhs);
        }

        if let Some(f_star) = f_star {
            let lhs = gx.norm_sq();
            let rhs = 2.0 * k * (fx - f_star);
            if !within(lhs, rhs, lhs + fx.abs() * k) {
                report(ViolationKind::GradientDomination, lhs, rhs);
            }
        }
    }
    Ok(SmoothnessCertificate {
        pairs,
        domination_checked: f_star.is_some(),
        violations,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradientCheck {
    pub points: usize,
    /// Largest `|D_h f(x)[v] − ⟨∇f(x), v⟩| / max(1, |⟨∇f(x), v⟩|)` over the points.
    pub max_rel_error: f64,
}

/// Compares the analytic gradient with central finite differences along
/// random unit directions.
pub fn gradient_check(problem: &dyn Problem, points: usize, radius: f64, seed: u64) -> Result<GradientCheck> {
    let dim = problem.dim();
    let center = center(problem);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_rel_error = 0.0f64;
    for _ in 0..points {
        let x = center.add(&gaussian(dim, &mut rng).scaled(radius / (dim as f64).sqrt()));
        let v = gaussian(dim, &mut rng);
        let v = v.scaled(1.0 / v.norm().max(f64::MIN_POSITIVE));
        let h = 1e-5 * (1.0 + x.norm());
        let mut fwd = x.clone();
        fwd.axpy(h, &v);
        let mut bwd = x.clone();
        bwd.axpy(-h, &v);
        let fd = (problem.value(&fwd)? - problem.value(&bwd)?) / (2.0 * h);
        let analytic = problem.grad(&x)?.dot(&v);
        max_rel_error = max_rel_error.max((fd - analytic).abs() / analytic.abs().max(1.0));
    }
    Ok(GradientCheck {
        points,
        max_rel_error,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClipProbabilityReport {
    /// Observed fraction of draws with `‖∇f_ξ(x)‖ > c`.
    pub frequency: f64,
    pub std_err: f64,
    /// `4σ²/c²`
    pub bound: f64,
    /// `frequency ≤ bound + 5·std_err`
    pub holds: bool,
}

/// Estimates `P(‖∇f_ξ(x)‖ > c)` at a point where `‖∇f(x)‖ < c/2` and compares
/// it with the Chebyshev bound `4σ²/c²`.
pub fn clip_probability_bound(
    problem: &dyn Problem,
    x: &Point,
    c: f64,
    n_samples: usize,
    seed: u64,
) -> Result<ClipProbabilityReport> {
    check_threshold(c)?;
    let g = problem.grad(x)?;
    if !(g.norm() < c / 2.0) {
        return Err(Error::Regime(format!(
            "clip-probability bound needs ‖∇f(x)‖ < c/2, got {} with c = {c}",
            g.norm()
        )));
    }
    if n_samples == 0 {
        return Err(Error::invalid("need at least one sample"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut clipped = 0usize;
    for _ in 0..n_samples {
        if problem.sample_grad(x, &mut rng)?.norm() > c {
            clipped += 1;
        }
    }
    let n = n_samples as f64;
    let frequency = clipped as f64 / n;
    let std_err = (frequency * (1.0 - frequency) / n).sqrt();
    let bound = 4.0 * problem.meta().sigma_sq / (c * c);
    Ok(ClipProbabilityReport {
        frequency,
        std_err,
        bound,
        holds: frequency <= bound + 5.0 * std_err,
    })
}
