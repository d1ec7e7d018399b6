use super::{BoundReport, ConstantsSource, RateParams, Regime, Statistic, Theorem};
use crate::error::{Error, Result};

/// `L0 + c·L1`, with `c = ∞` allowed when `L1 = 0`.
pub fn effective_smoothness(l0: f64, l1: f64, c: f64) -> f64 {
    if l1 == 0.0 {
        l0
    } else {
        l0 + c * l1
    }
}

/// Largest step size each theorem admits.
///
/// The non-convex results need `η ≤ 1/(9(L0 + cL1))`. The convex and strongly
/// convex proofs use `η ≤ 1/(2(L0 + cL1))`, which is what the explicit bounds
/// are valid for.
pub fn max_stepsize(theorem: Theorem, l0: f64, l1: f64, c: f64) -> Result<f64> {
    let k = effective_smoothness(l0, l1, c);
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::invalid(format!(
            "step-size rule needs 0 < L0 + c·L1 < ∞, got {k}"
        )));
    }
    let factor = match theorem {
        Theorem::DetNonconvex | Theorem::StochNonconvex | Theorem::DpSgd => 9.0,
        Theorem::DetConvex | Theorem::DetStronglyConvex => 2.0,
    };
    Ok(1.0 / (factor * k))
}

fn stepsize_ok(theorem: Theorem, p: &RateParams) -> bool {
    max_stepsize(theorem, p.l0, p.l1, p.c).is_ok_and(|max| p.eta <= max)
}

/// `x / c`, treating `c = ∞` as zero contribution.
fn over_c(x: f64, c: f64) -> f64 {
    if c.is_infinite() {
        0.0
    } else {
        x / c
    }
}

/// Last-iterate gap of deterministic clipped GD on a convex function:
/// `2R0²/(η(T+1)) + 4L R0⁴/(η²c²(T+1)²)`.
pub fn bound_det_convex(p: &RateParams) -> BoundReport {
    let l = p.l_trajectory.unwrap_or(p.l);
    let t1 = p.iterations as f64 + 1.0;
    let r0_sq = p.r0 * p.r0;
    let lead = 2.0 * r0_sq / (p.eta * t1);
    let clip_term = over_c(over_c(4.0 * l * r0_sq * r0_sq / (p.eta * p.eta * t1 * t1), p.c), p.c);
    BoundReport {
        theorem: Theorem::DetConvex,
        predicted: lead + clip_term,
        stepsize_ok: stepsize_ok(Theorem::DetConvex, p),
        regime: Regime::NotApplicable,
        constants_source: ConstantsSource::PaperExplicit,
        statistic: Statistic::FinalGap,
        note: format!("leading {lead:e} + clipping {clip_term:e}"),
    }
}

/// Iterations until `‖x_t − x*‖² ≤ ε` for deterministic clipped GD on a
/// μ-strongly convex function, as the smaller of two counts:
///
/// * halving: `max(16/(μη), 6R0√L/(ηc√μ)) · ⌈log₂(R0²/ε)⌉`, each round halving `R²`;
/// * small gradients: after `t0 = 8LR0²/(ηc²)` no step is clipped, then
///   `ln(R0²/ε)/(ημ)` steps of the contraction `R² ← (1 − ημ)R²`.
pub fn bound_det_strongly_convex(p: &RateParams, epsilon: f64) -> Result<BoundReport> {
    if !(p.mu > 0.0) {
        return Err(Error::Regime(format!(
            "strong convexity modulus must be positive, got {}",
            p.mu
        )));
    }
    if !(epsilon > 0.0) {
        return Err(Error::invalid("target accuracy must be positive"));
    }
    let l = p.l_trajectory.unwrap_or(p.l);
    let r0_sq = p.r0 * p.r0;
    let mut report = BoundReport {
        theorem: Theorem::DetStronglyConvex,
        predicted: 0.0,
        stepsize_ok: stepsize_ok(Theorem::DetStronglyConvex, p),
        regime: Regime::NotApplicable,
        constants_source: ConstantsSource::DerivedAppendix,
        statistic: Statistic::Iterations,
        note: "already within accuracy".into(),
    };
    if epsilon >= r0_sq {
        return Ok(report);
    }
    let ratio = r0_sq / epsilon;
    let round = f64::max(
        16.0 / (p.mu * p.eta),
        over_c(6.0 * p.r0 * l.sqrt() / (p.eta * p.mu.sqrt()), p.c),
    );
    let halving = round * ratio.log2().ceil();
    let t0 = over_c(over_c(8.0 * l * r0_sq / p.eta, p.c), p.c);
    let small_gradients = t0 + ratio.ln() / (p.eta * p.mu);
    report.predicted = halving.min(small_gradients);
    report.note = format!(
        "halving {halving:e} (log2 rounds, ceiling); small-gradient {small_gradients:e} (t0 = {t0:e})"
    );
    Ok(report)
}

/// Clipped SGD on an (L0, L1)-smooth non-convex function with variance σ².
///
/// * `c < 4σ`: `min_t ‖∇f(x_t)‖ ≤ max(6σ, 18F0/(ηc(T+1)))`;
/// * `c ≥ 4σ`: with `Q = F0/(η(T+1)) + η(L0 + cL1)σ² + 4σ⁴/c²`, the average
///   gradient norm is at most `√(8Q) + 8Q/c`.
pub fn bound_stoch_nonconvex(p: &RateParams) -> BoundReport {
    stochastic_nonconvex(p, Theorem::StochNonconvex, p.sigma)
}

/// The `σ = 0` case of [`bound_stoch_nonconvex`].
pub fn bound_det_nonconvex(p: &RateParams) -> BoundReport {
    stochastic_nonconvex(p, Theorem::DetNonconvex, 0.0)
}

fn stochastic_nonconvex(p: &RateParams, theorem: Theorem, sigma: f64) -> BoundReport {
    let t1 = p.iterations as f64 + 1.0;
    let ok = stepsize_ok(theorem, p);
    if p.c < 4.0 * sigma {
        let opt = 18.0 * p.f0 / (p.eta * p.c * t1);
        return BoundReport {
            theorem,
            predicted: f64::max(6.0 * sigma, opt),
            stepsize_ok: ok,
            regime: Regime::SmallC,
            constants_source: ConstantsSource::DerivedAppendix,
            statistic: Statistic::MinGradNorm,
            note: format!("floor 6σ = {:e}, optimization {opt:e}", 6.0 * sigma),
        };
    }
    let k = effective_smoothness(p.l0, p.l1, p.c);
    let opt = p.f0 / (p.eta * t1);
    let noise = p.eta * k * sigma * sigma;
    let bias = over_c(over_c(4.0 * sigma.powi(4), p.c), p.c);
    let q = opt + noise + bias;
    BoundReport {
        theorem,
        predicted: (8.0 * q).sqrt() + over_c(8.0 * q, p.c),
        stepsize_ok: ok,
        regime: Regime::LargeC,
        constants_source: ConstantsSource::DerivedAppendix,
        statistic: Statistic::AvgGradNorm,
        note: format!("Q = {q:e} (optimization {opt:e}, noise {noise:e}, bias {bias:e})"),
    }
}

/// `min(σ, σ²/c)`: the gradient-norm level clipped SGD cannot get below in general.
pub fn bias_floor(sigma: f64, c: f64) -> f64 {
    sigma.min(over_c(sigma * sigma, c))
}

/// `k · c·d·√(T ln(1/δ)) / ε`, the Gaussian-mechanism noise scale for `T`
/// steps of DP-SGD. Only the order of the calibration is known, so the
/// constant `k` is the caller's.
pub fn dp_noise_calibration(
    c: f64,
    dim: usize,
    iterations: usize,
    epsilon: f64,
    delta: f64,
    k: f64,
) -> Result<f64> {
    if !(epsilon > 0.0) {
        return Err(Error::invalid("privacy epsilon must be positive"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid(format!("privacy delta must lie in (0, 1), got {delta}")));
    }
    let t = iterations as f64;
    Ok(k * c * dim as f64 * (t * (1.0 / delta).ln()).sqrt() / epsilon)
}

/// Order-of-magnitude DP-SGD rate with unit constants:
///
/// `(Lη/c)σ_DP² + √(Lησ_DP) + min(σ, σ²/c) + √(ηLσ²/B) + √(F0/(ηT)) + F0/(ηTc)`
///
/// with `L = L0 + cL1` unless a trajectory value is supplied. The bias term is
/// on the gradient-norm scale like the rest of the expression.
pub fn bound_dp_sgd(p: &RateParams) -> BoundReport {
    let l = p
        .l_trajectory
        .unwrap_or_else(|| effective_smoothness(p.l0, p.l1, p.c));
    let t = p.iterations.max(1) as f64;
    let privacy = over_c(l * p.eta * p.sigma_dp * p.sigma_dp, p.c) + (l * p.eta * p.sigma_dp).sqrt();
    let bias = bias_floor(p.sigma, p.c);
    let noise = (p.eta * l * p.sigma * p.sigma / p.batch as f64).sqrt();
    let opt = (p.f0 / (p.eta * t)).sqrt() + over_c(p.f0 / (p.eta * t), p.c);
    BoundReport {
        theorem: Theorem::DpSgd,
        predicted: privacy + bias + noise + opt,
        stepsize_ok: stepsize_ok(Theorem::DpSgd, p),
        regime: if p.c < 4.0 * p.sigma {
            Regime::SmallC
        } else {
            Regime::LargeC
        },
        constants_source: ConstantsSource::OrderOfMagnitude,
        statistic: Statistic::AvgGradNorm,
        note: format!(
            "privacy {privacy:e}, bias {bias:e} (norm scale), noise {noise:e}, optimization {opt:e}"
        ),
    }
}
