//! The Euclidean clipping operator `clip_c(u) = min(1, c/‖u‖) u` and the
//! clipped gradient step built on it.

use crate::error::{Error, Result};
use crate::point::Point;

/// Clipping threshold and step size of one clipped update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClipParams {
    /// Clipping threshold; `f64::INFINITY` disables clipping.
    pub c: f64,
    /// Step size.
    pub eta: f64,
}

impl ClipParams {
    pub fn new(c: f64, eta: f64) -> Result<Self> {
        check_threshold(c)?;
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::invalid(format!("step size must be positive, got {eta}")));
        }
        Ok(ClipParams { c, eta })
    }
}

pub(crate) fn check_threshold(c: f64) -> Result<()> {
    if c > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("clipping threshold must be positive, got {c}")))
    }
}

/// The factor `min(1, c/‖u‖)`, with the convention that a zero vector has factor 1.
///
/// The factor is nudged down by at most a few ulps when `c/‖u‖` rounds so that
/// the rescaled vector would land just outside the ball; `‖clip(u, c)‖ ≤ c`
/// therefore holds exactly in floating point.
pub fn clip_coefficient(u: &Point, c: f64) -> Result<f64> {
    check_threshold(c)?;
    u.check_finite()?;
    Ok(coefficient_unchecked(u.coords(), c))
}

pub(crate) fn coefficient_unchecked(u: &[f64], c: f64) -> f64 {
    let norm = u.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm <= c {
        return 1.0;
    }
    let mut s = c / norm;
    while scaled_norm(u, s) > c {
        s = f64::from_bits(s.to_bits() - 1);
    }
    s
}

fn scaled_norm(u: &[f64], s: f64) -> f64 {
    u.iter().map(|v| (v * s) * (v * s)).sum::<f64>().sqrt()
}

/// Projects `u` onto the Euclidean ball of radius `c`.
pub fn clip(u: &Point, c: f64) -> Result<Point> {
    let s = clip_coefficient(u, c)?;
    Ok(if s == 1.0 { u.clone() } else { u.scaled(s) })
}

/// `x - eta * clip(g_raw, c)`.
pub fn clipped_step(x: &Point, g_raw: &Point, params: ClipParams) -> Result<Point> {
    g_raw.check_dim(x.dim())?;
    let g = clip(g_raw, params.c)?;
    let mut next = x.clone();
    next.axpy(-params.eta, &g);
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(v: &[f64]) -> Point {
        Point::from(v)
    }

    #[test]
    fn identity_inside_ball() {
        assert_eq!(clip(&p(&[3.0, 4.0]), 10.0).unwrap(), p(&[3.0, 4.0]));
    }

    #[test]
    fn rescales_outside_ball() {
        let out = clip(&p(&[3.0, 4.0]), 2.0).unwrap();
        assert!((out.coords()[0] - 1.2).abs() < 1e-15);
        assert!((out.coords()[1] - 1.6).abs() < 1e-15);
        assert!(out.norm() <= 2.0);
    }

    #[test]
    fn zero_vector_is_fixed() {
        assert_eq!(clip(&p(&[0.0, 0.0]), 1.0).unwrap(), p(&[0.0, 0.0]));
        assert_eq!(clip_coefficient(&p(&[0.0, 0.0]), 1.0).unwrap(), 1.0);
    }

    #[test]
    fn boundary_takes_identity_branch() {
        assert_eq!(clip_coefficient(&p(&[3.0, 4.0]), 5.0).unwrap(), 1.0);
    }

    #[test]
    fn coefficient_values() {
        assert!((clip_coefficient(&p(&[3.0, 4.0]), 2.0).unwrap() - 0.4).abs() < 1e-16);
        assert_eq!(clip_coefficient(&p(&[1.0, 0.0]), 5.0).unwrap(), 1.0);
    }

    #[test]
    fn infinite_threshold_disables_clipping() {
        let u = p(&[1e300, -1e300]);
        assert_eq!(clip(&u, f64::INFINITY).unwrap(), u);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(clip(&p(&[f64::NAN, 1.0]), 1.0).is_err());
        assert!(clip(&p(&[1.0]), 0.0).is_err());
        assert!(clip(&p(&[1.0]), -1.0).is_err());
        assert!(clip(&p(&[1.0]), f64::NAN).is_err());
        assert!(ClipParams::new(1.0, 0.0).is_err());
    }

    #[test]
    fn step_examples() {
        let params = ClipParams::new(2.0, 0.1).unwrap();
        let next = clipped_step(&p(&[3.0, 4.0]), &p(&[3.0, 4.0]), params).unwrap();
        assert!((next.coords()[0] - 2.88).abs() < 1e-15);
        assert!((next.coords()[1] - 3.84).abs() < 1e-15);

        let any = ClipParams::new(0.3, 7.0).unwrap();
        assert_eq!(clipped_step(&p(&[1.0]), &p(&[0.0]), any).unwrap(), p(&[1.0]));

        let unclipped = ClipParams::new(2.0, 1.0).unwrap();
        assert_eq!(clipped_step(&p(&[1.0]), &p(&[0.5]), unclipped).unwrap(), p(&[0.5]));
    }

    #[test]
    fn step_dimension_mismatch() {
        let params = ClipParams::new(1.0, 1.0).unwrap();
        assert!(matches!(
            clipped_step(&p(&[1.0, 2.0]), &p(&[1.0]), params),
            Err(Error::DimensionMismatch { expected: 2, got: 1 })
        ));
    }
}
