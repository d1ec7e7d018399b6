use rand::RngCore;

use super::{Problem, ProblemMeta};
use crate::error::{Error, Result};
use crate::point::Point;

/// Deterministic separable quadratic `½ Σ hᵢ (xᵢ − mᵢ)²`.
#[derive(Debug, Clone)]
pub struct Quadratic {
    curvature: Vec<f64>,
    center: Point,
    meta: ProblemMeta,
}

impl Quadratic {
    pub fn new(curvature: Vec<f64>, center: Point) -> Result<Self> {
        if curvature.is_empty() {
            return Err(Error::invalid("quadratic needs at least one coordinate"));
        }
        center.check_dim(curvature.len())?;
        center.check_finite()?;
        if curvature.iter().any(|h| !(h.is_finite() && *h >= 0.0)) {
            return Err(Error::invalid("curvatures must be finite and nonnegative"));
        }
        let l = curvature.iter().copied().fold(0.0, f64::max);
        let mu = curvature.iter().copied().fold(f64::INFINITY, f64::min);
        let meta = ProblemMeta {
            dim: curvature.len(),
            l0: l,
            l1: 0.0,
            l,
            mu,
            sigma_sq: 0.0,
            f_star: Some(0.0),
            x_star: Some(center.clone()),
            f_lower: Some(0.0),
        };
        Ok(Quadratic {
            curvature,
            center,
            meta,
        })
    }

    /// `(l/2)‖x‖²`
    pub fn isotropic(dim: usize, l: f64) -> Result<Self> {
        Quadratic::new(vec![l; dim], Point::zeros(dim))
    }

    pub fn curvature(&self) -> &[f64] {
        &self.curvature
    }
}

impl Problem for Quadratic {
    fn name(&self) -> &'static str {
        "quadratic"
    }

    fn meta(&self) -> &ProblemMeta {
        &self.meta
    }

    fn value(&self, x: &Point) -> Result<f64> {
        x.check_dim(self.meta.dim)?;
        Ok(0.5
            * x.coords()
                .iter()
                .zip(self.center.coords())
                .zip(&self.curvature)
                .map(|((xi, mi), h)| h * (xi - mi) * (xi - mi))
                .sum::<f64>())
    }

    fn grad(&self, x: &Point) -> Result<Point> {
        x.check_dim(self.meta.dim)?;
        Ok(x.coords()
            .iter()
            .zip(self.center.coords())
            .zip(&self.curvature)
            .map(|((xi, mi), h)| h * (xi - mi))
            .collect::<Vec<_>>()
            .into())
    }

    fn sample_grad(&self, x: &Point, _rng: &mut dyn RngCore) -> Result<Point> {
        self.grad(x)
    }

    fn variance_at(&self, x: &Point) -> Result<f64> {
        x.check_dim(self.meta.dim)?;
        Ok(0.0)
    }
}
