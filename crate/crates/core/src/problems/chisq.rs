use rand::{Rng, RngCore};
use rand_distr::StandardNormal;

use super::{Problem, ProblemMeta};
use crate::error::{Error, Result};
use crate::point::Point;

/// `f(x, ξ) = (L/2)‖x‖² + ⟨x, ξ⟩` with ξ coordinate-wise χ²(1).
///
/// The noise is heavy-tailed on the right, so clipping shrinks the expected
/// gradient in the positive direction.
#[derive(Debug, Clone)]
pub struct ChiSquareQuadratic {
    l: f64,
    meta: ProblemMeta,
}

impl ChiSquareQuadratic {
    pub const DEFAULT_DIM: usize = 100;
    pub const DEFAULT_L: f64 = 0.1;

    pub fn new(dim: usize, l: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dimension must be positive"));
        }
        if !(l > 0.0 && l.is_finite()) {
            return Err(Error::invalid(format!("curvature must be positive, got {l}")));
        }
        let d = dim as f64;
        let meta = ProblemMeta {
            dim,
            l0: l,
            l1: 0.0,
            l,
            mu: l,
            sigma_sq: 2.0 * d,
            f_star: Some(-d / (2.0 * l)),
            x_star: Some(Point::filled(dim, -1.0 / l)),
            f_lower: Some(-d / (2.0 * l)),
        };
        Ok(ChiSquareQuadratic { l, meta })
    }

    pub fn curvature(&self) -> f64 {
        self.l
    }
}

impl Default for ChiSquareQuadratic {
    fn default() -> Self {
        ChiSquareQuadratic::new(Self::DEFAULT_DIM, Self::DEFAULT_L).expect("valid defaults")
    }
}

impl Problem for ChiSquareQuadratic {
    fn name(&self) -> &'static str {
        "chi_square"
    }

    fn meta(&self) -> &ProblemMeta {
        &self.meta
    }

    fn value(&self, x: &Point) -> Result<f64> {
        x.check_dim(self.meta.dim)?;
        Ok(0.5 * self.l * x.norm_sq() + x.coords().iter().sum::<f64>())
    }

    fn grad(&self, x: &Point) -> Result<Point> {
        x.check_dim(self.meta.dim)?;
        Ok(x.coords()
            .iter()
            .map(|xi| self.l * xi + 1.0)
            .collect::<Vec<_>>()
            .into())
    }

    fn sample_grad(&self, x: &Point, rng: &mut dyn RngCore) -> Result<Point> {
        x.check_dim(self.meta.dim)?;
        Ok(x.coords()
            .iter()
            .map(|xi| {
                let z: f64 = rng.sample(StandardNormal);
                self.l * xi + z * z
            })
            .collect::<Vec<_>>()
            .into())
    }

    fn variance_at(&self, x: &Point) -> Result<f64> {
        x.check_dim(self.meta.dim)?;
        Ok(self.meta.sigma_sq)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn value_and_grad() {
        let pb = ChiSquareQuadratic::new(2, 0.1).unwrap();
        assert_eq!(pb.value(&Point::zeros(2)).unwrap(), 0.0);
        let pb = ChiSquareQuadratic::new(3, 0.1).unwrap();
        let x_star = pb.meta().x_star.clone().unwrap();
        assert_eq!(x_star, Point::filled(3, -10.0));
        for g in pb.grad(&x_star).unwrap().coords() {
            assert!(g.abs() < 1e-15);
        }
        assert!((pb.value(&x_star).unwrap() - pb.meta().f_star.unwrap()).abs() < 1e-12);
    }

    #[test]
    fn default_variance() {
        let pb = ChiSquareQuadratic::default();
        assert_eq!(pb.variance_at(&Point::zeros(100)).unwrap(), 200.0);
    }
}
