use rand::{Rng, RngCore};

use super::{Problem, ProblemMeta};
use crate::data::{estimate_l, Dataset, SparseRow};
use crate::error::{Error, Result};
use crate::point::Point;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LogisticOptions {
    /// Ridge weight λ; λ > 0 makes the objective λ-strongly convex.
    pub lambda: f64,
    /// Append a constant-one feature.
    pub intercept: bool,
    /// Scale every row to unit Euclidean norm.
    pub normalize: bool,
}

/// `(1/n) Σ log(1 + exp(−yᵢ⟨aᵢ, x⟩)) + (λ/2)‖x‖²`, one uniformly drawn row per
/// stochastic gradient.
#[derive(Debug, Clone)]
pub struct LogisticRegressionProblem {
    data: Dataset,
    options: LogisticOptions,
    meta: ProblemMeta,
}

/// `log(1 + exp(z))` without overflow.
fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

impl LogisticRegressionProblem {
    pub fn new(dataset: &Dataset, options: LogisticOptions) -> Result<Self> {
        if !(options.lambda >= 0.0 && options.lambda.is_finite()) {
            return Err(Error::invalid("ridge weight must be finite and nonnegative"));
        }
        let data = transform(dataset, options)?;
        if data.dim() == 0 {
            return Err(Error::invalid("dataset has no features"));
        }
        let l = estimate_l(&data) + options.lambda;
        let mut pb = LogisticRegressionProblem {
            meta: ProblemMeta {
                dim: data.dim(),
                l0: l,
                l1: 0.0,
                l,
                mu: options.lambda,
                sigma_sq: 0.0,
                f_star: None,
                x_star: None,
                f_lower: Some(0.0),
            },
            data,
            options,
        };
        pb.meta.sigma_sq = pb.variance_at(&Point::zeros(pb.meta.dim))?;
        Ok(pb)
    }

    pub fn dataset(&self) -> &Dataset {
        &self.data
    }

    pub fn options(&self) -> LogisticOptions {
        self.options
    }

    fn row_grad_scale(&self, i: usize, x: &[f64]) -> f64 {
        let y = self.data.labels()[i];
        let m = y * self.data.rows()[i].dot(x);
        -y * sigmoid(-m)
    }
}

fn transform(ds: &Dataset, options: LogisticOptions) -> Result<Dataset> {
    if !options.intercept && !options.normalize {
        return Ok(ds.clone());
    }
    let dim = ds.dim() + usize::from(options.intercept);
    let rows = ds
        .rows()
        .iter()
        .map(|row| {
            let mut indices = row.indices().to_vec();
            let mut values = row.values().to_vec();
            if options.normalize {
                let norm = row.norm_sq().sqrt();
                if norm > 0.0 {
                    values.iter_mut().for_each(|v| *v /= norm);
                }
            }
            if options.intercept {
                indices.push(dim);
                values.push(1.0);
            }
            SparseRow::new(indices, values)
        })
        .collect::<Result<Vec<_>>>()?;
    Dataset::new(rows, ds.labels().to_vec(), Some(dim))
}

impl Problem for LogisticRegressionProblem {
    fn name(&self) -> &'static str {
        "logistic"
    }

    fn meta(&self) -> &ProblemMeta {
        &self.meta
    }

    fn value(&self, x: &Point) -> Result<f64> {
        x.check_dim(self.meta.dim)?;
        let xs = x.coords();
        let loss: f64 = self
            .data
            .rows()
            .iter()
            .zip(self.data.labels())
            .map(|(row, y)| softplus(-y * row.dot(xs)))
            .sum();
        Ok(loss / self.data.n() as f64 + 0.5 * self.options.lambda * x.norm_sq())
    }

    fn grad(&self, x: &Point) -> Result<Point> {
        x.check_dim(self.meta.dim)?;
        let xs = x.coords();
        let inv_n = 1.0 / self.data.n() as f64;
        let mut g = x.scaled(self.options.lambda).into_inner();
        for (i, row) in self.data.rows().iter().enumerate() {
            row.axpy_into(inv_n * self.row_grad_scale(i, xs), &mut g);
        }
        Ok(g.into())
    }

    fn sample_grad(&self, x: &Point, rng: &mut dyn RngCore) -> Result<Point> {
        x.check_dim(self.meta.dim)?;
        let i = rng.random_range(0..self.data.n());
        let mut g = x.scaled(self.options.lambda).into_inner();
        self.data.rows()[i].axpy_into(self.row_grad_scale(i, x.coords()), &mut g);
        Ok(g.into())
    }

    /// Exhaustive over all rows; the ridge term is common to every draw and cancels.
    fn variance_at(&self, x: &Point) -> Result<f64> {
        x.check_dim(self.meta.dim)?;
        let xs = x.coords();
        let n = self.data.n() as f64;
        let scales: Vec<f64> = (0..self.data.n())
            .map(|i| self.row_grad_scale(i, xs))
            .collect();
        let mut mean = vec![0.0; self.meta.dim];
        for (row, s) in self.data.rows().iter().zip(&scales) {
            row.axpy_into(s / n, &mut mean);
        }
        let mean_sq: f64 = mean.iter().map(|v| v * v).sum();
        let total: f64 = self
            .data
            .rows()
            .iter()
            .zip(&scales)
            .map(|(row, s)| s * s * row.norm_sq() - 2.0 * s * row.dot(&mean) + mean_sq)
            .sum();
        Ok((total / n).max(0.0))
    }
}
