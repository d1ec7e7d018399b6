//! LIBSVM-format sparse datasets.
//!
//! Lines look like `label idx:val idx:val ...` with 1-based, strictly
//! increasing feature indices. Index `i` maps to dense coordinate `i - 1`.

use std::fmt::Write as _;
use std::io::BufRead;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};

use crate::error::{Error, Result};

/// Iteration cap and relative tolerance of the power iteration in [`estimate_l`].
pub const POWER_ITERS: usize = 5000;
pub const POWER_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct SparseRow {
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseRow {
    /// Builds a row, validating that indices are 1-based and strictly increasing
    /// and that values are finite.
    pub fn new(indices: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        if indices.len() != values.len() {
            return Err(Error::invalid("indices and values differ in length"));
        }
        if indices.first() == Some(&0) {
            return Err(Error::invalid("feature indices are 1-based"));
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("feature indices must be strictly increasing"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("feature values must be finite"));
        }
        Ok(SparseRow { indices, values })
    }

    pub fn empty() -> Self {
        SparseRow {
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn max_index(&self) -> usize {
        self.indices.last().copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.indices.iter().copied().zip(self.values.iter().copied())
    }

    /// `⟨row, x⟩` with `x` dense and 0-based.
    pub fn dot(&self, x: &[f64]) -> f64 {
        self.iter().map(|(i, v)| v * x[i - 1]).sum()
    }

    /// `out += s * row`
    pub fn axpy_into(&self, s: f64, out: &mut [f64]) {
        for (i, v) in self.iter() {
            out[i - 1] += s * v;
        }
    }

    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    rows: Vec<SparseRow>,
    labels: Vec<f64>,
    dim: usize,
}

impl Dataset {
    /// `labels` must be ±1; `dim` defaults to the largest feature index when `None`.
    pub fn new(rows: Vec<SparseRow>, labels: Vec<f64>, dim: Option<usize>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::invalid("dataset has no rows"));
        }
        if rows.len() != labels.len() {
            return Err(Error::invalid("row and label counts differ"));
        }
        if labels.iter().any(|&y| y != 1.0 && y != -1.0) {
            return Err(Error::invalid("labels must be +1 or -1"));
        }
        let max_index = rows.iter().map(SparseRow::max_index).max().unwrap_or(0);
        let dim = dim.unwrap_or(max_index);
        if max_index > dim {
            return Err(Error::invalid(format!(
                "feature index {max_index} exceeds dimension {dim}"
            )));
        }
        Ok(Dataset { rows, labels, dim })
    }

    pub fn rows(&self) -> &[SparseRow] {
        &self.rows
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Serializes back to LIBSVM text. Values use the shortest decimal that
    /// round-trips, so `parse_libsvm(ds.to_libsvm())` reproduces `ds` exactly.
    pub fn to_libsvm(&self) -> String {
        let mut out = String::new();
        for (row, &y) in self.rows.iter().zip(&self.labels) {
            out.push_str(if y > 0.0 { "+1" } else { "-1" });
            for (i, v) in row.iter() {
                let _ = write!(out, " {i}:{v}");
            }
            out.push('\n');
        }
        out
    }

    /// `Aᵀ(A v)` for the row matrix `A`.
    pub(crate) fn gram_apply(&self, v: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for row in &self.rows {
            let m = row.dot(v);
            if m != 0.0 {
                row.axpy_into(m, out);
            }
        }
    }
}

fn parse_label(tok: &str, line: usize) -> Result<f64> {
    match tok {
        "+1" | "1" => Ok(1.0),
        "-1" | "0" => Ok(-1.0),
        other => Err(Error::Parse {
            line,
            msg: format!("unsupported label {other:?} (expected +1, 1, -1 or 0)"),
        }),
    }
}

fn parse_line(body: &str, line: usize) -> Result<(f64, SparseRow)> {
    let mut toks = body.split_whitespace();
    let label = parse_label(toks.next().unwrap_or_default(), line)?;
    let mut indices = Vec::new();
    let mut values = Vec::new();
    for tok in toks {
        let bad = |msg: &str| Error::Parse {
            line,
            msg: format!("{msg}: {tok:?}"),
        };
        let (i, v) = tok.split_once(':').ok_or_else(|| bad("expected idx:val"))?;
        let i: usize = i.parse().map_err(|_| bad("bad feature index"))?;
        let v: f64 = v.parse().map_err(|_| bad("bad feature value"))?;
        if i == 0 {
            return Err(bad("feature indices are 1-based"));
        }
        if !v.is_finite() {
            return Err(bad("non-finite feature value"));
        }
        if indices.last().is_some_and(|&prev| prev >= i) {
            return Err(bad("feature indices not strictly increasing"));
        }
        indices.push(i);
        values.push(v);
    }
    Ok((label, SparseRow { indices, values }))
}

/// Parses LIBSVM text. Blank lines and `#` comments are skipped.
pub fn parse_libsvm<R: BufRead>(reader: R) -> Result<Dataset> {
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line.map_err(|e| Error::Parse {
            line: lineno,
            msg: e.to_string(),
        })?;
        let body = line.split('#').next().unwrap_or_default().trim();
        if body.is_empty() {
            continue;
        }
        let (y, row) = parse_line(body, lineno)?;
        labels.push(y);
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse {
            line: 0,
            msg: "no data rows".into(),
        });
    }
    Dataset::new(rows, labels, None)
}

pub fn parse_libsvm_str(text: &str) -> Result<Dataset> {
    parse_libsvm(text.as_bytes())
}

/// Largest eigenvalue of a symmetric PSD operator by power iteration from the
/// normalized all-ones vector. Stops once the eigen-residual `‖Av − ρv‖` falls
/// below `tol·ρ` and returns the final Rayleigh quotient `ρ`.
pub(crate) fn power_iteration(
    dim: usize,
    max_iters: usize,
    tol: f64,
    mut apply: impl FnMut(&[f64], &mut [f64]),
) -> f64 {
    if dim == 0 {
        return 0.0;
    }
    let mut v = vec![1.0 / (dim as f64).sqrt(); dim];
    let mut w = vec![0.0; dim];
    let mut lambda = 0.0;
    for _ in 0..max_iters {
        apply(&v, &mut w);
        let rayleigh: f64 = v.iter().zip(&w).map(|(a, b)| a * b).sum();
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        let residual = v
            .iter()
            .zip(&w)
            .map(|(a, b)| (b - rayleigh * a).powi(2))
            .sum::<f64>()
            .sqrt();
        lambda = rayleigh;
        if residual <= tol * rayleigh.abs() {
            break;
        }
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / norm;
        }
    }
    lambda
}

/// Smoothness constant of the average logistic loss, `λ_max(AᵀA) / (4n)`.
pub fn estimate_l(ds: &Dataset) -> f64 {
    let lambda = power_iteration(ds.dim(), POWER_ITERS, POWER_TOL, |v, out| {
        ds.gram_apply(v, out)
    });
    lambda / (4.0 * ds.n() as f64)
}

/// `k` rows drawn without replacement, kept in their original order.
pub fn subsample(ds: &Dataset, k: usize, seed: u64) -> Result<Dataset> {
    if k == 0 || k > ds.n() {
        return Err(Error::invalid(format!(
            "subsample size {k} outside 1..={}",
            ds.n()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = index::sample(&mut rng, ds.n(), k).into_vec();
    picked.sort_unstable();
    Ok(Dataset {
        rows: picked.iter().map(|&i| ds.rows[i].clone()).collect(),
        labels: picked.iter().map(|&i| ds.labels[i]).collect(),
        dim: ds.dim,
    })
}

/// Shape of a synthetic binary-feature dataset (sparse 0/1 features with
/// power-law feature popularity, labels from a noisy planted linear model).
#[derive(Debug, Clone, Copy)]
pub struct SyntheticSpec {
    pub n: usize,
    pub dim: usize,
    pub mean_nnz: f64,
    pub positive_rate: f64,
    /// Popularity of feature `j` is proportional to `(j + 1)^-popularity_exponent`.
    pub popularity_exponent: f64,
}

impl SyntheticSpec {
    /// Dimensions and sparsity matching the w1a web-page dataset: 300 binary
    /// features, about 11.5 active per row, about 3% positive labels.
    pub fn w1a_like(n: usize) -> Self {
        SyntheticSpec {
            n,
            dim: 300,
            mean_nnz: 11.5,
            positive_rate: 0.03,
            popularity_exponent: 1.0,
        }
    }
}

pub fn synthetic_binary(spec: SyntheticSpec, seed: u64) -> Result<Dataset> {
    if spec.n == 0 || spec.dim == 0 || !(spec.positive_rate > 0.0 && spec.positive_rate < 1.0) {
        return Err(Error::invalid("synthetic dataset needs n, dim > 0 and rate in (0, 1)"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weights: Vec<f64> = (0..spec.dim)
        .map(|j| ((j + 1) as f64).powf(-spec.popularity_exponent))
        .collect();
    let total: f64 = weights.iter().sum();
    let cdf: Vec<f64> = weights
        .iter()
        .scan(0.0, |acc, w| {
            *acc += w / total;
            Some(*acc)
        })
        .collect();
    let planted: Vec<f64> = (0..spec.dim)
        .map(|_| rng.sample::<f64, _>(StandardNormal))
        .collect();
    let nnz = Poisson::new(spec.mean_nnz).map_err(|e| Error::invalid(e.to_string()))?;

    let mut rows = Vec::with_capacity(spec.n);
    let mut scores = Vec::with_capacity(spec.n);
    for _ in 0..spec.n {
        let k = (nnz.sample(&mut rng) as usize).clamp(1, spec.dim);
        let mut picked = Vec::with_capacity(k);
        while picked.len() < k {
            let u: f64 = rng.random();
            let j = cdf.partition_point(|&c| c < u).min(spec.dim - 1);
            if !picked.contains(&j) {
                picked.push(j);
            }
        }
        picked.sort_unstable();
        let margin: f64 = picked.iter().map(|&j| planted[j]).sum();
        let noise: f64 = {
            let u: f64 = rng.random_range(1e-12..1.0 - 1e-12);
            (u / (1.0 - u)).ln()
        };
        scores.push(margin + noise);
        let values = vec![1.0; picked.len()];
        rows.push(SparseRow {
            indices: picked.into_iter().map(|j| j + 1).collect(),
            values,
        });
    }
    let mut sorted = scores.clone();
    sorted.sort_by(f64::total_cmp);
    let cut_rank = ((1.0 - spec.positive_rate) * spec.n as f64).floor() as usize;
    let cut = sorted[cut_rank.min(spec.n - 1)];
    let labels = scores
        .iter()
        .map(|&s| if s >= cut { 1.0 } else { -1.0 })
        .collect();
    Dataset::new(rows, labels, Some(spec.dim))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_single_row() {
        let ds = parse_libsvm_str("+1 3:1 7:0.5").unwrap();
        assert_eq!(ds.n(), 1);
        assert_eq!(ds.labels(), &[1.0]);
        assert_eq!(ds.rows()[0].indices(), &[3, 7]);
        assert_eq!(ds.rows()[0].values(), &[1.0, 0.5]);
        assert_eq!(ds.dim(), 7);
    }

    #[test]
    fn parses_two_rows() {
        let ds = parse_libsvm_str("-1 1:2\n+1 2:1").unwrap();
        assert_eq!(ds.n(), 2);
        assert_eq!(ds.dim(), 2);
        assert_eq!(ds.labels(), &[-1.0, 1.0]);
    }

    #[test]
    fn label_aliases_and_comments() {
        let ds = parse_libsvm_str("# header\n\n1 1:1\n0 2:1 # trailing\n   \n-1\n").unwrap();
        assert_eq!(ds.labels(), &[1.0, -1.0, -1.0]);
        assert_eq!(ds.rows()[2].nnz(), 0);
    }

    #[test]
    fn rejects_malformed_input() {
        let cases = [
            ("+1 3:1 2:1", 1),
            ("+1 1:1\n+1 2:2 2:3", 2),
            ("2 1:1", 1),
            ("+1 1.0", 1),
            ("+1 a:1", 1),
            ("+1 1:x", 1),
            ("+1 0:1", 1),
            ("+1 1:inf", 1),
            ("+1.0 1:1", 1),
        ];
        for (text, line) in cases {
            match parse_libsvm_str(text) {
                Err(Error::Parse { line: got, .. }) => assert_eq!(got, line, "{text:?}"),
                other => panic!("{text:?} parsed as {other:?}"),
            }
        }
        assert!(parse_libsvm_str("\n# only comments\n").is_err());
    }

    #[test]
    fn estimate_l_examples() {
        let single = parse_libsvm_str("+1 1:2").unwrap();
        assert!((estimate_l(&single) - 1.0).abs() < 1e-12);

        let twins = parse_libsvm_str("+1 1:1\n-1 1:1").unwrap();
        let twins = Dataset::new(twins.rows().to_vec(), twins.labels().to_vec(), Some(2)).unwrap();
        assert!((estimate_l(&twins) - 0.25).abs() < 1e-12);

        let empty = parse_libsvm_str("+1\n-1").unwrap();
        assert_eq!(estimate_l(&empty), 0.0);
        let empty = Dataset::new(empty.rows().to_vec(), empty.labels().to_vec(), Some(3)).unwrap();
        assert_eq!(estimate_l(&empty), 0.0);
    }

    #[test]
    fn subsample_contract() {
        let ds = synthetic_binary(SyntheticSpec::w1a_like(50), 3).unwrap();
        assert_eq!(subsample(&ds, 50, 9).unwrap(), ds);
        let a = subsample(&ds, 1, 11).unwrap();
        let b = subsample(&ds, 1, 11).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_libsvm(), b.to_libsvm());
        assert_eq!(a.n(), 1);
        assert_eq!(a.dim(), ds.dim());
        assert!(subsample(&ds, 0, 1).is_err());
        assert!(subsample(&ds, 51, 1).is_err());
    }

    #[test]
    fn synthetic_shape() {
        let ds = synthetic_binary(SyntheticSpec::w1a_like(500), 1).unwrap();
        assert_eq!(ds.n(), 500);
        assert_eq!(ds.dim(), 300);
        let pos = ds.labels().iter().filter(|&&y| y > 0.0).count();
        assert!((10..=20).contains(&pos), "{pos} positives");
        let nnz: usize = ds.rows().iter().map(SparseRow::nnz).sum();
        let mean = nnz as f64 / 500.0;
        assert!((10.0..13.0).contains(&mean), "mean nnz {mean}");
    }
}
