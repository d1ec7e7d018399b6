//! Fixtures shared by the benchmarks.

use gradclip::data::{synthetic_binary, SyntheticSpec};
use gradclip::{LogisticOptions, LogisticRegressionProblem, Point};

/// Dense vector with entries `sin(i)`, deterministic and far from sparse.
pub fn dense_vector(dim: usize) -> Point {
    (0..dim).map(|i| (i as f64).sin()).collect::<Vec<_>>().into()
}

/// Logistic regression on a synthetic sparse binary set shaped like `w1a`.
pub fn w1a_like_logistic(rows: usize) -> LogisticRegressionProblem {
    let ds = synthetic_binary(SyntheticSpec::w1a_like(rows), 0).expect("valid synthetic spec");
    LogisticRegressionProblem::new(&ds, LogisticOptions::default()).expect("nonempty dataset")
}
