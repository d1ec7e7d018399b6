use gradclip::data::{estimate_l, parse_libsvm_str, synthetic_binary, Dataset, SyntheticSpec};
use gradclip::{SparseRow};
use nalgebra::{DMatrix, SymmetricEigen};
use proptest::prelude::*;

fn dataset() -> impl Strategy<Value = Dataset> {
    let row = prop::collection::btree_map(1usize..40, -1e6..1e6f64, 0..8);
    prop::collection::vec((row, any::<bool>()), 1..20).prop_map(|rows| {
        let (rows, labels): (Vec<_>, Vec<_>) = rows
            .into_iter()
            .map(|(m, pos)| {
                let (i, v): (Vec<usize>, Vec<f64>) = m.into_iter().unzip();
                (SparseRow::new(i, v).unwrap(), if pos { 1.0 } else { -1.0 })
            })
            .unzip();
        Dataset::new(rows, labels, None).unwrap()
    })
}

proptest! {
    #[test]
    fn libsvm_round_trip(ds in dataset()) {
        let text = ds.to_libsvm();
        let back = parse_libsvm_str(&text).unwrap();
        prop_assert_eq!(back.rows(), ds.rows());
        prop_assert_eq!(back.labels(), ds.labels());
    }
}

fn dense(ds: &Dataset) -> DMatrix<f64> {
    let mut a = DMatrix::zeros(ds.n(), ds.dim());
    for (r, row) in ds.rows().iter().enumerate() {
        for (i, v) in row.iter() {
            a[(r, i - 1)] = v;
        }
    }
    a
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// The logistic Hessian `(1/n) Aᵀ diag(s(1 − s)) A` never exceeds the estimate.
    #[test]
    fn estimate_bounds_hessian_spectrum(
        entries in prop::collection::vec(prop::collection::vec(-2.0..2.0f64, 4), 3..8),
        x in prop::collection::vec(-3.0..3.0f64, 4),
    ) {
        let text: String = entries
            .iter()
            .enumerate()
            .map(|(r, row)| {
                let feats: Vec<String> = row.iter().enumerate().map(|(i, v)| format!("{}:{v}", i + 1)).collect();
                format!("{} {}\n", if r % 2 == 0 { "+1" } else { "-1" }, feats.join(" "))
            })
            .collect();
        let ds = parse_libsvm_str(&text).unwrap();
        let a = dense(&ds);
        let n = ds.n() as f64;
        let gram = a.transpose() * &a / n;
        let top = SymmetricEigen::new(gram.clone()).eigenvalues.max();
        let l = estimate_l(&ds);
        prop_assert!((l - top / 4.0).abs() <= 1e-6 * top.max(1e-300), "{} vs {}", l, top / 4.0);

        let xs = nalgebra::DVector::from_vec(x);
        let margins = &a * &xs;
        let weights = margins.map(|m| sigmoid(m) * (1.0 - sigmoid(m)));
        let hessian = a.transpose() * DMatrix::from_diagonal(&weights) * &a / n;
        let h_top = SymmetricEigen::new(hessian).eigenvalues.max();
        prop_assert!(h_top <= l * (1.0 + 1e-6));
    }
}

#[test]
fn synthetic_w1a_like_parses_back() {
    let ds = synthetic_binary(SyntheticSpec::w1a_like(500), 0).unwrap();
    let back = parse_libsvm_str(&ds.to_libsvm()).unwrap();
    assert_eq!(back.n(), 500);
    assert!(back.dim() <= 300);
    assert!(estimate_l(&back) > 0.0);
}
