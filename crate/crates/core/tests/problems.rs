use gradclip::data::parse_libsvm_str;
use gradclip::theory::{certify_smoothness, clip_probability_bound, gradient_check};
use gradclip::{
    BernoulliShiftQuadratic, ChiSquareQuadratic, LogisticOptions, LogisticRegressionProblem, Point,
    Problem, Quadratic,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const TOY: &str = "+1 1:0.5 2:1 4:-1\n-1 2:2 3:0.3\n+1 1:-1 5:1.5\n-1 1:1 2:1 3:1 4:1 5:1\n+1 3:-2\n-1 4:0.7 5:-0.2\n";

fn shipped_problems() -> Vec<Box<dyn Problem>> {
    let ds = parse_libsvm_str(TOY).unwrap();
    vec![
        Box::new(Quadratic::new(vec![0.5, 1.0, 3.0], Point::new(vec![1.0, -2.0, 0.5])).unwrap()),
        Box::new(BernoulliShiftQuadratic::new(4.0, 0.25).unwrap()),
        Box::new(ChiSquareQuadratic::default()),
        Box::new(LogisticRegressionProblem::new(&ds, LogisticOptions::default()).unwrap()),
        Box::new(
            LogisticRegressionProblem::new(
                &ds,
                LogisticOptions {
                    lambda: 0.1,
                    intercept: true,
                    normalize: true,
                },
            )
            .unwrap(),
        ),
    ]
}

#[test]
fn gradients_match_central_differences() {
    for pb in shipped_problems() {
        let check = gradient_check(pb.as_ref(), 20, 3.0, 11).unwrap();
        assert!(check.max_rel_error <= 1e-5, "{}: {}", pb.name(), check.max_rel_error);
    }
}

#[test]
fn declared_constants_certify() {
    for pb in shipped_problems() {
        let m = pb.meta();
        let cert = certify_smoothness(pb.as_ref(), m.l0, m.l1, 500, 5.0, 3).unwrap();
        assert!(cert.passed(), "{}: {:?}", pb.name(), cert.violations.first());
    }
}

/// Mean of `n` stochastic gradients and the largest per-coordinate deviation
/// from the exact gradient in units of standard error.
fn unbiasedness_z(pb: &dyn Problem, x: &Point, n: usize, seed: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = pb.dim();
    let (mut sum, mut sum_sq, mut dev_sq) = (vec![0.0; d], vec![0.0; d], 0.0);
    let g = pb.grad(x).unwrap();
    for _ in 0..n {
        let s = pb.sample_grad(x, &mut rng).unwrap();
        dev_sq += s.sub(&g).norm_sq();
        for j in 0..d {
            sum[j] += s.coords()[j];
            sum_sq[j] += s.coords()[j] * s.coords()[j];
        }
    }
    let nf = n as f64;
    let mut worst = 0.0f64;
    for j in 0..d {
        let mean = sum[j] / nf;
        let se = ((sum_sq[j] / nf - mean * mean).max(0.0) / nf).sqrt();
        if se > 0.0 {
            worst = worst.max((mean - g.coords()[j]).abs() / se);
        } else {
            assert!((mean - g.coords()[j]).abs() <= 1e-9 * (1.0 + mean.abs()));
        }
    }
    (worst, dev_sq / nf)
}

#[test]
fn stochastic_gradients_are_unbiased_with_bounded_variance() {
    for pb in shipped_problems() {
        let x = Point::filled(pb.dim(), 0.3);
        let (z, var) = unbiasedness_z(pb.as_ref(), &x, 200_000, 7);
        // max over up to 100 coordinates of |N(0,1)| stays far below 6
        assert!(z < 6.0, "{}: z = {z}", pb.name());
        let exact = pb.variance_at(&x).unwrap();
        let tol = 0.05 * exact + 1e-12;
        assert!((var - exact).abs() <= tol, "{}: {var} vs {exact}", pb.name());
        if pb.name() != "logistic" {
            assert!(exact <= pb.meta().sigma_sq);
        }
    }
}

#[test]
fn chi_square_variance_matches_declared() {
    let pb = ChiSquareQuadratic::new(10, 0.1).unwrap();
    let (_, var) = unbiasedness_z(&pb, &Point::zeros(10), 400_000, 1);
    assert!((var - 20.0).abs() < 0.5, "{var}");
}

#[test]
fn clip_probability_respects_chebyshev() {
    for (a, p) in [(8.0, 0.0158), (4.0, 0.067), (20.0, 0.01)] {
        let pb = BernoulliShiftQuadratic::new(a, p).unwrap();
        let c = 2.0 * a / 3.0;
        let r = clip_probability_bound(&pb, &Point::scalar(-p * a), c, 50_000, 2).unwrap();
        assert!(r.holds, "{r:?}");
    }
    let pb = ChiSquareQuadratic::new(3, 0.1).unwrap();
    let x = pb.meta().x_star.clone().unwrap();
    assert!(clip_probability_bound(&pb, &x, 10.0, 50_000, 2).unwrap().holds);
}
