use gradclip::{clip, clip_coefficient, clipped_step, ClipParams, Point};
use proptest::prelude::*;

fn vector(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1e3..1e3f64, dim)
}

fn pair() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, f64)> {
    (1usize..8).prop_flat_map(|d| (vector(d), vector(d), 1e-3..1e3f64))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn norm_never_exceeds_threshold((u, _, c) in pair()) {
        let out = clip(&Point::new(u), c).unwrap();
        prop_assert!(out.norm() <= c);
    }

    #[test]
    fn short_vectors_are_untouched((u, _, c) in pair()) {
        let u = Point::new(u);
        let c = c.max(u.norm());
        prop_assert_eq!(clip(&u, c).unwrap(), u);
    }

    #[test]
    fn direction_is_preserved((u, _, c) in pair()) {
        let u = Point::new(u);
        let s = clip_coefficient(&u, c).unwrap();
        prop_assert!(s > 0.0 && s <= 1.0);
        prop_assert_eq!(clip(&u, c).unwrap(), u.scaled(s));
    }

    #[test]
    fn clipping_is_non_expansive((u, v, c) in pair()) {
        let (u, v) = (Point::new(u), Point::new(v));
        let lhs = clip(&u, c).unwrap().distance(&clip(&v, c).unwrap());
        prop_assert!(lhs <= u.distance(&v) * (1.0 + 1e-12) + 1e-12, "{} > {}", lhs, u.distance(&v));
    }

    #[test]
    fn clipping_is_idempotent((u, _, c) in pair()) {
        let once = clip(&Point::new(u), c).unwrap();
        prop_assert_eq!(clip(&once, c).unwrap(), once);
    }

    #[test]
    fn step_displacement_is_at_most_eta_c((x, g, c) in pair(), eta in 1e-4..10.0f64) {
        let x = Point::new(x);
        let params = ClipParams::new(c, eta).unwrap();
        let next = clipped_step(&x, &Point::new(g), params).unwrap();
        prop_assert!(next.distance(&x) <= eta * c * (1.0 + 1e-12));
    }
}

#[test]
fn infinite_threshold_is_identity() {
    let u = Point::new(vec![1e300, -3.0]);
    assert_eq!(clip(&u, f64::INFINITY).unwrap(), u);
}
