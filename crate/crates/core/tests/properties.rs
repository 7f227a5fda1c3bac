mod common;

use std::f64::consts::PI;

use bounce_core::flow::trace;
use bounce_core::geometry::{normalize, reflect_across_segment, Isometry2, Point2};
use bounce_core::sturmian::{gcd, insertion_strings};
use bounce_core::unfolding::{develop, is_realizable};
use common::*;
use proptest::prelude::*;

fn point() -> impl Strategy<Value = Point2> {
    (-10.0..10.0f64, -10.0..10.0f64).prop_map(|(x, y)| Point2::new(x, y))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reflection_is_an_involutive_isometry(a in point(), b in point(), p in point(), q in point()) {
        prop_assume!(a.dist(b) > 1e-3);
        let r = reflect_across_segment(a, b).unwrap();
        prop_assert!(r.is_orthogonal(1e-12));
        prop_assert!((r.det() + 1.0).abs() < 1e-12);
        prop_assert!((r.apply(p).dist(r.apply(q)) - p.dist(q)).abs() < 1e-9);
        prop_assert!(r.apply(r.apply(p)).dist(p) < 1e-9);
        prop_assert!(r.apply(a).dist(a) < 1e-9 && r.apply(b).dist(b) < 1e-9);
    }

    #[test]
    fn normalize_ignores_similarities(
        a in 0.3..2.4f64, b in 0.3..2.4f64, rot in 0.0..(2.0 * PI), scale in 0.1..10.0f64, shift in point(),
    ) {
        prop_assume!(a + b < PI - 0.2);
        let t = triangle(a, b);
        let (s, c) = rot.sin_cos();
        let g = Isometry2 { m: [[c * scale, -s * scale], [s * scale, c * scale]], t: shift };
        let moved = bounce_core::LabeledPolygon::new_unchecked(
            t.vertices().iter().map(|&v| g.apply(v)).collect(),
            t.labels().to_vec(),
        );
        let (n0, n1) = (normalize(&t), normalize(&moved));
        for (u, v) in n0.vertices().iter().zip(n1.vertices()) {
            prop_assert!(u.dist(*v) < 1e-9);
        }
    }

    #[test]
    fn traced_words_are_realizable_and_develop_orthogonally(
        x in 0.05..0.95f64, y in 0.05..0.95f64, theta in 0.0..(2.0 * PI), n in 1usize..12,
    ) {
        let sq = square();
        let r = trace(&sq, Point2::new(x, y), theta, n).unwrap();
        prop_assume!(!r.is_singular());
        prop_assert!(is_realizable(&sq, &r.word).unwrap());
        let dev = develop(&sq, &r.word).unwrap();
        prop_assert_eq!(dev.copies.len(), r.word.len() + 1);
        for g in &dev.copies {
            prop_assert!(g.is_orthogonal(1e-9));
        }
    }

    #[test]
    fn insertion_pattern_counts(p in 1u64..40, q in 1u64..40) {
        prop_assume!(gcd(p, q) == 1);
        let pat = insertion_strings(p, q).unwrap();
        prop_assert_eq!(pat.strings.len() as u64, 2 * p);
        prop_assert_eq!(pat.total() as u64, 2 * q);
    }
}
