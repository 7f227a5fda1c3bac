//! Hidden tables shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use bounce_core::reconstruction::{PolygonOracle, SpectrumOracle};
use bounce_core::LabeledPolygon;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn poly(coords: &[(f64, f64)], labels: &[&str]) -> LabeledPolygon {
    LabeledPolygon::from_coords(coords, labels).unwrap()
}

pub fn square() -> LabeledPolygon {
    rect(1.0, 1.0)
}

pub fn rect(w: f64, h: f64) -> LabeledPolygon {
    poly(&[(0.0, 0.0), (w, 0.0), (w, h), (0.0, h)], &["A", "B", "C", "D"])
}

/// Triangle with angle `alpha` at the origin between edges `B` (incoming)
/// and `A` (outgoing) and angle `beta` at the far end of `A`.
pub fn triangle(alpha: f64, beta: f64) -> LabeledPolygon {
    let gamma = PI - alpha - beta;
    let side = beta.sin() / gamma.sin();
    poly(
        &[(0.0, 0.0), (1.0, 0.0), (side * alpha.cos(), side * alpha.sin())],
        &["A", "C", "B"],
    )
}

/// L-shaped table whose reflex corner, between `C` and `D`, measures 3π/2.
pub fn l_shape() -> LabeledPolygon {
    poly(
        &[(0.0, 0.0), (2.0, 0.0), (2.0, 1.0), (1.0, 1.0), (1.0, 2.0), (0.0, 2.0)],
        &["A", "B", "C", "D", "E", "F"],
    )
}

/// Rhombus with its π/3 corner between `A` and `B`.
pub fn rhombus() -> LabeledPolygon {
    let s = 3f64.sqrt() / 2.0;
    poly(&[(1.0, 0.0), (1.5, s), (0.5, s), (0.0, 0.0)], &["A", "B", "C", "D"])
}

pub fn letters(o: &PolygonOracle, a: &str, b: &str) -> (usize, usize) {
    (o.letter(a).unwrap(), o.letter(b).unwrap())
}

/// Random triangles with every angle in `[0.3, π − 0.6]`.
pub fn random_triangles(count: usize, seed: u64) -> Vec<LabeledPolygon> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < count {
        let a: f64 = rng.gen_range(0.3..2.5);
        let b: f64 = rng.gen_range(0.3..2.5);
        if a + b < PI - 0.3 {
            out.push(triangle(a, b));
        }
    }
    out
}

const LETTERS: [&str; 8] = ["A", "B", "C", "D", "E", "F", "G", "H"];

/// Random convex polygons inscribed in the unit circle, well away from
/// slivers and straight angles.
pub fn random_convex(count: usize, seed: u64) -> Vec<LabeledPolygon> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < count {
        let n = rng.gen_range(4..=7);
        let mut ang: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..2.0 * PI)).collect();
        ang.sort_by(f64::total_cmp);
        let pts: Vec<(f64, f64)> = ang.iter().map(|a| (a.cos(), a.sin())).collect();
        if let Ok(p) = LabeledPolygon::from_coords(&pts, &LETTERS[..n]) {
            if p.min_feature_size() > 0.15 && p.interior_angles().iter().all(|&a| a > 0.3 && a < PI - 0.3) {
                out.push(p);
            }
        }
    }
    out
}

/// Non-convex tables where a line through a reflex vertex makes two
/// non-adjacent edges common prefixes.
pub fn reflex_tables() -> Vec<LabeledPolygon> {
    vec![
        l_shape(),
        poly(&[(0., 0.), (3., 0.), (3., 1.), (1.3, 1.), (1.3, 2.2), (0., 2.2)], &LETTERS[..6]),
        poly(
            &[(0., 0.), (3., 0.), (3., 2.), (2., 2.), (2., 1.), (1., 1.), (1., 2.), (0., 2.)],
            &LETTERS[..8],
        ),
        poly(&[(0., 0.), (2., 0.), (2., 2.), (1., 0.8), (0., 2.)], &LETTERS[..5]),
        poly(&[(0., 0.), (2.5, 0.), (1.2, 0.9), (2., 2.), (0., 1.6)], &LETTERS[..5]),
    ]
}

/// True adjacency as letter pairs of `o`.
pub fn true_pairs(o: &PolygonOracle, p: &LabeledPolygon) -> std::collections::BTreeSet<(usize, usize)> {
    (0..p.len())
        .map(|i| {
            let a = o.letter(p.label(i).as_str()).unwrap();
            let b = o.letter(p.label((i + 1) % p.len()).as_str()).unwrap();
            (a.min(b), a.max(b))
        })
        .collect()
}
