//! Radii within which a finite set of words survives every perturbation of
//! the table, and the sampling check that exhibits distinct tables sharing
//! those words.
//!
//! A realizing line stays clear of every vertex and wall of the development
//! by some `delta`. Each copy vertex is a smooth function of the table's
//! vertices, so moving the table's vertices by at most `epsilon` moves every
//! copy vertex by roughly `L·epsilon`, where `L` sums the operator norms of
//! the partial Jacobians. Choosing `epsilon = delta / (2L)` leaves the line
//! inside the perturbed corridor with room for the curvature of the map.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{normalize, point_segment_distance, segment_segment_distance, validate, LabeledPolygon, Point2};
use crate::unfolding::{develop, is_realizable, CorridorSolver, Development, Line};

/// Safety factor between the first-order displacement bound and the clearance.
pub const SAFETY: f64 = 0.5;
/// Fraction of the minimum feature size allowed as a perturbation radius.
pub const FEATURE_CAP: f64 = 0.25;
/// Consecutive invalid draws tolerated by [`sample_perturbed`].
pub const MAX_REJECTIONS: usize = 1000;

#[derive(Clone, Debug, Serialize)]
pub struct WordRadius {
    pub word: String,
    pub delta: f64,
    pub sensitivity: f64,
    /// `delta·SAFETY/sensitivity` before the feature cap.
    pub epsilon: f64,
    pub witness: Line,
}

#[derive(Clone, Debug, Serialize)]
pub struct PersistenceCertificate {
    pub words: Vec<String>,
    pub epsilon: f64,
    /// Clearance of the word that binds `epsilon`.
    pub delta: f64,
    /// Sensitivity bound of that word.
    pub sensitivity: f64,
    pub witness: Line,
    /// `epsilon` was lowered to the feature cap.
    pub capped: bool,
    pub samples_checked: usize,
    pub per_word: Vec<WordRadius>,
}

fn line_crossing(line: &Line, a: Point2, b: Point2) -> Point2 {
    let (sa, sb) = (line.side(a), line.side(b));
    let t = sa / (sa - sb);
    a + (b - a) * t
}

fn point_clearance(p: Point2, q: Point2, verts: &[Point2], skip: &[usize]) -> f64 {
    let n = verts.len();
    let mut m = f64::INFINITY;
    for (k, &v) in verts.iter().enumerate() {
        m = m.min(point_segment_distance(v, p, q));
        if skip.contains(&k) {
            continue;
        }
        m = m.min(segment_segment_distance(p, q, v, verts[(k + 1) % n]));
    }
    m
}

/// Clearance of the corridor witness of `word` from the vertices and walls of
/// each development copy.
///
/// Within copy `j` the witness runs between its crossings of portals `j-1`
/// and `j`; the first and last copies contribute only the crossing point.
/// Walls other than the two portals of a copy and the perpendicular margin
/// at the portal endpoints are included as well, since near a sharp corner a
/// line can pass a wall closer than it passes any vertex.
pub fn vertex_clearance(poly: &LabeledPolygon, word: &[usize]) -> Result<(f64, Line)> {
    if word.is_empty() {
        return Err(Error::EmptyWord);
    }
    let dev = develop(poly, word)?;
    let corridor = CorridorSolver::new(poly).corridor(&dev)?;
    let witness = match corridor.witness {
        Some(w) if corridor.feasible => w,
        _ => return Err(Error::Infeasible(poly.format_word(word))),
    };
    Ok((clearance_of(poly, &dev, &witness).min(corridor.margin), witness))
}

fn clearance_of(poly: &LabeledPolygon, dev: &Development, witness: &Line) -> f64 {
    let n = dev.portals.len();
    let hits: Vec<Point2> = dev
        .portals
        .iter()
        .map(|p| line_crossing(witness, p.left, p.right))
        .collect();
    let mut delta = f64::INFINITY;
    for j in 0..=n {
        let verts = dev.copy_vertices(poly, j);
        let (p, q) = match j {
            0 => (hits[0], hits[0]),
            j if j == n => (hits[n - 1], hits[n - 1]),
            j => (hits[j - 1], hits[j]),
        };
        let mut skip = Vec::with_capacity(2);
        if j > 0 {
            skip.push(dev.word[j - 1]);
        }
        if j < n {
            skip.push(dev.word[j]);
        }
        delta = delta.min(point_clearance(p, q, &verts, &skip));
    }
    delta
}

/// Scalar carrying its gradient with respect to the table's vertex coordinates.
#[derive(Clone, Debug)]
struct Dual {
    v: f64,
    g: Vec<f64>,
}

impl Dual {
    fn constant(v: f64, dim: usize) -> Dual {
        Dual { v, g: vec![0.0; dim] }
    }

    fn seed(v: f64, dim: usize, i: usize) -> Dual {
        let mut d = Dual::constant(v, dim);
        d.g[i] = 1.0;
        d
    }

    fn add(&self, o: &Dual) -> Dual {
        Dual {
            v: self.v + o.v,
            g: self.g.iter().zip(&o.g).map(|(a, b)| a + b).collect(),
        }
    }

    fn sub(&self, o: &Dual) -> Dual {
        Dual {
            v: self.v - o.v,
            g: self.g.iter().zip(&o.g).map(|(a, b)| a - b).collect(),
        }
    }

    fn mul(&self, o: &Dual) -> Dual {
        Dual {
            v: self.v * o.v,
            g: self.g.iter().zip(&o.g).map(|(a, b)| a * o.v + b * self.v).collect(),
        }
    }

    fn div(&self, o: &Dual) -> Dual {
        let inv = 1.0 / o.v;
        Dual {
            v: self.v * inv,
            g: self
                .g
                .iter()
                .zip(&o.g)
                .map(|(a, b)| (a * o.v - self.v * b) * inv * inv)
                .collect(),
        }
    }

    fn scale(&self, s: f64) -> Dual {
        Dual {
            v: self.v * s,
            g: self.g.iter().map(|a| a * s).collect(),
        }
    }
}

type DPoint = [Dual; 2];

/// Isometry `x ↦ M x + t` whose entries depend on the table's vertices.
#[derive(Clone, Debug)]
struct DIsometry {
    m: [[Dual; 2]; 2],
    t: DPoint,
}

impl DIsometry {
    fn identity(dim: usize) -> DIsometry {
        let c = |v| Dual::constant(v, dim);
        DIsometry {
            m: [[c(1.0), c(0.0)], [c(0.0), c(1.0)]],
            t: [c(0.0), c(0.0)],
        }
    }

    fn linear(&self, p: &DPoint) -> DPoint {
        [
            self.m[0][0].mul(&p[0]).add(&self.m[0][1].mul(&p[1])),
            self.m[1][0].mul(&p[0]).add(&self.m[1][1].mul(&p[1])),
        ]
    }

    fn apply(&self, p: &DPoint) -> DPoint {
        let l = self.linear(p);
        [l[0].add(&self.t[0]), l[1].add(&self.t[1])]
    }

    fn compose(&self, o: &DIsometry) -> DIsometry {
        let e = |i: usize, j: usize| self.m[i][0].mul(&o.m[0][j]).add(&self.m[i][1].mul(&o.m[1][j]));
        DIsometry {
            m: [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]],
            t: self.apply(&o.t),
        }
    }

    /// Reflection across the line through `a` and `b`.
    fn reflection(a: &DPoint, b: &DPoint) -> DIsometry {
        let ux = b[0].sub(&a[0]);
        let uy = b[1].sub(&a[1]);
        let nn = ux.mul(&ux).add(&uy.mul(&uy));
        let dim = ux.g.len();
        let one = Dual::constant(1.0, dim);
        let m00 = ux.mul(&ux).scale(2.0).div(&nn).sub(&one);
        let m01 = ux.mul(&uy).scale(2.0).div(&nn);
        let m11 = uy.mul(&uy).scale(2.0).div(&nn).sub(&one);
        let m = [[m00, m01.clone()], [m01, m11]];
        let ma = DIsometry {
            m: m.clone(),
            t: [Dual::constant(0.0, dim), Dual::constant(0.0, dim)],
        }
        .linear(a);
        DIsometry {
            m,
            t: [a[0].sub(&ma[0]), a[1].sub(&ma[1])],
        }
    }
}

fn spectral_norm(a: f64, b: f64, c: f64, d: f64) -> f64 {
    let s = a * a + b * b + c * c + d * d;
    let det = a * d - b * c;
    (0.5 * (s + (s * s - 4.0 * det * det).max(0.0).sqrt())).sqrt()
}

/// Largest displacement of a development-copy vertex per unit displacement of
/// every table vertex, to first order at `poly`.
///
/// Falls back to `3^|word|` when the derivative is not finite.
pub fn sensitivity(poly: &LabeledPolygon, word: &[usize]) -> f64 {
    let n = poly.len();
    let dim = 2 * n;
    let z: Vec<DPoint> = poly
        .vertices()
        .iter()
        .enumerate()
        .map(|(k, p)| [Dual::seed(p.x, dim, 2 * k), Dual::seed(p.y, dim, 2 * k + 1)])
        .collect();
    let mut g = DIsometry::identity(dim);
    let mut worst: f64 = 0.0;
    for j in 0..=word.len() {
        if j > 0 {
            let e = word[j - 1];
            g = g.compose(&DIsometry::reflection(&z[e], &z[(e + 1) % n]));
        }
        for zk in &z {
            let img = g.apply(zk);
            let bound: f64 = (0..n)
                .map(|i| {
                    spectral_norm(
                        img[0].g[2 * i],
                        img[0].g[2 * i + 1],
                        img[1].g[2 * i],
                        img[1].g[2 * i + 1],
                    )
                })
                .sum();
            worst = worst.max(bound);
        }
    }
    if worst.is_finite() && worst > 0.0 {
        worst
    } else {
        3f64.powi(word.len() as i32)
    }
}

/// The largest radius this construction certifies for all of `words` at once.
pub fn persistence_radius(poly: &LabeledPolygon, words: &[Vec<usize>]) -> Result<PersistenceCertificate> {
    if words.is_empty() {
        return Err(Error::Precondition("the word set is empty".into()));
    }
    let per_word = words
        .par_iter()
        .map(|w| {
            let (delta, witness) = vertex_clearance(poly, w)?;
            let l = sensitivity(poly, w);
            Ok(WordRadius {
                word: poly.format_word(w),
                delta,
                sensitivity: l,
                epsilon: SAFETY * delta / l,
                witness,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let binding = per_word
        .iter()
        .min_by(|a, b| a.epsilon.total_cmp(&b.epsilon))
        .expect("non-empty");
    let cap = FEATURE_CAP * poly.min_feature_size();
    let epsilon = binding.epsilon.min(cap);
    if !(epsilon > 0.0) {
        return Err(Error::Precondition(format!(
            "no positive radius for {}",
            binding.word
        )));
    }
    Ok(PersistenceCertificate {
        words: per_word.iter().map(|r| r.word.clone()).collect(),
        epsilon,
        delta: binding.delta,
        sensitivity: binding.sensitivity,
        witness: binding.witness,
        capped: cap < binding.epsilon,
        samples_checked: 0,
        per_word,
    })
}

/// Draws `count` tables with each vertex moved uniformly within the open
/// `epsilon`-disk about its original position.
///
/// Sample `i` uses its own stream of a ChaCha8 generator seeded with `seed`,
/// so results do not depend on scheduling. Invalid polygons are redrawn.
pub fn sample_perturbed(
    poly: &LabeledPolygon,
    epsilon: f64,
    count: usize,
    seed: u64,
) -> Result<Vec<LabeledPolygon>> {
    if !(epsilon >= 0.0) || !epsilon.is_finite() {
        return Err(Error::Precondition(format!("epsilon must be non-negative, got {epsilon}")));
    }
    (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            draw(poly, epsilon, &mut rng)
        })
        .collect()
}

fn draw(poly: &LabeledPolygon, epsilon: f64, rng: &mut ChaCha8Rng) -> Result<LabeledPolygon> {
    if epsilon == 0.0 {
        return Ok(poly.clone());
    }
    for _ in 0..MAX_REJECTIONS {
        let vs = poly
            .vertices()
            .iter()
            .map(|&v| {
                // u < 1 keeps the radius strictly inside the disk
                let r = epsilon * rng.gen::<f64>().sqrt();
                let t = rng.gen::<f64>() * std::f64::consts::TAU;
                v + Point2::from_angle(t) * r
            })
            .collect();
        let q = LabeledPolygon::new_unchecked(vs, poly.labels().to_vec());
        if validate(&q).is_valid() {
            return Ok(q);
        }
    }
    Err(Error::SamplingFailed(MAX_REJECTIONS))
}

/// Largest distance between corresponding vertices.
pub fn vertex_distance(p: &LabeledPolygon, q: &LabeledPolygon) -> f64 {
    p.vertices()
        .iter()
        .zip(q.vertices())
        .map(|(a, b)| a.dist(*b))
        .fold(0.0, f64::max)
}

#[derive(Clone, Debug, Serialize)]
pub struct PersistenceFailure {
    pub sample: usize,
    pub word: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct DistinctPair {
    pub first: usize,
    pub second: usize,
    /// Vertex distance in raw coordinates.
    pub distance: f64,
    /// Vertex distance after both are normalized, so similar copies score zero.
    pub normalized_distance: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ImpossibilityReport {
    pub certificate: PersistenceCertificate,
    /// Multiplier applied to the certified radius before sampling.
    pub scale: f64,
    pub epsilon_used: f64,
    pub samples: usize,
    pub persistent: usize,
    pub failures: Vec<PersistenceFailure>,
    pub distinct_pair: Option<DistinctPair>,
    pub passed: bool,
    #[serde(skip)]
    pub tables: Vec<LabeledPolygon>,
}

/// Certifies `words`, samples the certified neighbourhood and checks every
/// word on every sample.
pub fn demonstrate_impossibility(
    poly: &LabeledPolygon,
    words: &[Vec<usize>],
    count: usize,
    seed: u64,
) -> Result<ImpossibilityReport> {
    demonstrate_with_scale(poly, words, count, seed, 1.0)
}

/// As [`demonstrate_impossibility`] with the radius multiplied by `scale`.
/// Scales above one probe how far beyond the certificate the words survive.
pub fn demonstrate_with_scale(
    poly: &LabeledPolygon,
    words: &[Vec<usize>],
    count: usize,
    seed: u64,
    scale: f64,
) -> Result<ImpossibilityReport> {
    let mut certificate = persistence_radius(poly, words)?;
    let epsilon_used = certificate.epsilon * scale;
    let tables = sample_perturbed(poly, epsilon_used, count, seed)?;
    let per_sample: Vec<Vec<usize>> = tables
        .par_iter()
        .map(|q| {
            words
                .iter()
                .enumerate()
                .filter(|(_, w)| !is_realizable(q, w).unwrap_or(false))
                .map(|(k, _)| k)
                .collect()
        })
        .collect();
    let failures: Vec<PersistenceFailure> = per_sample
        .iter()
        .enumerate()
        .flat_map(|(i, bad)| {
            bad.iter().map(move |&k| PersistenceFailure {
                sample: i,
                word: poly.format_word(&words[k]),
            })
        })
        .collect();
    let persistent = per_sample.iter().filter(|b| b.is_empty()).count();
    let good: Vec<usize> = (0..tables.len()).filter(|&i| per_sample[i].is_empty()).collect();
    let distinct_pair = most_distinct(&tables, &good);
    certificate.samples_checked = tables.len();
    let passed = failures.is_empty()
        && distinct_pair
            .as_ref()
            .is_some_and(|d| d.distance > 0.5 * epsilon_used);
    Ok(ImpossibilityReport {
        certificate,
        scale,
        epsilon_used,
        samples: tables.len(),
        persistent,
        failures,
        distinct_pair,
        passed,
        tables,
    })
}

fn most_distinct(tables: &[LabeledPolygon], good: &[usize]) -> Option<DistinctPair> {
    let mut best: Option<DistinctPair> = None;
    for (x, &i) in good.iter().enumerate() {
        for &j in &good[x + 1..] {
            let d = vertex_distance(&tables[i], &tables[j]);
            if best.as_ref().is_none_or(|b| d > b.distance) {
                best = Some(DistinctPair {
                    first: i,
                    second: j,
                    distance: d,
                    normalized_distance: 0.0,
                });
            }
        }
    }
    best.map(|mut b| {
        b.normalized_distance = vertex_distance(&normalize(&tables[b.first]), &normalize(&tables[b.second]));
        b
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::language::enumerate_language;

    fn square() -> LabeledPolygon {
        LabeledPolygon::from_coords(
            &[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)],
            &["A", "B", "C", "D"],
        )
        .unwrap()
    }

    fn rhombus() -> LabeledPolygon {
        let s = 3f64.sqrt() / 2.0;
        LabeledPolygon::from_coords(
            &[(1.0, 0.0), (1.5, s), (0.5, s), (0.0, 0.0)],
            &["A", "B", "C", "D"],
        )
        .unwrap()
    }

    #[test]
    fn square_mid_line_clearance() {
        let p = square();
        let (d, w) = vertex_clearance(&p, &p.parse_word_str("B,D").unwrap()).unwrap();
        assert!((d - 0.5).abs() < 1e-9, "{d}");
        assert!((w.point.y - 0.5).abs() < 1e-9);
        let bd5 = p.parse_word_str(&["B,D"; 5].join(",")).unwrap();
        let (d, _) = vertex_clearance(&p, &bd5).unwrap();
        assert!((d - 0.5).abs() < 1e-9, "{d}");
    }

    #[test]
    fn rhombus_clearance_is_positive() {
        let p = rhombus();
        let (d, _) = vertex_clearance(&p, &p.parse_word_str("A,B,A").unwrap()).unwrap();
        assert!(d > 0.0 && d < 1.0, "{d}");
    }

    #[test]
    fn infeasible_and_empty_words_are_rejected() {
        let p = square();
        assert!(vertex_clearance(&p, &p.parse_word_str("A,B,A").unwrap()).is_err());
        assert!(persistence_radius(&p, &[]).is_err());
        let words = vec![p.parse_word_str("B,D").unwrap(), p.parse_word_str("A,B,A").unwrap()];
        assert!(persistence_radius(&p, &words).is_err());
    }

    #[test]
    fn sensitivity_matches_finite_differences() {
        let p = rhombus();
        let w = p.parse_word_str("A,B,C,B").unwrap();
        let l = sensitivity(&p, &w);
        // perturb a single coordinate and compare the displacement of copy vertices
        let h = 1e-6;
        let dev = develop(&p, &w).unwrap();
        let mut worst: f64 = 0.0;
        for k in 0..p.len() {
            for dir in [Point2::new(1.0, 0.0), Point2::new(0.0, 1.0)] {
                let mut vs = p.vertices().to_vec();
                vs[k] = vs[k] + dir * h;
                let q = LabeledPolygon::new_unchecked(vs, p.labels().to_vec());
                let dq = develop(&q, &w).unwrap();
                for j in 0..dev.copies.len() {
                    let a = dev.copy_vertices(&p, j);
                    let b = dq.copy_vertices(&q, j);
                    for (x, y) in a.iter().zip(&b) {
                        worst = worst.max(x.dist(*y) / h);
                    }
                }
            }
        }
        assert!(worst <= l + 1e-4, "{worst} > {l}");
        assert!(l >= 1.0);
    }

    #[test]
    fn square_certificate() {
        let p = square();
        let c = persistence_radius(&p, &[p.parse_word_str("B,D").unwrap()]).unwrap();
        assert!((c.delta - 0.5).abs() < 1e-9);
        assert!(c.epsilon > 0.0 && c.epsilon <= c.delta / c.sensitivity);
    }

    #[test]
    fn superset_radius_is_no_larger() {
        let p = square();
        let lang = enumerate_language(&p, 4).unwrap();
        let all: Vec<Vec<usize>> = lang.words.iter().filter(|w| !w.is_empty()).cloned().collect();
        let sub: Vec<Vec<usize>> = all.iter().filter(|w| w.len() <= 2).cloned().collect();
        let big = persistence_radius(&p, &all).unwrap();
        let small = persistence_radius(&p, &sub).unwrap();
        assert!(big.epsilon <= small.epsilon);
        assert!(big.epsilon > 0.0);
    }

    #[test]
    fn sampling_is_deterministic_and_valid() {
        let p = square();
        let a = sample_perturbed(&p, 0.01, 100, 1).unwrap();
        let b = sample_perturbed(&p, 0.01, 100, 1).unwrap();
        assert_eq!(a, b);
        for q in &a {
            assert!(validate(q).is_valid());
            assert_eq!(q.labels(), p.labels());
            assert!(vertex_distance(q, &p) < 0.01);
        }
        let z = sample_perturbed(&p, 0.0, 3, 1).unwrap();
        assert!(z.iter().all(|q| q == &p));
    }

    #[test]
    fn square_words_persist() {
        let p = square();
        let lang = enumerate_language(&p, 3).unwrap();
        let words: Vec<Vec<usize>> = lang.words.iter().filter(|w| !w.is_empty()).cloned().collect();
        let r = demonstrate_impossibility(&p, &words, 200, 3).unwrap();
        assert!(r.failures.is_empty(), "{:?}", &r.failures[..r.failures.len().min(5)]);
        assert!(r.passed);
        let pair = r.distinct_pair.unwrap();
        assert!(pair.normalized_distance > 0.0);
    }
}
