//! Developments along bounce words and the corridors of lines realizing them.
//!
//! A line realizes a word when it crosses every portal of the development in
//! order, entering each copy through the image of the current letter. In a
//! frame whose x-axis roughly follows the travel direction, candidate lines are
//! `y = a·x + b` and each portal asks for its left endpoint above the line and
//! its right endpoint below. The margin of the best line is a concave
//! piecewise-linear function of `a`, so it is maximized by bisection on a
//! subgradient. Four frames a quarter turn apart, each restricted to
//! `|a| ≤ 1`, cover every direction.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{reflect_across_segment, segments_cross, point_segment_distance, wrap_angle, Isometry2, LabeledPolygon, Point2};

/// Lines whose clearance from a portal endpoint is at most this fraction of
/// the diameter are treated as passing through a vertex.
pub const TIGHT_REL: f64 = 1e-12;

/// Corridors narrower than this fraction of the diameter are numerically marginal.
pub const WIDTH_FLOOR_REL: f64 = 1e-10;

/// Image of a word letter's edge in the development. `left` and `right` are
/// named relative to a line crossing it in the direction of travel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Portal {
    pub edge: usize,
    pub left: Point2,
    pub right: Point2,
}

impl Portal {
    pub fn midpoint(&self) -> Point2 {
        (self.left + self.right) * 0.5
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Development {
    pub word: Vec<usize>,
    /// `copies[0]` is the identity; `copies[j]` places the table after `j` bounces.
    pub copies: Vec<Isometry2>,
    pub portals: Vec<Portal>,
}

impl Development {
    pub fn copy_vertices(&self, poly: &LabeledPolygon, j: usize) -> Vec<Point2> {
        let g = &self.copies[j];
        poly.vertices().iter().map(|&v| g.apply(v)).collect()
    }
}

/// Unfolds `poly` along `word`.
pub fn develop(poly: &LabeledPolygon, word: &[usize]) -> Result<Development> {
    for (i, &e) in word.iter().enumerate() {
        if e >= poly.len() {
            return Err(Error::UnknownLabel(format!("#{e}")));
        }
        if i > 0 && word[i - 1] == e {
            return Err(Error::RepeatedLetter {
                label: poly.label(e).to_string(),
                position: i,
            });
        }
    }
    develop_unchecked(poly, word)
}

/// Unfolds without rejecting immediate repeats.
pub fn develop_unchecked(poly: &LabeledPolygon, word: &[usize]) -> Result<Development> {
    let reflections = edge_reflections(poly)?;
    let mut copies = Vec::with_capacity(word.len() + 1);
    let mut portals = Vec::with_capacity(word.len());
    let mut g = Isometry2::IDENTITY;
    copies.push(g);
    for &e in word {
        if e >= poly.len() {
            return Err(Error::UnknownLabel(format!("#{e}")));
        }
        g = g.compose(&reflections[e]);
        let (a, b) = poly.edge(e);
        let (a, b) = (g.apply(a), g.apply(b));
        // copy j keeps the table's interior on the left of a→b exactly when
        // it preserves orientation; the line enters it, so `a` is on its left
        let (left, right) = if g.det() > 0.0 { (a, b) } else { (b, a) };
        portals.push(Portal {
            edge: e,
            left,
            right,
        });
        copies.push(g);
    }
    Ok(Development {
        word: word.to_vec(),
        copies,
        portals,
    })
}

pub fn edge_reflections(poly: &LabeledPolygon) -> Result<Vec<Isometry2>> {
    (0..poly.len())
        .map(|e| {
            let (a, b) = poly.edge(e);
            reflect_across_segment(a, b)
        })
        .collect()
}

/// A directed line: a point on it and a direction angle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Line {
    pub point: Point2,
    pub angle: f64,
}

impl Line {
    pub fn direction(&self) -> Point2 {
        Point2::from_angle(self.angle)
    }

    /// Signed distance of `p` to the left of the line.
    pub fn side(&self, p: Point2) -> f64 {
        self.direction().cross(p - self.point)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Frame {
    origin: Point2,
    phi: f64,
    cos: f64,
    sin: f64,
}

impl Frame {
    fn new(origin: Point2, phi: f64) -> Self {
        let (sin, cos) = phi.sin_cos();
        Frame {
            origin,
            phi,
            cos,
            sin,
        }
    }

    fn to_local(&self, p: Point2) -> Point2 {
        let q = p - self.origin;
        Point2::new(self.cos * q.x + self.sin * q.y, -self.sin * q.x + self.cos * q.y)
    }

    fn to_world(&self, q: Point2) -> Point2 {
        Point2::new(self.cos * q.x - self.sin * q.y, self.sin * q.x + self.cos * q.y) + self.origin
    }

    fn line(&self, a: f64, b: f64) -> Line {
        Line {
            point: self.to_world(Point2::new(0.0, b)),
            angle: wrap_angle(self.phi + a.atan()),
        }
    }
}

/// A point that must lie strictly left (`above`) or right of the line.
#[derive(Clone, Copy, Debug, PartialEq)]
struct SideConstraint {
    p: Point2,
    above: bool,
}

#[derive(Clone, Copy, Debug)]
struct LpOptimum {
    a: f64,
    b: f64,
    /// Perpendicular clearance of the best line.
    margin: f64,
}

/// Maximizes the vertical gap between the lowest "above" point and the
/// highest "below" point over slopes in `[-1, 1]`.
fn maximize_gap(above: &[Point2], below: &[Point2]) -> LpOptimum {
    let upper = |a: f64| -> (f64, f64) {
        let mut m = f64::INFINITY;
        let mut x = 0.0;
        for p in above {
            let v = p.y - a * p.x;
            if v < m {
                m = v;
                x = p.x;
            }
        }
        (m, x)
    };
    let lower = |a: f64| -> (f64, f64) {
        let mut m = f64::NEG_INFINITY;
        let mut x = 0.0;
        for p in below {
            let v = p.y - a * p.x;
            if v > m {
                m = v;
                x = p.x;
            }
        }
        (m, x)
    };
    let slope = |a: f64| -> f64 {
        let (_, xu) = upper(a);
        let (_, xl) = lower(a);
        xl - xu
    };
    // the maximizers form an interval [a_left, a_right]; take its midpoint
    let a_left = if slope(-1.0) <= 0.0 {
        -1.0
    } else {
        let (mut lo, mut hi) = (-1.0f64, 1.0f64);
        for _ in 0..64 {
            let mid = 0.5 * (lo + hi);
            if slope(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    };
    let a_right = if slope(1.0) >= 0.0 {
        1.0
    } else {
        let (mut lo, mut hi) = (-1.0f64, 1.0f64);
        for _ in 0..64 {
            let mid = 0.5 * (lo + hi);
            if slope(mid) >= 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    };
    let a = if a_left <= a_right {
        0.5 * (a_left + a_right)
    } else {
        0.5 * (a_left + a_right).clamp(-2.0, 2.0)
    };
    let (u, _) = upper(a);
    let (l, _) = lower(a);
    LpOptimum {
        a,
        b: 0.5 * (u + l),
        margin: 0.5 * (u - l) / (1.0 + a * a).sqrt(),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Corridor {
    pub word: Vec<usize>,
    pub feasible: bool,
    /// The best line was found but touches a vertex within tolerance.
    pub boundary_tight: bool,
    pub witness: Option<Line>,
    /// Perpendicular clearance of the witness from the nearest constraint point.
    pub margin: f64,
    pub width: f64,
    pub angle_interval: Option<(f64, f64)>,
    #[serde(skip)]
    region: Option<Region>,
}

/// Feasible `(a, b)` polygon in the witness frame.
#[derive(Clone, Debug)]
struct Region {
    frame: Frame,
    polygon: Vec<Point2>,
}

impl Corridor {
    /// Width below [`WIDTH_FLOOR_REL`] of the diameter.
    pub fn is_marginal(&self, diameter: f64) -> bool {
        self.feasible && self.width < WIDTH_FLOOR_REL * diameter
    }

    /// Lines drawn uniformly from the feasible parameter region.
    pub fn sample_lines<R: Rng>(&self, count: usize, rng: &mut R) -> Vec<Line> {
        let region = match &self.region {
            Some(r) if r.polygon.len() >= 3 => r,
            _ => return self.witness.into_iter().cycle().take(count).collect(),
        };
        let poly = &region.polygon;
        let mut tris = Vec::new();
        let mut total = 0.0;
        for i in 1..poly.len() - 1 {
            let area = 0.5 * (poly[i] - poly[0]).cross(poly[i + 1] - poly[0]).abs();
            total += area;
            tris.push((i, total));
        }
        (0..count)
            .map(|_| {
                let pick = rng.gen::<f64>() * total;
                let i = tris.iter().find(|t| t.1 >= pick).map_or(tris[tris.len() - 1].0, |t| t.0);
                let (mut u, mut v) = (rng.gen::<f64>(), rng.gen::<f64>());
                if u + v > 1.0 {
                    u = 1.0 - u;
                    v = 1.0 - v;
                }
                let p = poly[0] + (poly[i] - poly[0]) * u + (poly[i + 1] - poly[0]) * v;
                region.frame.line(p.x, p.y)
            })
            .collect()
    }
}

/// Decides corridor feasibility for developments of one table.
#[derive(Clone, Debug)]
pub struct CorridorSolver<'a> {
    poly: &'a LabeledPolygon,
    convex: bool,
    reflex: Vec<bool>,
    diameter: f64,
    tight: f64,
}

impl<'a> CorridorSolver<'a> {
    pub fn new(poly: &'a LabeledPolygon) -> Self {
        let diameter = poly.diameter();
        CorridorSolver {
            poly,
            convex: poly.is_strictly_convex(),
            reflex: (0..poly.len()).map(|i| poly.is_reflex(i)).collect(),
            diameter,
            tight: TIGHT_REL * diameter,
        }
    }

    pub fn poly(&self) -> &LabeledPolygon {
        self.poly
    }

    fn base_frames(&self, dev: &Development) -> [Frame; 4] {
        let p0 = &dev.portals[0];
        let origin = p0.midpoint();
        let last = dev.portals[dev.portals.len() - 1].midpoint();
        let chord = last - origin;
        let phi = if chord.norm() > 1e-9 * self.diameter {
            chord.angle()
        } else {
            let v = p0.left - p0.right;
            Point2::new(v.y, -v.x).angle()
        };
        [0.0, FRAC_PI_2, PI, 3.0 * FRAC_PI_2].map(|k| Frame::new(origin, phi + k))
    }

    fn portal_constraints(dev: &Development) -> Vec<SideConstraint> {
        dev.portals
            .iter()
            .flat_map(|p| {
                [
                    SideConstraint {
                        p: p.left,
                        above: true,
                    },
                    SideConstraint {
                        p: p.right,
                        above: false,
                    },
                ]
            })
            .collect()
    }

    fn solve_frame(frame: &Frame, cons: &[SideConstraint]) -> LpOptimum {
        let mut above = Vec::with_capacity(cons.len());
        let mut below = Vec::with_capacity(cons.len());
        for c in cons {
            let q = frame.to_local(c.p);
            if c.above {
                above.push(q);
            } else {
                below.push(q);
            }
        }
        maximize_gap(&above, &below)
    }

    /// Checks that the line stays inside every intermediate copy; returns the
    /// reflex vertices it wrongly passes, or `Err(())` when no cut applies.
    fn containment_cuts(
        &self,
        dev: &Development,
        line: &Line,
    ) -> std::result::Result<Vec<SideConstraint>, ()> {
        let poly = self.poly;
        let n = poly.len();
        let d = line.direction();
        let crossing = |p: &Portal| -> (f64, Point2) {
            // intersection of the line with the portal segment
            let r = p.right;
            let v = p.left - p.right;
            let denom = d.cross(v);
            let s = (line.point - r).cross(d) / -denom;
            let x = r + v * s;
            ((x - line.point).dot(d), x)
        };
        let mut cuts = Vec::new();
        for j in 1..dev.portals.len() {
            let (t0, x0) = crossing(&dev.portals[j - 1]);
            let (t1, x1) = crossing(&dev.portals[j]);
            if t1 <= t0 {
                return Err(());
            }
            let g = &dev.copies[j];
            let entry = dev.word[j - 1];
            let exit = dev.word[j];
            let mut blocked = false;
            for e in 0..n {
                if e == entry || e == exit {
                    continue;
                }
                let (a, b) = poly.edge(e);
                let (a, b) = (g.apply(a), g.apply(b));
                if segments_cross(x0, x1, a, b)
                    || point_segment_distance(a, x0, x1) <= self.tight
                    || point_segment_distance(b, x0, x1) <= self.tight
                {
                    blocked = true;
                    break;
                }
            }
            if !blocked {
                continue;
            }
            // boundary chains between the portals; see the orientation rule in develop
            let left_chain: Vec<usize> = if g.det() > 0.0 {
                cyclic_range(exit + 1, entry, n)
            } else {
                cyclic_range(entry + 1, exit, n)
            };
            let right_chain: Vec<usize> = if g.det() > 0.0 {
                cyclic_range(entry + 1, exit, n)
            } else {
                cyclic_range(exit + 1, entry, n)
            };
            let mut found = false;
            for (chain, above) in [(&left_chain, true), (&right_chain, false)] {
                for &v in chain.iter() {
                    if !self.reflex[v] {
                        continue;
                    }
                    let p = g.apply(poly.vertex(v));
                    let t = (p - line.point).dot(d);
                    if t <= t0 || t >= t1 {
                        continue;
                    }
                    let side = line.side(p);
                    let wrong = if above { side <= self.tight } else { side >= -self.tight };
                    if wrong {
                        cuts.push(SideConstraint { p, above });
                        found = true;
                    }
                }
            }
            if !found {
                return Err(());
            }
        }
        Ok(cuts)
    }

    /// Best line in one frame, with containment cuts for non-convex tables.
    fn solve_in_frame(
        &self,
        dev: &Development,
        frame: &Frame,
        cons: &mut Vec<SideConstraint>,
    ) -> Option<LpOptimum> {
        let max_rounds = if self.convex {
            1
        } else {
            1 + self.reflex.iter().filter(|&&r| r).count() * dev.portals.len()
        };
        for _ in 0..max_rounds {
            let opt = Self::solve_frame(frame, cons);
            if opt.margin <= self.tight || self.convex {
                return Some(opt);
            }
            let line = frame.line(opt.a, opt.b);
            match self.containment_cuts(dev, &line) {
                Ok(cuts) if cuts.is_empty() => return Some(opt),
                Ok(cuts) => {
                    let before = cons.len();
                    for c in cuts {
                        if !cons.contains(&c) {
                            cons.push(c);
                        }
                    }
                    if cons.len() == before {
                        return None;
                    }
                }
                Err(()) => return None,
            }
        }
        None
    }

    /// Feasibility only; cheaper than [`CorridorSolver::corridor`].
    pub fn is_feasible(&self, dev: &Development) -> bool {
        self.best(dev, true).is_some_and(|(_, opt, _)| opt.margin > self.tight)
    }

    /// Perpendicular clearance of the best line, or a non-positive value.
    pub fn margin(&self, dev: &Development) -> f64 {
        self.best(dev, false).map_or(f64::NEG_INFINITY, |(_, opt, _)| opt.margin)
    }

    fn best(&self, dev: &Development, early: bool) -> Option<(Frame, LpOptimum, Vec<SideConstraint>)> {
        if dev.portals.is_empty() {
            return None;
        }
        let mut cons = Self::portal_constraints(dev);
        let mut best: Option<(Frame, LpOptimum)> = None;
        for frame in self.base_frames(dev) {
            if let Some(opt) = self.solve_in_frame(dev, &frame, &mut cons) {
                if best.is_none_or(|(_, b)| opt.margin > b.margin) {
                    best = Some((frame, opt));
                }
                if early && opt.margin > self.tight {
                    break;
                }
            }
        }
        best.map(|(f, o)| (f, o, cons))
    }

    pub fn corridor(&self, dev: &Development) -> Result<Corridor> {
        let infeasible = |tight: bool| Corridor {
            word: dev.word.clone(),
            feasible: false,
            boundary_tight: tight,
            witness: None,
            margin: 0.0,
            width: 0.0,
            angle_interval: None,
            region: None,
        };
        if dev.portals.is_empty() {
            return Err(Error::EmptyWord);
        }
        let Some((frame, opt, cons)) = self.best(dev, false) else {
            return Ok(infeasible(false));
        };
        if !opt.margin.is_finite() {
            return Err(Error::Solver {
                word: self.poly.format_word(&dev.word),
                reason: "non-finite margin".into(),
            });
        }
        if opt.margin <= self.tight {
            return Ok(infeasible(opt.margin > -self.tight));
        }
        let polygon = feasible_polygon(&frame, &cons);
        let line = frame.line(opt.a, opt.b);
        let witness = Line {
            point: portal_crossing(&dev.portals[0], &line),
            angle: line.angle,
        };
        let d = witness.direction();
        let mut width = f64::INFINITY;
        for p in &dev.portals {
            let (x_r, x_l) = (frame.to_local(p.right), frame.to_local(p.left));
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for q in &polygon {
                let (a, b) = (q.x, q.y);
                let s = (a * x_r.x + b - x_r.y) / ((x_l.y - x_r.y) - a * (x_l.x - x_r.x));
                lo = lo.min(s);
                hi = hi.max(s);
            }
            let v = p.left - p.right;
            let proj = (hi.min(1.0) - lo.max(0.0)).max(0.0) * v.norm() * v.normalized().cross(d).abs();
            width = width.min(proj);
        }
        let (mut amin, mut amax) = (f64::INFINITY, f64::NEG_INFINITY);
        for q in &polygon {
            amin = amin.min(q.x.atan());
            amax = amax.max(q.x.atan());
        }
        let lo = wrap_angle(frame.phi + amin);
        Ok(Corridor {
            word: dev.word.clone(),
            feasible: true,
            boundary_tight: false,
            witness: Some(witness),
            margin: opt.margin,
            width,
            angle_interval: Some((lo, lo + (amax - amin))),
            region: Some(Region { frame, polygon }),
        })
    }
}

fn cyclic_range(from: usize, to: usize, n: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut i = from % n;
    loop {
        out.push(i);
        if i == to % n {
            break;
        }
        i = (i + 1) % n;
    }
    out
}

fn portal_crossing(p: &Portal, line: &Line) -> Point2 {
    let d = line.direction();
    let v = p.left - p.right;
    let s = (p.right - line.point).cross(d) / d.cross(v);
    p.right + v * s
}

/// Clips a large `(a, b)` box by every side constraint.
fn feasible_polygon(frame: &Frame, cons: &[SideConstraint]) -> Vec<Point2> {
    const A_MAX: f64 = 50.0;
    let local: Vec<(Point2, bool)> = cons.iter().map(|c| (frame.to_local(c.p), c.above)).collect();
    let extent = local
        .iter()
        .fold(1.0f64, |m, (p, _)| m.max(p.x.abs()).max(p.y.abs()));
    let b_max = extent * (1.0 + A_MAX) * 2.0;
    let mut poly = vec![
        Point2::new(-A_MAX, -b_max),
        Point2::new(A_MAX, -b_max),
        Point2::new(A_MAX, b_max),
        Point2::new(-A_MAX, b_max),
    ];
    for (p, above) in local {
        // above: b <= y - a x, i.e. f(a, b) = y - a x - b >= 0
        let sign = if above { 1.0 } else { -1.0 };
        let f = |q: Point2| sign * (p.y - q.x * p.x - q.y);
        poly = clip(&poly, f);
        if poly.is_empty() {
            break;
        }
    }
    poly
}

fn clip(poly: &[Point2], f: impl Fn(Point2) -> f64) -> Vec<Point2> {
    let mut out = Vec::with_capacity(poly.len() + 1);
    for i in 0..poly.len() {
        let p = poly[i];
        let q = poly[(i + 1) % poly.len()];
        let (fp, fq) = (f(p), f(q));
        if fp >= 0.0 {
            out.push(p);
        }
        if (fp >= 0.0) != (fq >= 0.0) {
            let t = fp / (fp - fq);
            out.push(p + (q - p) * t);
        }
    }
    out
}

pub fn corridor(poly: &LabeledPolygon, dev: &Development) -> Result<Corridor> {
    CorridorSolver::new(poly).corridor(dev)
}

pub fn corridor_width(poly: &LabeledPolygon, dev: &Development) -> Result<f64> {
    let c = corridor(poly, dev)?;
    if !c.feasible {
        return Err(Error::Infeasible(poly.format_word(&dev.word)));
    }
    Ok(c.width)
}

pub fn is_realizable(poly: &LabeledPolygon, word: &[usize]) -> Result<bool> {
    if word.is_empty() {
        return Ok(true);
    }
    let dev = develop(poly, word)?;
    Ok(CorridorSolver::new(poly).is_feasible(&dev))
}

/// Largest angle between two realizing directions of a word whose
/// realizations all translate by at least `d_min`.
pub fn direction_bound(poly: &LabeledPolygon, d_min: f64) -> Result<f64> {
    if !(d_min > 0.0) {
        return Err(Error::Precondition(format!("d_min must be positive, got {d_min}")));
    }
    Ok((2.0 * poly.diameter() / d_min).atan())
}

/// A start state in the original table that follows the witness line.
pub fn witness_start(corridor: &Corridor, dev: &Development) -> Option<(Point2, f64)> {
    let w = corridor.witness?;
    let p0 = &dev.portals[0];
    let back = (0.25 * corridor.margin).min(1e-3 * p0.left.dist(p0.right));
    Some((w.point - w.direction() * back, w.angle))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

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

    fn w(p: &LabeledPolygon, s: &str) -> Vec<usize> {
        p.parse_word_str(s).unwrap()
    }

    #[test]
    fn copies_alternate_orientation() {
        let s = square();
        let d = develop(&s, &w(&s, "B,D,B,A")).unwrap();
        for (j, g) in d.copies.iter().enumerate() {
            let expect = if j % 2 == 0 { 1.0 } else { -1.0 };
            assert_abs_diff_eq!(g.det(), expect, epsilon = 1e-12);
        }
    }

    #[test]
    fn double_reflection_translates() {
        let s = square();
        let d = develop(&s, &w(&s, "B,D")).unwrap();
        let g = d.copies[2];
        assert!(g.apply(Point2::new(0.3, 0.4)).dist(Point2::new(2.3, 0.4)) < 1e-12);
    }

    #[test]
    fn square_words() {
        let s = square();
        assert!(is_realizable(&s, &w(&s, "A,B")).unwrap());
        assert!(is_realizable(&s, &w(&s, "A,C")).unwrap());
        assert!(!is_realizable(&s, &w(&s, "A,B,A")).unwrap());
        assert!(!is_realizable(&s, &w(&s, "A,B,A,B")).unwrap());
    }

    #[test]
    fn repeated_letter_is_infeasible_via_bypass() {
        let s = square();
        let d = develop_unchecked(&s, &[0, 0]).unwrap();
        assert!(!corridor(&s, &d).unwrap().feasible);
        assert!(develop(&s, &[0, 0]).is_err());
    }

    #[test]
    fn rhombus_admits_aba() {
        let r = rhombus();
        let d = develop(&r, &w(&r, "A,B,A")).unwrap();
        let c = corridor(&r, &d).unwrap();
        assert!(c.feasible);
    }

    #[test]
    fn width_of_single_edge_and_horizontal_corridor() {
        let s = square();
        let d = develop(&s, &w(&s, "B")).unwrap();
        assert_abs_diff_eq!(corridor_width(&s, &d).unwrap(), 1.0, epsilon = 1e-9);
        let d = develop(&s, &w(&s, "B,D,B,D,B,D")).unwrap();
        let c = corridor(&s, &d).unwrap();
        assert_abs_diff_eq!(c.width, 1.0, epsilon = 1e-9);
        let wit = c.witness.unwrap();
        assert_abs_diff_eq!(wit.angle, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(wit.point.y, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn direction_bound_formula() {
        let s = square();
        let b = direction_bound(&s, 100.0).unwrap();
        assert_abs_diff_eq!(b, (2.0 * 2f64.sqrt() / 100.0).atan(), epsilon = 1e-15);
        assert!(direction_bound(&s, 0.0).is_err());
    }

    #[test]
    fn l_shape_blocks_across_reflex_corner() {
        // edges: E1 bottom, E2 right lower, E3 inner horizontal, E4 inner vertical,
        // E5 top, E6 left
        let l = LabeledPolygon::with_default_labels(vec![
            Point2::new(0.0, 0.0),
            Point2::new(2.0, 0.0),
            Point2::new(2.0, 1.0),
            Point2::new(1.0, 1.0),
            Point2::new(1.0, 2.0),
            Point2::new(0.0, 2.0),
        ])
        .unwrap();
        // the right edge of the lower arm cannot see the top of the upper arm
        assert!(!is_realizable(&l, &w(&l, "E2,E5")).unwrap());
        assert!(is_realizable(&l, &w(&l, "E2,E6")).unwrap());
        assert!(is_realizable(&l, &w(&l, "E3,E1")).unwrap());
    }
}
