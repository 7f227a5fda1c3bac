//! Billiard flow on a labeled table: ray stepping, optical reflection and
//! bounce-word extraction.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{point_segment_distance, reflect_across_segment, wrap_angle, Isometry2, LabeledPolygon, Point2};

/// Default singularity radius, relative to the table diameter.
pub const EPS_VERTEX_REL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RayState {
    pub position: Point2,
    /// Direction in radians, counterclockwise from the positive x-axis.
    pub angle: f64,
}

impl RayState {
    pub fn new(position: Point2, angle: f64) -> Self {
        RayState { position, angle }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StepEvent {
    Hit { edge: usize, point: Point2 },
    Singular { vertex: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Terminal {
    Completed { bounces: usize },
    Singular { vertex: usize, bounces: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceResult {
    pub word: Vec<usize>,
    pub terminal: Terminal,
    pub impact_points: Vec<Point2>,
}

impl TraceResult {
    pub fn is_singular(&self) -> bool {
        matches!(self.terminal, Terminal::Singular { .. })
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Tracer<'a> {
    poly: &'a LabeledPolygon,
    eps_vertex: f64,
    t_min: f64,
}

impl<'a> Tracer<'a> {
    pub fn new(poly: &'a LabeledPolygon) -> Self {
        Self::with_eps(poly, EPS_VERTEX_REL)
    }

    /// `eps_rel` is the singularity radius as a fraction of the diameter.
    pub fn with_eps(poly: &'a LabeledPolygon, eps_rel: f64) -> Self {
        let d = poly.diameter();
        Tracer {
            poly,
            eps_vertex: eps_rel * d,
            t_min: 1e-12 * d,
        }
    }

    /// First boundary event along the ray from `p` in direction `dir`,
    /// ignoring `skip` (the edge the ray is leaving).
    fn step_dir(&self, p: Point2, dir: Point2, skip: Option<usize>) -> Result<(StepEvent, f64)> {
        let poly = self.poly;
        let n = poly.len();
        let mut best: Option<(usize, f64)> = None;
        for e in 0..n {
            if Some(e) == skip {
                continue;
            }
            let (a, b) = poly.edge(e);
            let ab = b - a;
            let denom = dir.cross(ab);
            if denom.abs() <= 1e-15 * ab.norm() {
                continue;
            }
            let ap = a - p;
            let t = ap.cross(ab) / denom;
            let s = ap.cross(dir) / denom;
            if t > self.t_min && (-1e-12..=1.0 + 1e-12).contains(&s) && best.is_none_or(|(_, bt)| t < bt) {
                best = Some((e, t));
            }
        }
        let (edge, t) = best.ok_or(Error::Escaped { x: p.x, y: p.y })?;
        let q = p + dir * t;
        // any vertex within the singular radius of the swept segment stops the flow
        let mut near: Option<(usize, f64)> = None;
        for v in 0..n {
            let pos = poly.vertex(v);
            if point_segment_distance(pos, p, q) < self.eps_vertex {
                let along = (pos - p).dot(dir);
                if along > self.t_min && near.is_none_or(|(_, s)| along < s) {
                    near = Some((v, along));
                }
            }
        }
        if let Some((vertex, along)) = near {
            return Ok((StepEvent::Singular { vertex }, along));
        }
        let (a, b) = poly.edge(edge);
        let u = (b - a).normalized();
        if dir.cross(u).abs() < 1e-12 {
            let vertex = if q.dist(a) < q.dist(b) { edge } else { (edge + 1) % n };
            return Ok((StepEvent::Singular { vertex }, t));
        }
        Ok((StepEvent::Hit { edge, point: q }, t))
    }

    pub fn step(&self, state: RayState) -> Result<StepEvent> {
        let skip = self.boundary_edge(state.position);
        self.step_dir(state.position, Point2::from_angle(state.angle), skip)
            .map(|(e, _)| e)
    }

    fn boundary_edge(&self, p: Point2) -> Option<usize> {
        (0..self.poly.len()).find(|&e| {
            let (a, b) = self.poly.edge(e);
            point_segment_distance(p, a, b) <= self.t_min.max(1e-12)
        })
    }

    /// Follows the flow for up to `n_bounces` bounces. Impact points are taken
    /// from the straight unfolded line rather than from iterated reflections.
    pub fn trace(&self, p: Point2, theta: f64, n_bounces: usize) -> Result<TraceResult> {
        let d0 = Point2::from_angle(theta);
        let mut start_edge = self.boundary_edge(p);
        if let Some(e) = start_edge {
            let (a, b) = self.poly.edge(e);
            // interior lies to the left of a counterclockwise edge
            if (b - a).cross(d0) <= 0.0 {
                return Err(Error::Precondition(format!(
                    "direction {theta} does not point into the table from edge {}",
                    self.poly.label(e)
                )));
            }
        } else if !self.poly.contains_point(p, 0.0) {
            return Err(Error::Precondition(format!(
                "start point ({}, {}) is outside the table",
                p.x, p.y
            )));
        }
        let mut g = Isometry2::IDENTITY;
        let mut t_acc = 0.0;
        let mut word = Vec::with_capacity(n_bounces);
        let mut impacts = Vec::with_capacity(n_bounces);
        let reflections: Vec<Isometry2> = (0..self.poly.len())
            .map(|e| {
                let (a, b) = self.poly.edge(e);
                reflect_across_segment(a, b)
            })
            .collect::<Result<_>>()?;
        while word.len() < n_bounces {
            let ginv = g.inverse();
            let pos = ginv.apply(p + d0 * t_acc);
            let dir = ginv.linear(d0);
            let (event, t) = self.step_dir(pos, dir, start_edge)?;
            match event {
                StepEvent::Singular { vertex } => {
                    return Ok(TraceResult {
                        terminal: Terminal::Singular {
                            vertex,
                            bounces: word.len(),
                        },
                        word,
                        impact_points: impacts,
                    })
                }
                StepEvent::Hit { edge, .. } => {
                    t_acc += t;
                    let q = ginv.apply(p + d0 * t_acc);
                    word.push(edge);
                    impacts.push(q);
                    g = g.compose(&reflections[edge]);
                    start_edge = Some(edge);
                }
            }
        }
        Ok(TraceResult {
            terminal: Terminal::Completed {
                bounces: word.len(),
            },
            word,
            impact_points: impacts,
        })
    }
}

pub fn step(poly: &LabeledPolygon, state: RayState) -> Result<StepEvent> {
    Tracer::new(poly).step(state)
}

pub fn trace(poly: &LabeledPolygon, p: Point2, theta: f64, n_bounces: usize) -> Result<TraceResult> {
    Tracer::new(poly).trace(p, theta, n_bounces)
}

/// Outgoing direction after an optical bounce off the segment `[a, b]`.
pub fn reflect_direction(theta_in: f64, a: Point2, b: Point2) -> Result<f64> {
    let r = reflect_across_segment(a, b)?;
    let d = Point2::from_angle(theta_in);
    let u = (b - a).normalized();
    if d.cross(u).abs() < 1e-12 {
        return Err(Error::ParallelRay);
    }
    Ok(wrap_angle(r.linear(d).angle()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn square() -> LabeledPolygon {
        LabeledPolygon::from_coords(
            &[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)],
            &["A", "B", "C", "D"],
        )
        .unwrap()
    }

    #[test]
    fn step_from_center() {
        let s = square();
        match step(&s, RayState::new(Point2::new(0.5, 0.5), 0.0)).unwrap() {
            StepEvent::Hit { edge, point } => {
                assert_eq!(s.label(edge).as_str(), "B");
                assert!(point.dist(Point2::new(1.0, 0.5)) < 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(
            step(&s, RayState::new(Point2::new(0.5, 0.5), PI / 4.0)).unwrap(),
            StepEvent::Singular { vertex: 2 }
        );
        match step(&s, RayState::new(Point2::new(0.25, 0.0), PI / 2.0)).unwrap() {
            StepEvent::Hit { edge, point } => {
                assert_eq!(s.label(edge).as_str(), "C");
                assert!(point.dist(Point2::new(0.25, 1.0)) < 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn horizontal_bouncing() {
        let s = square();
        let r = trace(&s, Point2::new(0.5, 0.5), 0.0, 4).unwrap();
        assert_eq!(s.format_word(&r.word), "B,D,B,D");
        assert_eq!(r.terminal, Terminal::Completed { bounces: 4 });
        assert_eq!(r.impact_points.len(), 4);
    }

    #[test]
    fn perpendicular_reflection() {
        let th = reflect_direction(1.5 * PI, Point2::new(0.0, 0.0), Point2::new(1.0, 0.0)).unwrap();
        assert_abs_diff_eq!(th, PI / 2.0, epsilon = 1e-12);
        assert!(matches!(
            reflect_direction(0.0, Point2::new(0.0, 0.0), Point2::new(1.0, 0.0)),
            Err(Error::ParallelRay)
        ));
    }

    #[test]
    fn right_corner_reverses_direction() {
        // A along the x-axis, B along the y-axis: two bounces send v to -v
        let v = 1.1f64 + PI;
        let a = reflect_direction(v, Point2::new(0.0, 0.0), Point2::new(1.0, 0.0)).unwrap();
        let b = reflect_direction(a, Point2::new(0.0, 0.0), Point2::new(0.0, 1.0)).unwrap();
        assert_abs_diff_eq!(wrap_angle(b - v + PI), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn start_edge_is_not_emitted() {
        let s = square();
        let r = trace(&s, Point2::new(0.3, 0.0), PI / 2.0, 3).unwrap();
        assert_eq!(s.format_word(&r.word), "C,A,C");
    }

    #[test]
    fn outward_start_is_rejected() {
        let s = square();
        assert!(trace(&s, Point2::new(0.3, 0.0), -PI / 2.0, 3).is_err());
    }
}
