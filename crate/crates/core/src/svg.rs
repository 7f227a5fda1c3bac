//! Minimal SVG figures: tables, trajectories and developments on a fixed
//! 1000×1000 canvas with the y-axis pointing up.

use std::fmt::Write as _;

use crate::geometry::{LabeledPolygon, Point2};

pub const CANVAS: f64 = 1000.0;
pub const MARGIN: f64 = 0.05;

#[derive(Clone, Debug)]
enum Shape {
    Polygon { points: Vec<Point2>, stroke: String, fill: String, width: f64 },
    Polyline { points: Vec<Point2>, stroke: String, width: f64 },
    Dot { at: Point2, radius: f64, fill: String },
    Text { at: Point2, text: String, size: f64 },
}

/// Collects shapes in world coordinates and fits them to the canvas on render.
#[derive(Clone, Debug, Default)]
pub struct Figure {
    shapes: Vec<Shape>,
    /// Points that take part in the fit but are not drawn.
    extent: Vec<Point2>,
}

impl Figure {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn polygon(&mut self, points: &[Point2], stroke: &str, fill: &str, width: f64) -> &mut Self {
        self.shapes.push(Shape::Polygon {
            points: points.to_vec(),
            stroke: stroke.into(),
            fill: fill.into(),
            width,
        });
        self
    }

    pub fn polyline(&mut self, points: &[Point2], stroke: &str, width: f64) -> &mut Self {
        self.shapes.push(Shape::Polyline {
            points: points.to_vec(),
            stroke: stroke.into(),
            width,
        });
        self
    }

    pub fn dot(&mut self, at: Point2, radius: f64, fill: &str) -> &mut Self {
        self.shapes.push(Shape::Dot {
            at,
            radius,
            fill: fill.into(),
        });
        self
    }

    pub fn text(&mut self, at: Point2, text: &str, size: f64) -> &mut Self {
        self.shapes.push(Shape::Text {
            at,
            text: text.into(),
            size,
        });
        self
    }

    /// The table outline with each label at its edge midpoint.
    pub fn table(&mut self, poly: &LabeledPolygon, stroke: &str, fill: &str) -> &mut Self {
        self.polygon(poly.vertices(), stroke, fill, 2.0);
        for e in 0..poly.len() {
            let (a, b) = poly.edge(e);
            self.text((a + b) * 0.5, poly.label(e).as_str(), 18.0);
        }
        self
    }

    /// Widens the fitted region without drawing anything.
    pub fn include(&mut self, points: &[Point2]) -> &mut Self {
        self.extent.extend_from_slice(points);
        self
    }

    fn bounds(&self) -> Option<(Point2, Point2)> {
        let mut pts = self.extent.clone();
        for s in &self.shapes {
            match s {
                Shape::Polygon { points, .. } | Shape::Polyline { points, .. } => pts.extend_from_slice(points),
                Shape::Dot { at, .. } | Shape::Text { at, .. } => pts.push(*at),
            }
        }
        let mut it = pts.into_iter().filter(|p| p.is_finite());
        let first = it.next()?;
        Some(it.fold((first, first), |(lo, hi), p| {
            (
                Point2::new(lo.x.min(p.x), lo.y.min(p.y)),
                Point2::new(hi.x.max(p.x), hi.y.max(p.y)),
            )
        }))
    }

    pub fn render(&self) -> String {
        let (lo, hi) = self.bounds().unwrap_or((Point2::new(0.0, 0.0), Point2::new(1.0, 1.0)));
        let span = (hi.x - lo.x).max(hi.y - lo.y).max(1e-12);
        let inner = CANVAS * (1.0 - 2.0 * MARGIN);
        let s = inner / span;
        // centre the drawing inside the margin
        let ox = CANVAS * MARGIN + 0.5 * (inner - s * (hi.x - lo.x));
        let oy = CANVAS * MARGIN + 0.5 * (inner - s * (hi.y - lo.y));
        let map = |p: Point2| (ox + s * (p.x - lo.x), CANVAS - (oy + s * (p.y - lo.y)));
        let pts = |ps: &[Point2]| {
            ps.iter()
                .map(|&p| {
                    let (x, y) = map(p);
                    format!("{x:.3},{y:.3}")
                })
                .collect::<Vec<_>>()
                .join(" ")
        };
        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{c}" height="{c}" viewBox="0 0 {c} {c}">"#,
            c = CANVAS
        );
        let _ = writeln!(out, r#"<rect width="{c}" height="{c}" fill="white"/>"#, c = CANVAS);
        for shape in &self.shapes {
            match shape {
                Shape::Polygon { points, stroke, fill, width } => {
                    let _ = writeln!(
                        out,
                        r#"<polygon points="{}" stroke="{stroke}" fill="{fill}" stroke-width="{width}"/>"#,
                        pts(points)
                    );
                }
                Shape::Polyline { points, stroke, width } => {
                    let _ = writeln!(
                        out,
                        r#"<polyline points="{}" stroke="{stroke}" fill="none" stroke-width="{width}"/>"#,
                        pts(points)
                    );
                }
                Shape::Dot { at, radius, fill } => {
                    let (x, y) = map(*at);
                    let _ = writeln!(out, r#"<circle cx="{x:.3}" cy="{y:.3}" r="{radius}" fill="{fill}"/>"#);
                }
                Shape::Text { at, text, size } => {
                    let (x, y) = map(*at);
                    let _ = writeln!(
                        out,
                        r#"<text x="{x:.3}" y="{y:.3}" font-size="{size}" text-anchor="middle">{}</text>"#,
                        escape(text)
                    );
                }
            }
        }
        out.push_str("</svg>\n");
        out
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fits_inside_margin() {
        let sq = LabeledPolygon::from_coords(
            &[(0.0, 0.0), (2.0, 0.0), (2.0, 2.0), (0.0, 2.0)],
            &["A", "B", "C", "D"],
        )
        .unwrap();
        let svg = Figure::new().table(&sq, "black", "none").render();
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains(r#"points="50.000,950.000 950.000,950.000 950.000,50.000 50.000,50.000""#));
        assert!(svg.contains(">A</text>"));
    }
}
