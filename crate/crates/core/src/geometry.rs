//! Planar polygon kernel: points, isometries, labeled tables and their invariants.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for incidence and degeneracy tests.
pub const EPS_GEOM: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn from_angle(theta: f64) -> Self {
        Point2::new(theta.cos(), theta.sin())
    }

    pub fn dot(self, o: Point2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 3d cross product.
    pub fn cross(self, o: Point2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, o: Point2) -> f64 {
        (self - o).norm()
    }

    pub fn normalized(self) -> Point2 {
        let n = self.norm();
        Point2::new(self.x / n, self.y / n)
    }

    /// Counterclockwise quarter turn.
    pub fn perp(self) -> Point2 {
        Point2::new(-self.y, self.x)
    }

    pub fn rotate(self, theta: f64) -> Point2 {
        let (s, c) = theta.sin_cos();
        Point2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, o: Point2) -> Point2 {
        Point2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, o: Point2) -> Point2 {
        Point2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, s: f64) -> Point2 {
        Point2::new(self.x * s, self.y * s)
    }
}

impl Neg for Point2 {
    type Output = Point2;
    fn neg(self) -> Point2 {
        Point2::new(-self.x, -self.y)
    }
}

/// Wraps an angle into `[0, 2π)`.
pub fn wrap_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(2.0 * PI);
    if t >= 2.0 * PI {
        0.0
    } else {
        t
    }
}

/// Distance from `p` to the closed segment `[a, b]`.
pub fn point_segment_distance(p: Point2, a: Point2, b: Point2) -> f64 {
    let ab = b - a;
    let len2 = ab.dot(ab);
    if len2 == 0.0 {
        return p.dist(a);
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    p.dist(a + ab * t)
}

/// Minimum distance between two closed segments.
pub fn segment_segment_distance(a: Point2, b: Point2, c: Point2, d: Point2) -> f64 {
    if segments_cross(a, b, c, d) {
        return 0.0;
    }
    point_segment_distance(a, c, d)
        .min(point_segment_distance(b, c, d))
        .min(point_segment_distance(c, a, b))
        .min(point_segment_distance(d, a, b))
}

/// Proper crossing test (interiors intersect at a single point).
pub fn segments_cross(a: Point2, b: Point2, c: Point2, d: Point2) -> bool {
    let d1 = (b - a).cross(c - a);
    let d2 = (b - a).cross(d - a);
    let d3 = (d - c).cross(a - c);
    let d4 = (d - c).cross(b - c);
    ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
}

/// Affine isometry `x ↦ M x + t` with `M` orthogonal.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Isometry2 {
    pub m: [[f64; 2]; 2],
    pub t: Point2,
}

impl Isometry2 {
    pub const IDENTITY: Isometry2 = Isometry2 {
        m: [[1.0, 0.0], [0.0, 1.0]],
        t: Point2::new(0.0, 0.0),
    };

    pub fn apply(&self, p: Point2) -> Point2 {
        self.linear(p) + self.t
    }

    pub fn linear(&self, v: Point2) -> Point2 {
        Point2::new(
            self.m[0][0] * v.x + self.m[0][1] * v.y,
            self.m[1][0] * v.x + self.m[1][1] * v.y,
        )
    }

    pub fn det(&self) -> f64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Isometry2) -> Isometry2 {
        let a = &self.m;
        let b = &other.m;
        let m = [
            [
                a[0][0] * b[0][0] + a[0][1] * b[1][0],
                a[0][0] * b[0][1] + a[0][1] * b[1][1],
            ],
            [
                a[1][0] * b[0][0] + a[1][1] * b[1][0],
                a[1][0] * b[0][1] + a[1][1] * b[1][1],
            ],
        ];
        Isometry2 {
            m,
            t: self.apply(other.t),
        }
    }

    pub fn inverse(&self) -> Isometry2 {
        // orthogonal: inverse is the transpose
        let m = [[self.m[0][0], self.m[1][0]], [self.m[0][1], self.m[1][1]]];
        let inv = Isometry2 {
            m,
            t: Point2::default(),
        };
        let t = -inv.linear(self.t);
        Isometry2 { m, t }
    }

    pub fn is_orthogonal(&self, tol: f64) -> bool {
        let c0 = Point2::new(self.m[0][0], self.m[1][0]);
        let c1 = Point2::new(self.m[0][1], self.m[1][1]);
        (c0.dot(c0) - 1.0).abs() <= tol
            && (c1.dot(c1) - 1.0).abs() <= tol
            && c0.dot(c1).abs() <= tol
            && (self.det().abs() - 1.0).abs() <= tol
    }
}

/// Reflection across the line through a non-degenerate segment.
pub fn reflect_across_segment(a: Point2, b: Point2) -> Result<Isometry2> {
    let d = b - a;
    let len = d.norm();
    if !(len > 0.0) || !len.is_finite() {
        return Err(Error::ZeroLengthSegment);
    }
    let u = d * (1.0 / len);
    let m = [
        [u.x * u.x - u.y * u.y, 2.0 * u.x * u.y],
        [2.0 * u.x * u.y, u.y * u.y - u.x * u.x],
    ];
    let lin = Isometry2 {
        m,
        t: Point2::default(),
    };
    Ok(Isometry2 {
        m,
        t: a - lin.linear(a),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EdgeLabel(pub String);

impl EdgeLabel {
    pub fn new(s: impl Into<String>) -> Self {
        EdgeLabel(s.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for EdgeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for EdgeLabel {
    fn from(s: &str) -> Self {
        EdgeLabel(s.to_string())
    }
}

/// A billiard table. Edge `i` joins `vertices[i]` to `vertices[(i + 1) % n]`
/// and carries `labels[i]`.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledPolygon {
    vertices: Vec<Point2>,
    labels: Vec<EdgeLabel>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    TooFewVertices(usize),
    LabelCountMismatch { vertices: usize, labels: usize },
    NonFinite(usize),
    DegenerateEdge(usize),
    StraightAngle(usize),
    SelfIntersection(usize, usize),
    DuplicateLabel(EdgeLabel),
    NotCounterclockwise,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::TooFewVertices(n) => write!(f, "needs at least 3 vertices, got {n}"),
            Violation::LabelCountMismatch { vertices, labels } => {
                write!(f, "{vertices} vertices but {labels} labels")
            }
            Violation::NonFinite(i) => write!(f, "vertex {i} has a non-finite coordinate"),
            Violation::DegenerateEdge(i) => write!(f, "edge {i} has zero length"),
            Violation::StraightAngle(i) => write!(f, "vertex {i} has a straight angle"),
            Violation::SelfIntersection(i, j) => write!(f, "edges {i} and {j} intersect"),
            Violation::DuplicateLabel(l) => write!(f, "duplicate label `{l}`"),
            Violation::NotCounterclockwise => write!(f, "vertices are not counterclockwise"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_valid() {
            return f.write_str("valid");
        }
        let parts: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        write!(f, "invalid: {}", parts.join("; "))
    }
}

fn signed_area(vs: &[Point2]) -> f64 {
    let n = vs.len();
    (0..n)
        .map(|i| vs[i].cross(vs[(i + 1) % n]))
        .sum::<f64>()
        * 0.5
}

fn default_labels(n: usize) -> Vec<EdgeLabel> {
    (1..=n).map(|i| EdgeLabel(format!("E{i}"))).collect()
}

impl LabeledPolygon {
    /// Builds a validated table. Clockwise input is reversed (labels follow
    /// their edges).
    pub fn new(vertices: Vec<Point2>, labels: Vec<EdgeLabel>) -> Result<Self> {
        Self::new_with_warnings(vertices, labels).map(|(p, _)| p)
    }

    /// Like [`LabeledPolygon::new`] but also returns warnings about repairs.
    pub fn new_with_warnings(
        vertices: Vec<Point2>,
        labels: Vec<EdgeLabel>,
    ) -> Result<(Self, Vec<String>)> {
        let mut warnings = Vec::new();
        let mut poly = LabeledPolygon { vertices, labels };
        if poly.vertices.len() >= 3
            && poly.vertices.len() == poly.labels.len()
            && signed_area(&poly.vertices) < 0.0
        {
            poly = poly.reversed();
            warnings.push("clockwise vertices reversed to counterclockwise".to_string());
        }
        let report = validate(&poly);
        if !report.is_valid() {
            return Err(Error::InvalidPolygon(report.to_string()));
        }
        Ok((poly, warnings))
    }

    /// Builds a table with labels `E1..En`.
    pub fn with_default_labels(vertices: Vec<Point2>) -> Result<Self> {
        let labels = default_labels(vertices.len());
        Self::new(vertices, labels)
    }

    /// Builds a table from `(x, y)` pairs and label strings.
    pub fn from_coords(coords: &[(f64, f64)], labels: &[&str]) -> Result<Self> {
        Self::new(
            coords.iter().map(|&(x, y)| Point2::new(x, y)).collect(),
            labels.iter().map(|&l| EdgeLabel::from(l)).collect(),
        )
    }

    /// Wraps raw data without any checks. Use [`validate`] before relying on it.
    pub fn new_unchecked(vertices: Vec<Point2>, labels: Vec<EdgeLabel>) -> Self {
        LabeledPolygon { vertices, labels }
    }

    fn reversed(&self) -> Self {
        let n = self.vertices.len();
        let vertices: Vec<Point2> = (0..n).map(|i| self.vertices[n - 1 - i]).collect();
        // new edge i joins old vertices n-1-i and n-2-i, i.e. old edge n-2-i
        let labels = (0..n)
            .map(|i| self.labels[(2 * n - 2 - i) % n].clone())
            .collect();
        LabeledPolygon { vertices, labels }
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn labels(&self) -> &[EdgeLabel] {
        &self.labels
    }

    pub fn vertex(&self, i: usize) -> Point2 {
        self.vertices[i % self.vertices.len()]
    }

    pub fn label(&self, edge: usize) -> &EdgeLabel {
        &self.labels[edge]
    }

    /// Endpoints of edge `i`.
    pub fn edge(&self, i: usize) -> (Point2, Point2) {
        (self.vertex(i), self.vertex(i + 1))
    }

    pub fn edge_length(&self, i: usize) -> f64 {
        let (a, b) = self.edge(i);
        a.dist(b)
    }

    pub fn label_index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l.0 == label)
    }

    /// Converts label strings to edge indices, rejecting unknown labels and
    /// immediate repeats.
    pub fn parse_word<S: AsRef<str>>(&self, letters: &[S]) -> Result<Vec<usize>> {
        let mut out = Vec::with_capacity(letters.len());
        for (pos, l) in letters.iter().enumerate() {
            let l = l.as_ref().trim();
            let idx = self
                .label_index(l)
                .ok_or_else(|| Error::UnknownLabel(l.to_string()))?;
            if out.last() == Some(&idx) {
                return Err(Error::RepeatedLetter {
                    label: l.to_string(),
                    position: pos,
                });
            }
            out.push(idx);
        }
        Ok(out)
    }

    /// Parses a comma separated word such as `B,A,D`.
    pub fn parse_word_str(&self, s: &str) -> Result<Vec<usize>> {
        let parts: Vec<&str> = s.split(',').filter(|p| !p.trim().is_empty()).collect();
        self.parse_word(&parts)
    }

    pub fn format_word(&self, word: &[usize]) -> String {
        word.iter()
            .map(|&i| self.labels[i].0.as_str())
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn signed_area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    pub fn interior_angles(&self) -> Vec<f64> {
        interior_angles(self)
    }

    pub fn interior_angle(&self, i: usize) -> f64 {
        let n = self.len();
        let prev = self.vertex(i + n - 1);
        let cur = self.vertex(i);
        let next = self.vertex(i + 1);
        let e_in = cur - prev;
        let e_out = next - cur;
        let turn = e_in.cross(e_out).atan2(e_in.dot(e_out));
        PI - turn
    }

    pub fn is_reflex(&self, i: usize) -> bool {
        self.interior_angle(i) > PI
    }

    pub fn is_strictly_convex(&self) -> bool {
        is_strictly_convex(self)
    }

    pub fn diameter(&self) -> f64 {
        diameter(self)
    }

    /// Index of the vertex shared by edges `a` and `b`, if they are adjacent.
    pub fn common_vertex(&self, a: usize, b: usize) -> Option<usize> {
        let n = self.len();
        if (a + 1) % n == b {
            Some(b)
        } else if (b + 1) % n == a {
            Some(a)
        } else {
            None
        }
    }

    /// Smallest of the edge lengths and vertex to non-incident edge distances.
    pub fn min_feature_size(&self) -> f64 {
        let n = self.len();
        let mut m = f64::INFINITY;
        for i in 0..n {
            m = m.min(self.edge_length(i));
            for j in 0..n {
                // vertex i lies on edges i-1 and i
                if j == i || (j + 1) % n == i {
                    continue;
                }
                let (a, b) = self.edge(j);
                m = m.min(point_segment_distance(self.vertices[i], a, b));
            }
        }
        m
    }

    /// Strict point-in-polygon test (boundary points excluded within `tol`).
    pub fn contains_point(&self, p: Point2, tol: f64) -> bool {
        let n = self.len();
        for i in 0..n {
            let (a, b) = self.edge(i);
            if point_segment_distance(p, a, b) <= tol {
                return false;
            }
        }
        let mut inside = false;
        for i in 0..n {
            let (a, b) = self.edge(i);
            if (a.y > p.y) != (b.y > p.y) {
                let x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
                if x > p.x {
                    inside = !inside;
                }
            }
        }
        inside
    }

    /// Image under an isometry. Orientation-reversing maps are re-oriented.
    pub fn transformed(&self, g: &Isometry2) -> Result<Self> {
        let vs = self.vertices.iter().map(|&v| g.apply(v)).collect();
        Self::new(vs, self.labels.clone())
    }

    /// Reads the JSON table format `{"vertices": [[x,y],...], "labels": [...]}`.
    pub fn from_json_str(s: &str) -> Result<(Self, Vec<String>)> {
        let file: PolygonFile = serde_json::from_str(s)?;
        file.into_polygon()
    }

    pub fn to_json_string(&self) -> String {
        let mut s = String::from("{\"vertices\": [");
        for (i, v) in self.vertices.iter().enumerate() {
            if i > 0 {
                s.push_str(", ");
            }
            s.push_str(&format!("[{}, {}]", fmt_f64(v.x), fmt_f64(v.y)));
        }
        s.push_str("], \"labels\": [");
        for (i, l) in self.labels.iter().enumerate() {
            if i > 0 {
                s.push_str(", ");
            }
            s.push_str(&serde_json::to_string(&l.0).expect("string serializes"));
        }
        s.push_str("]}");
        s
    }

    pub fn load(path: &std::path::Path) -> Result<(Self, Vec<String>)> {
        let s = std::fs::read_to_string(path)?;
        Self::from_json_str(&s)
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_json_string() + "\n")?;
        Ok(())
    }
}

/// Shortest decimal form that parses back to the same `f64` (at most 17
/// significant digits).
pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-4..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

#[derive(Deserialize)]
struct PolygonFile {
    vertices: Vec<[f64; 2]>,
    #[serde(default)]
    labels: Option<Vec<String>>,
}

impl PolygonFile {
    fn into_polygon(self) -> Result<(LabeledPolygon, Vec<String>)> {
        let vs: Vec<Point2> = self
            .vertices
            .iter()
            .map(|&[x, y]| Point2::new(x, y))
            .collect();
        let labels = match self.labels {
            Some(ls) => ls.into_iter().map(EdgeLabel).collect(),
            None => default_labels(vs.len()),
        };
        LabeledPolygon::new_with_warnings(vs, labels)
    }
}

/// Reports every violated table invariant.
pub fn validate(poly: &LabeledPolygon) -> ValidationReport {
    let mut violations = Vec::new();
    let n = poly.vertices.len();
    if n < 3 {
        violations.push(Violation::TooFewVertices(n));
    }
    if poly.labels.len() != n {
        violations.push(Violation::LabelCountMismatch {
            vertices: n,
            labels: poly.labels.len(),
        });
    }
    let mut seen = std::collections::BTreeSet::new();
    for l in &poly.labels {
        if !seen.insert(l.clone()) {
            violations.push(Violation::DuplicateLabel(l.clone()));
        }
    }
    for (i, v) in poly.vertices.iter().enumerate() {
        if !v.is_finite() {
            violations.push(Violation::NonFinite(i));
        }
    }
    if n < 3 || !violations.iter().all(|v| matches!(v, Violation::DuplicateLabel(_))) {
        return ValidationReport { violations };
    }

    let scale = poly
        .vertices
        .iter()
        .fold(0.0f64, |m, v| m.max(v.x.abs()).max(v.y.abs()))
        .max(1.0);
    let tol = EPS_GEOM * scale;
    let mut degenerate = vec![false; n];
    for (i, deg) in degenerate.iter_mut().enumerate() {
        if poly.edge_length(i) <= tol {
            *deg = true;
            violations.push(Violation::DegenerateEdge(i));
        }
    }
    for i in 0..n {
        let prev = (i + n - 1) % n;
        if degenerate[i] || degenerate[prev] {
            continue;
        }
        let a = poly.vertex(i + n - 1);
        let b = poly.vertex(i);
        let c = poly.vertex(i + 1);
        let u = (b - a).normalized();
        let w = (c - b).normalized();
        if u.cross(w).abs() <= EPS_GEOM && u.dot(w) > 0.0 {
            violations.push(Violation::StraightAngle(i));
        }
    }
    // non-adjacent edges must stay apart; adjacent edges must not fold back
    for i in 0..n {
        for j in (i + 1)..n {
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            let (a, b) = poly.edge(i);
            let (c, d) = poly.edge(j);
            if adjacent {
                let (shared, p, q) = if j == i + 1 { (b, a, d) } else { (a, b, c) };
                let u = (p - shared).normalized();
                let w = (q - shared).normalized();
                if u.cross(w).abs() <= EPS_GEOM && u.dot(w) > 0.0 {
                    violations.push(Violation::SelfIntersection(i, j));
                }
            } else if segment_segment_distance(a, b, c, d) <= tol {
                violations.push(Violation::SelfIntersection(i, j));
            }
        }
    }
    if violations.is_empty() && signed_area(&poly.vertices) <= 0.0 {
        violations.push(Violation::NotCounterclockwise);
    }
    ValidationReport { violations }
}

/// Interior angle at each vertex, in `(0, 2π)`.
pub fn interior_angles(poly: &LabeledPolygon) -> Vec<f64> {
    (0..poly.len()).map(|i| poly.interior_angle(i)).collect()
}

pub fn is_strictly_convex(poly: &LabeledPolygon) -> bool {
    (0..poly.len()).all(|i| poly.interior_angle(i) < PI)
}

pub fn diameter(poly: &LabeledPolygon) -> f64 {
    let vs = poly.vertices();
    let mut d: f64 = 0.0;
    for i in 0..vs.len() {
        for j in (i + 1)..vs.len() {
            d = d.max(vs[i].dist(vs[j]));
        }
    }
    d
}

/// Similarity image with vertex 0 at the origin and vertex 1 at `(1, 0)`.
/// Vertex 2 then lies above the axis whenever vertex 1 is convex. A mirror
/// would reverse the orientation, so none is applied at reflex vertices.
pub fn normalize(poly: &LabeledPolygon) -> LabeledPolygon {
    let z0 = poly.vertex(0);
    let d = poly.vertex(1) - z0;
    let s = 1.0 / d.norm();
    let (sin, cos) = (-d.angle()).sin_cos();
    let map = |p: Point2| {
        let q = (p - z0) * s;
        Point2::new(cos * q.x - sin * q.y, sin * q.x + cos * q.y)
    };
    let mut vs: Vec<Point2> = poly.vertices().iter().map(|&p| map(p)).collect();
    vs[0] = Point2::new(0.0, 0.0);
    vs[1] = Point2::new(1.0, 0.0);
    LabeledPolygon::new_unchecked(vs, poly.labels().to_vec())
}
