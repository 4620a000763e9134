//! Planar primitives: points, segments, polylines and the predicates the
//! dissection, encoder and path compressor are built on.
//!
//! Every tolerance-sensitive predicate takes an explicit absolute `eps`. The
//! rest of the crate derives that value from the environment diagonal (see
//! [`geo_eps`]) so that collinearity, on-segment and point-equality tests all
//! agree with each other.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Relative factor applied to the environment diagonal to get `ε_geo`.
pub const GEO_EPS_FACTOR: f64 = 1e-9;

/// Absolute geometric tolerance for an environment with the given diagonal.
pub fn geo_eps(diagonal: f64) -> f64 {
    GEO_EPS_FACTOR * diagonal.max(1.0)
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("degenerate segment ({0}) where a proper segment is required")]
    DegenerateSegment(Segment),
    #[error("non-finite coordinate in {0}")]
    NonFinite(Point),
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl From<[f64; 2]> for Point {
    fn from([x, y]: [f64; 2]) -> Self {
        Point { x, y }
    }
}

impl From<Point> for [f64; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn dot(self, o: Point) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 3D cross product.
    pub fn cross(self, o: Point) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn dist(self, o: Point) -> f64 {
        (self - o).norm()
    }

    pub fn lerp(self, o: Point, t: f64) -> Point {
        Point::new(self.x + (o.x - self.x) * t, self.y + (o.y - self.y) * t)
    }

    pub fn midpoint(self, o: Point) -> Point {
        self.lerp(o, 0.5)
    }

    pub fn approx_eq(self, o: Point, eps: f64) -> bool {
        self.dist(o) <= eps
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }
}

impl Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        Point::new(-self.x, -self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub a: Point,
    pub b: Point,
}

impl fmt::Display for Segment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.a, self.b)
    }
}

impl Segment {
    pub const fn new(a: Point, b: Point) -> Self {
        Segment { a, b }
    }

    pub fn length(&self) -> f64 {
        self.a.dist(self.b)
    }

    pub fn dir(&self) -> Point {
        self.b - self.a
    }

    /// Point at parameter `t`, with `t = 0` at `a` and `t = 1` at `b`.
    pub fn at(&self, t: f64) -> Point {
        self.a.lerp(self.b, t)
    }

    pub fn midpoint(&self) -> Point {
        self.at(0.5)
    }

    pub fn is_degenerate(&self, eps: f64) -> bool {
        self.length() <= eps
    }

    /// Parameter of the orthogonal projection of `p`, clamped to `[0, 1]`.
    pub fn project_param(&self, p: Point) -> f64 {
        let d = self.dir();
        let l2 = d.norm_sq();
        if l2 == 0.0 {
            return 0.0;
        }
        ((p - self.a).dot(d) / l2).clamp(0.0, 1.0)
    }

    pub fn closest_point(&self, p: Point) -> Point {
        self.at(self.project_param(p))
    }

    pub fn distance_to(&self, p: Point) -> f64 {
        self.closest_point(p).dist(p)
    }

    pub fn contains(&self, p: Point, eps: f64) -> bool {
        self.distance_to(p) <= eps
    }
}

/// Sign of a turn, as returned by [`orient`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Orientation {
    Clockwise,
    Collinear,
    CounterClockwise,
}

impl Orientation {
    pub fn sign(self) -> i8 {
        match self {
            Orientation::Clockwise => -1,
            Orientation::Collinear => 0,
            Orientation::CounterClockwise => 1,
        }
    }
}

/// Exact-sign orientation of the triple: the sign of `(b - a) x (c - a)`.
pub fn orient(a: Point, b: Point, c: Point) -> Orientation {
    orient_eps(a, b, c, 0.0)
}

/// Orientation with `c` treated as collinear when it lies within `eps` of the
/// line through `a` and `b`.
pub fn orient_eps(a: Point, b: Point, c: Point, eps: f64) -> Orientation {
    let ab = b - a;
    let cr = ab.cross(c - a);
    let scale = ab.norm();
    if cr.abs() <= eps * scale {
        Orientation::Collinear
    } else if cr > 0.0 {
        Orientation::CounterClockwise
    } else {
        Orientation::Clockwise
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SegmentIntersection {
    None,
    Point(Point),
    /// Collinear segments sharing a span of positive length.
    Overlap(Segment),
}

/// Intersection of two closed segments.
pub fn segment_intersection(s1: Segment, s2: Segment) -> SegmentIntersection {
    segment_intersection_eps(s1, s2, 0.0)
}

pub fn segment_intersection_eps(s1: Segment, s2: Segment, eps: f64) -> SegmentIntersection {
    let d1 = s1.dir();
    let d2 = s2.dir();
    let denom = d1.cross(d2);
    let w = s2.a - s1.a;
    let len1 = d1.norm();
    let len2 = d2.norm();

    // Parallel when the sine of the angle between the two is below eps-scale.
    let parallel = denom.abs() <= eps * len1.max(len2).max(f64::MIN_POSITIVE) || denom == 0.0;
    if parallel {
        let off_line = if len1 > 0.0 {
            d1.cross(w).abs() / len1 > eps
        } else if len2 > 0.0 {
            d2.cross(w).abs() / len2 > eps
        } else {
            s1.a.dist(s2.a) > eps
        };
        if off_line {
            return SegmentIntersection::None;
        }
        // Collinear: project s2 onto s1's parameter axis.
        if len1 == 0.0 {
            return if s2.contains(s1.a, eps) { SegmentIntersection::Point(s1.a) } else { SegmentIntersection::None };
        }
        let t_a = w.dot(d1) / (len1 * len1);
        let t_b = (s2.b - s1.a).dot(d1) / (len1 * len1);
        let lo = t_a.min(t_b).max(0.0);
        let hi = t_a.max(t_b).min(1.0);
        let tol = eps / len1;
        if hi < lo - tol {
            return SegmentIntersection::None;
        }
        if (hi - lo) * len1 <= eps {
            return SegmentIntersection::Point(s1.at(((lo + hi) * 0.5).clamp(0.0, 1.0)));
        }
        return SegmentIntersection::Overlap(Segment::new(s1.at(lo), s1.at(hi)));
    }

    let t = w.cross(d2) / denom;
    let u = w.cross(d1) / denom;
    let tol1 = if len1 > 0.0 { eps / len1 } else { 0.0 };
    let tol2 = if len2 > 0.0 { eps / len2 } else { 0.0 };
    if t < -tol1 || t > 1.0 + tol1 || u < -tol2 || u > 1.0 + tol2 {
        return SegmentIntersection::None;
    }
    SegmentIntersection::Point(s1.at(t.clamp(0.0, 1.0)))
}

/// True when the open interiors of the two segments cross at a single point
/// transversally (touching at endpoints or collinear overlap do not count).
pub fn segments_cross_properly(s1: Segment, s2: Segment, eps: f64) -> bool {
    let o1 = orient_eps(s1.a, s1.b, s2.a, eps);
    let o2 = orient_eps(s1.a, s1.b, s2.b, eps);
    let o3 = orient_eps(s2.a, s2.b, s1.a, eps);
    let o4 = orient_eps(s2.a, s2.b, s1.b, eps);
    o1 != Orientation::Collinear
        && o2 != Orientation::Collinear
        && o3 != Orientation::Collinear
        && o4 != Orientation::Collinear
        && o1 != o2
        && o3 != o4
}

/// A piecewise-linear path. A single vertex is the constant path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Polyline {
    pub vertices: Vec<Point>,
}

impl Polyline {
    pub fn new(vertices: Vec<Point>) -> Self {
        debug_assert!(!vertices.is_empty(), "a polyline needs at least one vertex");
        Polyline { vertices }
    }

    pub fn length(&self) -> f64 {
        polyline_length(&self.vertices)
    }

    pub fn first(&self) -> Point {
        self.vertices[0]
    }

    pub fn last(&self) -> Point {
        *self.vertices.last().expect("non-empty polyline")
    }

    pub fn segments(&self) -> impl Iterator<Item = Segment> + '_ {
        self.vertices.windows(2).map(|w| Segment::new(w[0], w[1]))
    }
}

/// Sum of Euclidean distances between consecutive vertices.
pub fn polyline_length(vertices: &[Point]) -> f64 {
    vertices.windows(2).map(|w| w[0].dist(w[1])).sum()
}

/// Signed area (positive for counter-clockwise vertex order).
pub fn signed_area(poly: &[Point]) -> f64 {
    let n = poly.len();
    if n < 3 {
        return 0.0;
    }
    let mut acc = 0.0;
    for i in 0..n {
        let p = poly[i];
        let q = poly[(i + 1) % n];
        acc += p.cross(q);
    }
    acc * 0.5
}

pub fn centroid(poly: &[Point]) -> Point {
    let a = signed_area(poly);
    if a.abs() <= f64::EPSILON {
        let n = poly.len().max(1) as f64;
        let s = poly.iter().fold(Point::default(), |acc, &p| acc + p);
        return s * (1.0 / n);
    }
    let n = poly.len();
    let (mut cx, mut cy) = (0.0, 0.0);
    for i in 0..n {
        let p = poly[i];
        let q = poly[(i + 1) % n];
        let f = p.cross(q);
        cx += (p.x + q.x) * f;
        cy += (p.y + q.y) * f;
    }
    Point::new(cx / (6.0 * a), cy / (6.0 * a))
}

pub fn polygon_edges(poly: &[Point]) -> impl Iterator<Item = Segment> + '_ {
    let n = poly.len();
    (0..n).map(move |i| Segment::new(poly[i], poly[(i + 1) % n]))
}

/// Closed-polygon membership for a counter-clockwise convex polygon.
pub fn point_in_convex_polygon(p: Point, poly: &[Point], eps: f64) -> bool {
    polygon_edges(poly).all(|e| {
        let d = e.dir();
        let len = d.norm();
        len == 0.0 || d.cross(p - e.a) >= -eps * len
    })
}

/// Even-odd membership for a simple polygon of either orientation. Points
/// within `eps` of the boundary report `on_boundary`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Containment {
    Inside,
    OnBoundary,
    Outside,
}

pub fn point_in_polygon(p: Point, poly: &[Point], eps: f64) -> Containment {
    if polygon_edges(poly).any(|e| e.contains(p, eps)) {
        return Containment::OnBoundary;
    }
    let mut inside = false;
    let n = poly.len();
    let mut j = n - 1;
    for i in 0..n {
        let (pi, pj) = (poly[i], poly[j]);
        if (pi.y > p.y) != (pj.y > p.y) {
            let x = pj.x + (p.y - pj.y) * (pi.x - pj.x) / (pi.y - pj.y);
            if p.x < x {
                inside = !inside;
            }
        }
        j = i;
    }
    if inside {
        Containment::Inside
    } else {
        Containment::Outside
    }
}

/// Axis-aligned bounding box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub min: Point,
    pub max: Point,
}

impl Aabb {
    pub fn from_points<'a>(pts: impl IntoIterator<Item = &'a Point>) -> Option<Aabb> {
        let mut it = pts.into_iter();
        let first = *it.next()?;
        let mut bb = Aabb { min: first, max: first };
        for p in it {
            bb.min.x = bb.min.x.min(p.x);
            bb.min.y = bb.min.y.min(p.y);
            bb.max.x = bb.max.x.max(p.x);
            bb.max.y = bb.max.y.max(p.y);
        }
        Some(bb)
    }

    pub fn diagonal(&self) -> f64 {
        self.min.dist(self.max)
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn contains(&self, p: Point, eps: f64) -> bool {
        p.x >= self.min.x - eps && p.x <= self.max.x + eps && p.y >= self.min.y - eps && p.y <= self.max.y + eps
    }
}

/// `argmin` over `x` on `seg` of `|a - x| + |x - b|`.
///
/// When the segment `a`-`b` crosses `seg` the crossing is returned; otherwise
/// the endpoint of `seg` nearest to where the line `a`-`b` meets the
/// supporting line of `seg`. Equal objectives at both endpoints resolve to
/// `seg.a`. Inputs on the same side of the supporting line are handled by
/// reflecting `b` across it, which leaves the objective on `seg` unchanged.
pub fn min_sum_on_segment(a: Point, b: Point, seg: Segment) -> Result<Point, GeometryError> {
    for p in [a, b, seg.a, seg.b] {
        if !p.is_finite() {
            return Err(GeometryError::NonFinite(p));
        }
    }
    let d = seg.dir();
    let l2 = d.norm_sq();
    if l2 == 0.0 {
        return Err(GeometryError::DegenerateSegment(seg));
    }
    let side_a = d.cross(a - seg.a);
    let mut side_b = d.cross(b - seg.a);
    let mut b = b;
    if side_a * side_b > 0.0 {
        // Same open side: mirror b.
        let foot = seg.a + d * ((b - seg.a).dot(d) / l2);
        b = foot * 2.0 - b;
        side_b = -side_b;
    }

    let t = if side_a == side_b {
        // Both on the supporting line: any point between their projections is
        // optimal; take the one nearest to a's projection.
        let ta = (a - seg.a).dot(d) / l2;
        let tb = (b - seg.a).dot(d) / l2;
        let (lo, hi) = (ta.min(tb), ta.max(tb));
        if hi < 0.0 {
            0.0
        } else if lo > 1.0 {
            1.0
        } else {
            ta.clamp(lo.max(0.0), hi.min(1.0))
        }
    } else {
        // Parameter along seg where the line a-b meets the supporting line.
        side_a / (side_a - side_b)
    };

    let cand = if side_a == side_b {
        seg.at(t)
    } else {
        let crossing = a.lerp(b, t);
        let s = (crossing - seg.a).dot(d) / l2;
        if s <= 0.0 {
            seg.a
        } else if s >= 1.0 {
            seg.b
        } else {
            crossing
        }
    };
    Ok(cand)
}
