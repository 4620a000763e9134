//! Bounded planar environments: an outer boundary polygon plus obstacle
//! polygons, loaded from the JSON polygon format or from occupancy grids.

mod grid;

use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::geometry::{
    geo_eps, orient_eps, point_in_polygon, polygon_edges, segment_intersection_eps, segments_cross_properly,
    signed_area, Aabb, Containment, Orientation, Point, Segment, SegmentIntersection,
};

pub use grid::{
    grid_to_environment, load_occupancy_grid, GridError, GridFormat, GridLoadOptions, OccupancyGrid,
    DEFAULT_SIMPLIFY_TOL, DEFAULT_THRESHOLD,
};

/// Which polygon of an environment a validation problem refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolygonRef {
    Boundary,
    Obstacle(usize),
}

impl fmt::Display for PolygonRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolygonRef::Boundary => write!(f, "boundary"),
            PolygonRef::Obstacle(i) => write!(f, "obstacle {i}"),
        }
    }
}

#[derive(Debug, Error)]
pub enum EnvError {
    #[error("invalid environment JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{polygon}: {reason}")]
    Validation { polygon: PolygonRef, reason: String },
    #[error("free space is empty")]
    EmptyFreeSpace,
}

impl EnvError {
    fn invalid(polygon: PolygonRef, reason: impl Into<String>) -> Self {
        EnvError::Validation { polygon, reason: reason.into() }
    }

    /// Offending polygon for validation errors.
    pub fn polygon(&self) -> Option<PolygonRef> {
        match self {
            EnvError::Validation { polygon, .. } => Some(*polygon),
            _ => None,
        }
    }
}

/// On-disk polygon environment. Field names are part of the file format.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct EnvFile {
    boundary: Vec<[f64; 2]>,
    #[serde(default)]
    obstacles: Vec<Vec<[f64; 2]>>,
}

/// Boundary polygon (counter-clockwise) minus obstacle interiors (clockwise).
#[derive(Debug, Clone, PartialEq)]
pub struct Environment {
    pub boundary: Vec<Point>,
    pub obstacles: Vec<Vec<Point>>,
    /// Pixel dimensions when the environment came from a raster.
    pub source_resolution: Option<(u32, u32)>,
}

impl Environment {
    /// Validates the polygons and normalizes their orientation.
    pub fn new(boundary: Vec<Point>, obstacles: Vec<Vec<Point>>) -> Result<Self, EnvError> {
        let mut env = Environment { boundary, obstacles, source_resolution: None };
        env.normalize_and_validate()?;
        Ok(env)
    }

    pub fn bbox(&self) -> Aabb {
        Aabb::from_points(&self.boundary).expect("validated boundary is non-empty")
    }

    pub fn diagonal(&self) -> f64 {
        self.bbox().diagonal()
    }

    /// Geometric tolerance for this environment.
    pub fn eps(&self) -> f64 {
        geo_eps(self.diagonal())
    }

    /// All polygons, boundary first.
    pub fn polygons(&self) -> impl Iterator<Item = &[Point]> {
        std::iter::once(self.boundary.as_slice()).chain(self.obstacles.iter().map(|o| o.as_slice()))
    }

    pub fn edges(&self) -> impl Iterator<Item = Segment> + '_ {
        self.polygons().flat_map(polygon_edges)
    }

    /// Closed free-space membership: inside or on the boundary and not
    /// strictly inside any obstacle.
    pub fn is_free(&self, p: Point) -> bool {
        let eps = self.eps();
        if point_in_polygon(p, &self.boundary, eps) == Containment::Outside {
            return false;
        }
        !self.obstacles.iter().any(|o| point_in_polygon(p, o, eps) == Containment::Inside)
    }

    /// Distance from `p` to the nearest boundary or obstacle edge.
    pub fn clearance(&self, p: Point) -> f64 {
        self.edges().map(|e| e.distance_to(p)).fold(f64::INFINITY, f64::min)
    }

    pub fn free_area(&self) -> f64 {
        signed_area(&self.boundary).abs() - self.obstacles.iter().map(|o| signed_area(o).abs()).sum::<f64>()
    }

    /// Parses the JSON polygon format.
    pub fn from_json(text: &str) -> Result<Self, EnvError> {
        let file: EnvFile = serde_json::from_str(text)?;
        let conv = |v: Vec<[f64; 2]>| v.into_iter().map(Point::from).collect::<Vec<_>>();
        Environment::new(conv(file.boundary), file.obstacles.into_iter().map(conv).collect())
    }

    pub fn to_json(&self) -> String {
        let conv = |v: &[Point]| v.iter().map(|&p| p.into()).collect::<Vec<[f64; 2]>>();
        let file =
            EnvFile { boundary: conv(&self.boundary), obstacles: self.obstacles.iter().map(|o| conv(o)).collect() };
        serde_json::to_string(&file).expect("environment serializes")
    }

    /// Hex SHA-256 of the canonical JSON form.
    pub fn content_hash(&self) -> String {
        let digest = Sha256::digest(self.to_json().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Number of obstacle components surrounded by free space. Obstacles that
    /// touch each other count once; components touching the boundary count
    /// as part of it.
    pub fn count_independent_obstacles(&self) -> usize {
        let eps = self.eps();
        let n = self.obstacles.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut i: usize) -> usize {
            while parent[i] != i {
                parent[i] = parent[parent[i]];
                i = parent[i];
            }
            i
        }
        for i in 0..n {
            for j in i + 1..n {
                if polygons_touch(&self.obstacles[i], &self.obstacles[j], eps) {
                    let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
        let mut grounded = vec![false; n];
        for (i, o) in self.obstacles.iter().enumerate() {
            if polygons_touch(o, &self.boundary, eps) {
                let r = find(&mut parent, i);
                grounded[r] = true;
            }
        }
        (0..n).filter(|&i| find(&mut parent, i) == i && !grounded[i]).count()
    }

    /// Classifies raster cell centers as occupied (`true`) or free, with
    /// cells laid out the same way [`grid_to_environment`] reads them.
    pub fn rasterize(&self, width: u32, height: u32, cell_size: f64) -> Vec<bool> {
        let mut out = Vec::with_capacity((width * height) as usize);
        for r in 0..height {
            for c in 0..width {
                let p = Point::new((c as f64 + 0.5) * cell_size, (r as f64 + 0.5) * cell_size);
                out.push(!self.is_free(p));
            }
        }
        out
    }

    fn normalize_and_validate(&mut self) -> Result<(), EnvError> {
        if self.boundary.is_empty() {
            return Err(EnvError::invalid(PolygonRef::Boundary, "no vertices"));
        }
        let eps = geo_eps(Aabb::from_points(&self.boundary).map_or(1.0, |b| b.diagonal()));

        self.boundary = clean_ring(std::mem::take(&mut self.boundary), eps);
        check_simple(&self.boundary, eps).map_err(|r| EnvError::invalid(PolygonRef::Boundary, r))?;
        if signed_area(&self.boundary) < 0.0 {
            self.boundary.reverse();
        }
        for i in 0..self.obstacles.len() {
            let who = PolygonRef::Obstacle(i);
            let ring = clean_ring(std::mem::take(&mut self.obstacles[i]), eps);
            check_simple(&ring, eps).map_err(|r| EnvError::invalid(who, r))?;
            self.obstacles[i] = ring;
            if signed_area(&self.obstacles[i]) > 0.0 {
                self.obstacles[i].reverse();
            }
            check_inside(&self.obstacles[i], &self.boundary, eps).map_err(|r| EnvError::invalid(who, r))?;
        }
        for i in 0..self.obstacles.len() {
            for j in 0..i {
                check_disjoint(&self.obstacles[i], &self.obstacles[j], eps)
                    .map_err(|r| EnvError::invalid(PolygonRef::Obstacle(i), format!("{r} obstacle {j}")))?;
            }
        }
        if self.free_area() <= eps {
            return Err(EnvError::EmptyFreeSpace);
        }
        Ok(())
    }
}

/// Drops repeated vertices, including a closing copy of the first vertex.
fn clean_ring(mut ring: Vec<Point>, eps: f64) -> Vec<Point> {
    ring.dedup_by(|a, b| a.approx_eq(*b, eps));
    while ring.len() > 1 && ring[0].approx_eq(*ring.last().unwrap(), eps) {
        ring.pop();
    }
    ring
}

fn check_simple(ring: &[Point], eps: f64) -> Result<(), String> {
    if ring.len() < 3 {
        return Err(format!("needs at least 3 distinct vertices, got {}", ring.len()));
    }
    if let Some(p) = ring.iter().find(|p| !p.is_finite()) {
        return Err(format!("non-finite vertex {p}"));
    }
    if signed_area(ring).abs() <= eps * eps {
        return Err("zero area".into());
    }
    let n = ring.len();
    let edges: Vec<Segment> = polygon_edges(ring).collect();
    for i in 0..n {
        for j in i + 1..n {
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            let hit = segment_intersection_eps(edges[i], edges[j], eps);
            match (adjacent, hit) {
                (_, SegmentIntersection::None) => {}
                (true, SegmentIntersection::Point(_)) => {}
                (true, SegmentIntersection::Overlap(_)) => {
                    return Err(format!("edges {i} and {j} fold back on each other"));
                }
                (false, _) => return Err(format!("self-intersection between edges {i} and {j}")),
            }
        }
    }
    Ok(())
}

/// A point strictly inside a simple polygon, found on a horizontal scanline.
pub(crate) fn interior_point(ring: &[Point]) -> Point {
    let bb = Aabb::from_points(ring).expect("non-empty ring");
    // Irrational-ish offset keeps the scanline off vertices.
    let y = bb.min.y + bb.height() * 0.500_123_457;
    let mut xs: Vec<f64> = polygon_edges(ring)
        .filter(|e| (e.a.y > y) != (e.b.y > y))
        .map(|e| e.a.x + (y - e.a.y) * (e.b.x - e.a.x) / (e.b.y - e.a.y))
        .collect();
    xs.sort_by(f64::total_cmp);
    if xs.len() >= 2 {
        Point::new((xs[0] + xs[1]) * 0.5, y)
    } else {
        crate::geometry::centroid(ring)
    }
}

fn check_inside(ob: &[Point], boundary: &[Point], eps: f64) -> Result<(), String> {
    for &v in ob {
        if point_in_polygon(v, boundary, eps) == Containment::Outside {
            return Err(format!("vertex {v} lies outside the boundary"));
        }
    }
    for e in polygon_edges(ob) {
        for f in polygon_edges(boundary) {
            if segments_cross_properly(e, f, eps) {
                return Err(format!("edge {e} crosses the boundary"));
            }
        }
        if point_in_polygon(e.midpoint(), boundary, eps) == Containment::Outside {
            return Err(format!("edge {e} leaves the boundary"));
        }
    }
    Ok(())
}

fn check_disjoint(a: &[Point], b: &[Point], eps: f64) -> Result<(), String> {
    for e in polygon_edges(a) {
        for f in polygon_edges(b) {
            if segments_cross_properly(e, f, eps) {
                return Err("crosses".into());
            }
        }
    }
    let strictly_in = |p: Point, poly: &[Point]| point_in_polygon(p, poly, eps) == Containment::Inside;
    let probes =
        |r: &[Point]| -> Vec<Point> { r.iter().copied().chain(polygon_edges(r).map(|e| e.midpoint())).collect() };
    if probes(a).into_iter().any(|p| strictly_in(p, b))
        || probes(b).into_iter().any(|p| strictly_in(p, a))
        || strictly_in(interior_point(a), b)
        || strictly_in(interior_point(b), a)
    {
        return Err("overlaps".into());
    }
    Ok(())
}

fn polygons_touch(a: &[Point], b: &[Point], eps: f64) -> bool {
    for e in polygon_edges(a) {
        for f in polygon_edges(b) {
            if segment_intersection_eps(e, f, eps) != SegmentIntersection::None {
                return true;
            }
        }
    }
    false
}

/// True when the polygon turns left or goes straight at every vertex.
pub fn is_convex_ccw(poly: &[Point], eps: f64) -> bool {
    let n = poly.len();
    n >= 3
        && signed_area(poly) > 0.0
        && (0..n).all(|i| orient_eps(poly[i], poly[(i + 1) % n], poly[(i + 2) % n], eps) != Orientation::Clockwise)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sq(x0: f64, y0: f64, x1: f64, y1: f64) -> Vec<[f64; 2]> {
        vec![[x0, y0], [x1, y0], [x1, y1], [x0, y1]]
    }

    fn env_json(boundary: Vec<[f64; 2]>, obstacles: Vec<Vec<[f64; 2]>>) -> String {
        serde_json::json!({ "boundary": boundary, "obstacles": obstacles }).to_string()
    }

    #[test]
    fn loads_square_with_obstacle() {
        let env = Environment::from_json(&env_json(sq(0., 0., 10., 10.), vec![sq(4., 4., 6., 6.)])).unwrap();
        assert_eq!(env.obstacles.len(), 1);
        assert!(signed_area(&env.boundary) > 0.0);
        assert!(signed_area(&env.obstacles[0]) < 0.0);
        assert_eq!(env.count_independent_obstacles(), 1);
    }

    #[test]
    fn rejects_obstacle_outside() {
        let mut ob = sq(4., 4., 6., 6.);
        ob[1] = [20., 5.];
        let err = Environment::from_json(&env_json(sq(0., 0., 10., 10.), vec![ob])).unwrap_err();
        assert_eq!(err.polygon(), Some(PolygonRef::Obstacle(0)));
    }

    #[test]
    fn reorients_clockwise_boundary() {
        let mut b = sq(0., 0., 10., 10.);
        b.reverse();
        let env = Environment::from_json(&env_json(b, vec![])).unwrap();
        assert!(signed_area(&env.boundary) > 0.0);
        assert_eq!(env.count_independent_obstacles(), 0);
    }

    #[test]
    fn rejects_self_intersection_and_overlap() {
        let bowtie = vec![[0., 0.], [10., 10.], [10., 0.], [0., 10.]];
        let err = Environment::from_json(&env_json(bowtie, vec![])).unwrap_err();
        assert_eq!(err.polygon(), Some(PolygonRef::Boundary));

        let err = Environment::from_json(&env_json(sq(0., 0., 10., 10.), vec![sq(1., 1., 4., 4.), sq(3., 3., 5., 5.)]))
            .unwrap_err();
        assert_eq!(err.polygon(), Some(PolygonRef::Obstacle(1)));

        let err = Environment::from_json(&env_json(sq(0., 0., 10., 10.), vec![sq(1., 1., 4., 4.), sq(1., 1., 4., 4.)]))
            .unwrap_err();
        assert_eq!(err.polygon(), Some(PolygonRef::Obstacle(1)));
    }

    #[test]
    fn touching_obstacles_count_once() {
        let env = Environment::from_json(&env_json(
            sq(0., 0., 10., 10.),
            vec![sq(1., 1., 3., 3.), sq(3., 1., 5., 3.), sq(7., 7., 8., 8.), sq(0., 5., 1., 6.)],
        ))
        .unwrap();
        assert_eq!(env.count_independent_obstacles(), 2);
    }

    #[test]
    fn fourteen_blocks() {
        let obstacles = (0..14)
            .map(|i| {
                let x = 2.0 + (i % 7) as f64 * 12.0;
                let y = 10.0 + (i / 7) as f64 * 30.0;
                sq(x, y, x + 6.0, y + 6.0)
            })
            .collect();
        let env = Environment::from_json(&env_json(sq(0., 0., 100., 100.), obstacles)).unwrap();
        assert_eq!(env.count_independent_obstacles(), 14);
    }

    #[test]
    fn json_round_trip() {
        let env = Environment::from_json(&env_json(sq(0., 0., 10., 10.), vec![sq(4., 4., 6., 6.)])).unwrap();
        let again = Environment::from_json(&env.to_json()).unwrap();
        assert_eq!(env, again);
        assert_eq!(env.content_hash(), again.content_hash());
    }

    #[test]
    fn free_membership() {
        let env = Environment::from_json(&env_json(sq(0., 0., 10., 10.), vec![sq(4., 4., 6., 6.)])).unwrap();
        assert!(env.is_free(Point::new(1., 1.)));
        assert!(env.is_free(Point::new(4., 5.)));
        assert!(!env.is_free(Point::new(5., 5.)));
        assert!(!env.is_free(Point::new(11., 5.)));
    }
}
