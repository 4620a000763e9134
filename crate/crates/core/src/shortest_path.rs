//! Shortest path inside a homotopy class by iterative compression.
//!
//! The path is kept as `x_0 .. x_{m+1}` with `x_k` on the k-th crossed
//! cutline. One sweep replaces each interior vertex, in ascending order, by
//! the point of its cutline minimizing the distance to its two neighbours.
//! Sweeps never lengthen the path; iteration stops once a sweep gains less
//! than `eps`.

use thiserror::Error;

use crate::dissection::ConvexDissection;
use crate::encoding::CdtEncoding;
use crate::geometry::{
    min_sum_on_segment, polyline_length, segment_intersection_eps, GeometryError, Point, Polyline, Segment,
    SegmentIntersection,
};

/// Hard cap on sweeps per call.
pub const SWEEP_CAP: usize = 10_000;

/// Relative factor applied to the environment diagonal for the default
/// convergence threshold.
pub const EPS_FACTOR: f64 = 1e-6;

pub fn default_eps(diagonal: f64) -> f64 {
    EPS_FACTOR * diagonal.max(1.0)
}

#[derive(Debug, Error, PartialEq)]
pub enum ShortestPathError {
    #[error("start {0} is not in the first polygon of the encoding")]
    StartOutsideClass(Point),
    #[error("end {0} is not in the last polygon of the encoding")]
    EndOutsideClass(Point),
    #[error("expected {expected} path vertices, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("non-finite input {0}")]
    NonFinite(Point),
    #[error("no convergence after {0} sweeps (last gain {1:e})")]
    SweepCap(usize, f64),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompressionResult {
    pub path: Polyline,
    pub cost: f64,
    /// Full sweeps executed.
    pub iterations: usize,
}

/// One sequential pass of the per-vertex projections, in place.
pub fn compress_sweep_in_place(vertices: &mut [Point], cutlines: &[Segment]) -> Result<(), ShortestPathError> {
    sweep(vertices, cutlines).map(|_| ())
}

/// Sweep returning the largest vertex displacement.
fn sweep(vertices: &mut [Point], cutlines: &[Segment]) -> Result<f64, ShortestPathError> {
    if vertices.len() != cutlines.len() + 2 {
        return Err(ShortestPathError::Arity { expected: cutlines.len() + 2, got: vertices.len() });
    }
    let mut moved = 0.0_f64;
    for (k, seg) in cutlines.iter().enumerate() {
        let x = min_sum_on_segment(vertices[k], vertices[k + 2], *seg)?;
        moved = moved.max(x.dist(vertices[k + 1]));
        vertices[k + 1] = x;
    }
    Ok(moved)
}

/// One sweep over a copy of `path`.
pub fn compress_sweep(path: &Polyline, cutlines: &[Segment]) -> Result<Polyline, ShortestPathError> {
    let mut v = path.vertices.clone();
    compress_sweep_in_place(&mut v, cutlines)?;
    Ok(Polyline::new(v))
}

/// Initial vertices: endpoints plus cutline midpoints, or the interior of a
/// warm-start path projected onto its cutlines.
fn initial_vertices(
    xs: Point,
    xe: Point,
    cutlines: &[Segment],
    warm_start: Option<&[Point]>,
) -> Result<Vec<Point>, ShortestPathError> {
    let m = cutlines.len();
    let mut v = Vec::with_capacity(m + 2);
    v.push(xs);
    match warm_start {
        Some(w) => {
            if w.len() != m + 2 {
                return Err(ShortestPathError::Arity { expected: m + 2, got: w.len() });
            }
            for (seg, &p) in cutlines.iter().zip(&w[1..=m]) {
                if !p.is_finite() {
                    return Err(ShortestPathError::NonFinite(p));
                }
                v.push(seg.closest_point(p));
            }
        }
        None => v.extend(cutlines.iter().map(Segment::midpoint)),
    }
    v.push(xe);
    Ok(v)
}

/// Iterates sweeps from `vertices` until the gain of a sweep drops below
/// `eps`. Returns the final cost and the sweep count.
///
/// Single-vertex moves stall when consecutive vertices meet at a shared
/// cutline endpoint: each one is then optimal given the other, even if the
/// path could leave the endpoint by moving them together. At such a fixed
/// point every run of coincident vertices is re-solved between its two
/// neighbours (see [`release_collapsed_runs`]) and sweeping resumes if that
/// shortened the path.
pub fn compress_to_fixed_point(
    vertices: &mut [Point],
    cutlines: &[Segment],
    eps: f64,
) -> Result<(f64, usize), ShortestPathError> {
    sweep_until_converged(vertices, cutlines, eps, f64::INFINITY, true)
}

/// Like [`compress_to_fixed_point`], but additionally keeps sweeping until
/// no vertex moves by more than `move_tol` in a sweep.
///
/// Near the optimum the length is flat to second order in vertex positions,
/// so a cost-gain test alone cannot pin vertices down to much better than
/// the square root of the floating-point resolution of the cost.
pub fn compress_until_stationary(
    vertices: &mut [Point],
    cutlines: &[Segment],
    eps: f64,
    move_tol: f64,
) -> Result<(f64, usize), ShortestPathError> {
    sweep_until_converged(vertices, cutlines, eps, move_tol, true)
}

fn sweep_until_converged(
    vertices: &mut [Point],
    cutlines: &[Segment],
    eps: f64,
    move_tol: f64,
    release: bool,
) -> Result<(f64, usize), ShortestPathError> {
    let mut cost = polyline_length(vertices);
    if cutlines.is_empty() {
        return Ok((cost, 0));
    }
    let tol = coincidence_tol(vertices, cutlines);
    let group_tol = run_grouping_tol(eps, tol);
    let mut iterations = 0;
    loop {
        let moved = sweep(vertices, cutlines)?;
        iterations += 1;
        let next = polyline_length(vertices);
        let gain = cost - next;
        cost = next.min(cost);
        if (gain < eps || gain <= 0.0) && moved <= move_tol {
            if release && release_collapsed_runs(vertices, cutlines, eps, group_tol, tol)? {
                cost = polyline_length(vertices);
            } else {
                return Ok((cost, iterations));
            }
        }
        if iterations >= SWEEP_CAP {
            return Err(ShortestPathError::SweepCap(iterations, gain));
        }
    }
}

/// Distance under which two path vertices count as the same point.
fn coincidence_tol(vertices: &[Point], cutlines: &[Segment]) -> f64 {
    let scale = vertices
        .iter()
        .chain(cutlines.iter().flat_map(|s| [&s.a, &s.b]))
        .fold(1.0_f64, |m, p| m.max(p.x.abs()).max(p.y.abs()));
    1e-9 * scale
}

/// Vertices closer than this may still be collapsing: a displacement `r`
/// changes the length by about `r^2 / L`, so gains below `eps` hide moves up
/// to roughly `sqrt(eps * L)`.
fn run_grouping_tol(eps: f64, tol: f64) -> f64 {
    // `tol` is 1e-9 of the coordinate scale.
    let scale = tol * 1e9;
    (eps.max(0.0) * scale).sqrt().max(tol)
}

/// Re-optimizes every run of two or more (nearly) coincident interior vertices with
/// its outer neighbours held fixed: first by the straight chord between the
/// neighbours, when it crosses each cutline of the run in order, otherwise
/// by compressing the run afresh from its cutline midpoints. A run is only
/// rewritten when that shortens the path by more than `tol`. Runs are chains
/// of neighbours at most `group_tol` apart. Returns whether any run changed.
pub fn release_collapsed_runs(
    vertices: &mut [Point],
    cutlines: &[Segment],
    eps: f64,
    group_tol: f64,
    tol: f64,
) -> Result<bool, ShortestPathError> {
    let m = cutlines.len();
    let mut released = false;
    let mut k = 1;
    while k <= m {
        let mut j = k;
        while j < m && vertices[j + 1].dist(vertices[j]) <= group_tol {
            j += 1;
        }
        if j > k {
            // Vertex i lies on cutlines[i - 1].
            let (a, b) = (vertices[k - 1], vertices[j + 1]);
            let segs = &cutlines[k - 1..j];
            let old = polyline_length(&vertices[k - 1..=j + 1]);
            let mut sub = match chord_crossings(a, b, segs, tol) {
                Some(pts) => pts,
                None => {
                    let mut sub: Vec<Point> = std::iter::once(a)
                        .chain(segs.iter().map(Segment::midpoint))
                        .chain(std::iter::once(b))
                        .collect();
                    sweep_until_converged(&mut sub, segs, eps, f64::INFINITY, false)?;
                    sub[1..=segs.len()].to_vec()
                }
            };
            sub.insert(0, a);
            sub.push(b);
            if polyline_length(&sub) < old - tol {
                vertices[k..=j].copy_from_slice(&sub[1..=segs.len()]);
                released = true;
            }
        }
        k = j + 1;
    }
    Ok(released)
}

/// Crossings of the segment `a`-`b` with each of `segs`, if it meets all of
/// them at single points in order.
fn chord_crossings(a: Point, b: Point, segs: &[Segment], tol: f64) -> Option<Vec<Point>> {
    let chord = Segment::new(a, b);
    let len2 = chord.dir().norm_sq();
    if len2 == 0.0 {
        return None;
    }
    let mut last = 0.0;
    let mut out = Vec::with_capacity(segs.len());
    for &s in segs {
        let SegmentIntersection::Point(x) = segment_intersection_eps(chord, s, tol) else {
            return None;
        };
        let t = (x - a).dot(chord.dir()) / len2;
        if t < last - tol {
            return None;
        }
        last = t;
        out.push(x);
    }
    Some(out)
}

/// Shortest path from `xs` to `xe` within the homotopy class `enc`.
///
/// `warm_start`, when given, is a path of the same class (for example the
/// optimum toward a neighbouring end point); its interior vertices seed the
/// iteration instead of the cutline midpoints.
pub fn get_shortest_path(
    d: &ConvexDissection,
    enc: &CdtEncoding,
    xs: Point,
    xe: Point,
    warm_start: Option<&[Point]>,
    eps: f64,
) -> Result<CompressionResult, ShortestPathError> {
    for p in [xs, xe] {
        if !p.is_finite() {
            return Err(ShortestPathError::NonFinite(p));
        }
    }
    if !d.polygon(enc.first()).contains(xs, d.eps) {
        return Err(ShortestPathError::StartOutsideClass(xs));
    }
    if !d.polygon(enc.last()).contains(xe, d.eps) {
        return Err(ShortestPathError::EndOutsideClass(xe));
    }
    let cutlines: Vec<Segment> = enc.cutline_sequence().iter().map(|&c| d.cutline(c).segment).collect();
    let mut v = initial_vertices(xs, xe, &cutlines, warm_start)?;
    let (cost, iterations) = compress_to_fixed_point(&mut v, &cutlines, eps)?;
    Ok(CompressionResult { path: Polyline::new(v), cost, iterations })
}
