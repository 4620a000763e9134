//! Brute-force ground truth: visibility-graph and grid shortest paths, and
//! per-class optima by dense dynamic programming over cutline points.
//!
//! Nothing here uses the compressor or the planner, so the two can be
//! checked against each other.

use ordered_float::OrderedFloat;
use pathfinding::prelude::{astar, dijkstra};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dissection::{ConvexDissection, PolygonId};
use crate::encoding::CdtEncoding;
use crate::env_model::{Environment, OccupancyGrid};
use crate::geometry::{orient, segment_intersection_eps, Orientation, Point, Polyline, Segment, SegmentIntersection};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("{0} is not in free space")]
    NotInFreeSpace(Point),
    #[error("cell ({0}, {1}) is occupied or outside the grid")]
    BlockedCell(usize, usize),
    #[error("goal is unreachable")]
    Unreachable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleMethod {
    Visibility,
    Grid4,
    Grid8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub cost: f64,
    pub path: Polyline,
    pub method: OracleMethod,
}

/// True when the closed segment `p`-`q` stays in free space.
///
/// The segment is split at every contact with an environment edge and the
/// midpoint of each piece is tested; a piece that enters an obstacle or
/// leaves the boundary must have its midpoint there.
pub fn segment_is_free(env: &Environment, p: Point, q: Point) -> bool {
    let eps = env.eps();
    let s = Segment::new(p, q);
    let len2 = s.dir().norm_sq();
    if len2 == 0.0 {
        return env.is_free(p);
    }
    let param = |x: Point| ((x - p).dot(s.dir()) / len2).clamp(0.0, 1.0);
    let mut ts = vec![0.0, 1.0];
    for e in env.edges() {
        match segment_intersection_eps(s, e, eps) {
            SegmentIntersection::None => {}
            SegmentIntersection::Point(x) => ts.push(param(x)),
            SegmentIntersection::Overlap(o) => {
                ts.push(param(o.a));
                ts.push(param(o.b));
            }
        }
    }
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    // A piece lying along edges is only usable if free space borders it on
    // at least one side; otherwise it is a zero-width seam between an
    // obstacle and the boundary or another obstacle.
    let normal = Point::new(-s.dir().y, s.dir().x) * (SIDE_PROBE * env.diagonal() / len2.sqrt());
    let piece_free = |m: Point| env.is_free(m) && (env.is_free(m + normal) || env.is_free(m - normal));
    ts.windows(2).all(|w| piece_free(s.at(0.5 * (w[0] + w[1])))) && env.is_free(p) && env.is_free(q)
}

/// Offset, relative to the map diagonal, of the side probes used by
/// [`segment_is_free`].
const SIDE_PROBE: f64 = 1e-6;

/// Visibility graph over the reflex corners of free space. Corner-to-corner
/// visibility is computed once; queries only connect their two endpoints.
#[derive(Debug, Clone)]
pub struct VisibilityGraph {
    env: Environment,
    nodes: Vec<Point>,
    adj: Vec<Vec<(usize, f64)>>,
}

impl VisibilityGraph {
    pub fn new(env: &Environment) -> Self {
        // Corners a taut path can wrap around: reflex corners of the CCW
        // boundary and convex corners of the CW obstacles, both of which are
        // clockwise turns.
        let mut nodes = Vec::new();
        for poly in env.polygons() {
            let n = poly.len();
            for i in 0..n {
                let (prev, v, next) = (poly[(i + n - 1) % n], poly[i], poly[(i + 1) % n]);
                if orient(prev, v, next) == Orientation::Clockwise {
                    nodes.push(v);
                }
            }
        }
        let mut adj = vec![Vec::new(); nodes.len()];
        for i in 0..nodes.len() {
            for j in i + 1..nodes.len() {
                if segment_is_free(env, nodes[i], nodes[j]) {
                    let w = nodes[i].dist(nodes[j]);
                    adj[i].push((j, w));
                    adj[j].push((i, w));
                }
            }
        }
        VisibilityGraph { env: env.clone(), nodes, adj }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn shortest(&self, a: Point, b: Point) -> Result<OracleResult, OracleError> {
        for p in [a, b] {
            if !p.is_finite() || !self.env.is_free(p) {
                return Err(OracleError::NotInFreeSpace(p));
            }
        }
        if segment_is_free(&self.env, a, b) {
            return Ok(OracleResult {
                cost: a.dist(b),
                path: Polyline::new(vec![a, b]),
                method: OracleMethod::Visibility,
            });
        }
        // Node ids: corners, then a = n, b = n + 1.
        let n = self.nodes.len();
        let (ia, ib) = (n, n + 1);
        let from_a: Vec<(usize, f64)> = (0..n)
            .filter(|&i| segment_is_free(&self.env, a, self.nodes[i]))
            .map(|i| (i, a.dist(self.nodes[i])))
            .collect();
        let to_b: Vec<Option<f64>> =
            (0..n).map(|i| segment_is_free(&self.env, self.nodes[i], b).then(|| b.dist(self.nodes[i]))).collect();
        let point = |i: usize| match i {
            _ if i == ia => a,
            _ if i == ib => b,
            _ => self.nodes[i],
        };
        let successors = |&i: &usize| -> Vec<(usize, OrderedFloat<f64>)> {
            if i == ia {
                return from_a.iter().map(|&(j, w)| (j, OrderedFloat(w))).collect();
            }
            if i == ib {
                return Vec::new();
            }
            let mut out: Vec<_> = self.adj[i].iter().map(|&(j, w)| (j, OrderedFloat(w))).collect();
            if let Some(w) = to_b[i] {
                out.push((ib, OrderedFloat(w)));
            }
            out
        };
        let (ids, cost) = astar(&ia, successors, |&i| OrderedFloat(point(i).dist(b)), |&i| i == ib)
            .ok_or(OracleError::Unreachable)?;
        Ok(OracleResult {
            cost: cost.0,
            path: Polyline::new(ids.into_iter().map(point).collect()),
            method: OracleMethod::Visibility,
        })
    }
}

/// Exact Euclidean shortest path between two free points.
pub fn visibility_shortest(env: &Environment, a: Point, b: Point) -> Result<OracleResult, OracleError> {
    VisibilityGraph::new(env).shortest(a, b)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Connectivity {
    Four,
    Eight,
}

/// Dijkstra over free grid cells, given as `(col, row)`. Diagonal steps cost
/// `√2` and may not cut an occupied corner. Costs are in map units.
pub fn grid_shortest(
    g: &OccupancyGrid,
    a: (usize, usize),
    b: (usize, usize),
    connectivity: Connectivity,
) -> Result<OracleResult, OracleError> {
    let free = |c: usize, r: usize| c < g.width && r < g.height && !g.occupied(c, r);
    for (c, r) in [a, b] {
        if !free(c, r) {
            return Err(OracleError::BlockedCell(c, r));
        }
    }
    let successors = |&(c, r): &(usize, usize)| {
        let mut out = Vec::with_capacity(8);
        for (dc, dr) in [(-1i64, 0i64), (1, 0), (0, -1), (0, 1), (-1, -1), (-1, 1), (1, -1), (1, 1)] {
            let diagonal = dc != 0 && dr != 0;
            if diagonal && connectivity == Connectivity::Four {
                continue;
            }
            let (nc, nr) = (c as i64 + dc, r as i64 + dr);
            if nc < 0 || nr < 0 {
                continue;
            }
            let (nc, nr) = (nc as usize, nr as usize);
            if !free(nc, nr) {
                continue;
            }
            if diagonal && !(free(nc, r) && free(c, nr)) {
                continue;
            }
            let w = if diagonal { std::f64::consts::SQRT_2 } else { 1.0 };
            out.push(((nc, nr), OrderedFloat(w * g.cell_size)));
        }
        out
    };
    let (cells, cost) = dijkstra(&a, successors, |&c| c == b).ok_or(OracleError::Unreachable)?;
    Ok(OracleResult {
        cost: cost.0,
        path: Polyline::new(cells.into_iter().map(|(c, r)| g.cell_center(c, r)).collect()),
        method: match connectivity {
            Connectivity::Four => OracleMethod::Grid4,
            Connectivity::Eight => OracleMethod::Grid8,
        },
    })
}

/// Flood-fill reachability between two free points on a raster of `env`
/// with the given cell size.
pub fn flood_fill_connected(env: &Environment, a: Point, b: Point, cell_size: f64) -> bool {
    let bb = env.bbox();
    let w = ((bb.max.x / cell_size).ceil() as usize).max(1);
    let h = ((bb.max.y / cell_size).ceil() as usize).max(1);
    let g = OccupancyGrid::new(w, h, env.rasterize(w as u32, h as u32, cell_size), cell_size);
    let cell = |p: Point| {
        (
            ((p.x / cell_size).floor().max(0.0) as usize).min(w - 1),
            ((p.y / cell_size).floor().max(0.0) as usize).min(h - 1),
        )
    };
    grid_shortest(&g, cell(a), cell(b), Connectivity::Four).is_ok()
}

/// One enumerated homotopy class with its DP optimum.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassOptimum {
    pub encoding: CdtEncoding,
    pub cost: f64,
    pub path: Polyline,
    /// No polygon is visited twice.
    pub simple: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnumerateOptions {
    /// Maximum walk length in polygons.
    pub max_len: usize,
    /// Points per cutline in the initial DP grid.
    pub dense_k: usize,
    /// Points per cutline in each refinement window.
    pub refine_k: usize,
    /// Refinement rounds around the current DP optimum.
    pub refine_rounds: usize,
    /// Skip walks that revisit a polygon.
    pub simple_only: bool,
}

impl Default for EnumerateOptions {
    fn default() -> Self {
        EnumerateOptions { max_len: 12, dense_k: 512, refine_k: 33, refine_rounds: 8, simple_only: false }
    }
}

/// All reduced walks from `locate(a)` to `locate(b)` of at most `max_len`
/// polygons, each with its within-class optimum, sorted by cost.
pub fn enumerate_class_optima(
    d: &ConvexDissection,
    a: Point,
    b: Point,
    max_len: usize,
    dense_k: usize,
) -> Result<Vec<ClassOptimum>, OracleError> {
    enumerate_class_optima_with(d, a, b, &EnumerateOptions { max_len, dense_k, ..Default::default() })
}

pub fn enumerate_class_optima_with(
    d: &ConvexDissection,
    a: Point,
    b: Point,
    opts: &EnumerateOptions,
) -> Result<Vec<ClassOptimum>, OracleError> {
    let start = d.locate(a).map_err(|_| OracleError::NotInFreeSpace(a))?;
    let goal = d.locate(b).map_err(|_| OracleError::NotInFreeSpace(b))?;
    let mut walks = Vec::new();
    let mut stack = vec![start];
    collect_walks(d, goal, opts, &mut stack, &mut walks);

    let mut out: Vec<ClassOptimum> = walks
        .into_iter()
        .map(|nodes| {
            let encoding = CdtEncoding::from_nodes(d, &nodes).expect("walk follows cutlines");
            let segs: Vec<Segment> = encoding.cutline_sequence().iter().map(|&c| d.cutline(c).segment).collect();
            let (cost, path) = dp_class_optimum(a, b, &segs, opts);
            let mut seen = nodes.clone();
            seen.sort_unstable();
            seen.dedup();
            ClassOptimum { simple: seen.len() == nodes.len(), encoding, cost, path }
        })
        .collect();
    out.sort_by(|x, y| x.cost.total_cmp(&y.cost).then_with(|| x.encoding.cmp(&y.encoding)));
    Ok(out)
}

fn collect_walks(
    d: &ConvexDissection,
    goal: PolygonId,
    opts: &EnumerateOptions,
    stack: &mut Vec<PolygonId>,
    out: &mut Vec<Vec<PolygonId>>,
) {
    let cur = *stack.last().expect("non-empty");
    if cur == goal {
        out.push(stack.clone());
    }
    if stack.len() >= opts.max_len {
        return;
    }
    let prev = stack.len().checked_sub(2).map(|i| stack[i]);
    for &c in &d.polygon(cur).cutline_ids {
        let next = d.cutline(c).other(cur).expect("incident cutline");
        if Some(next) == prev || (opts.simple_only && stack.contains(&next)) {
            continue;
        }
        stack.push(next);
        collect_walks(d, goal, opts, stack, out);
        stack.pop();
    }
}

/// Minimizes the path length over one point per cutline by layered DP on a
/// uniform parameter grid, then re-solves on shrinking windows around the
/// optimum. The objective is convex in the cutline parameters, so the
/// windows cannot miss the global minimum by more than the grid spacing.
fn dp_class_optimum(a: Point, b: Point, segs: &[Segment], opts: &EnumerateOptions) -> (f64, Polyline) {
    if segs.is_empty() {
        return (a.dist(b), Polyline::new(vec![a, b]));
    }
    let k = opts.dense_k.max(2);
    let mut windows: Vec<(f64, f64)> = vec![(0.0, 1.0); segs.len()];
    let mut grid_k = k;
    let mut best = (f64::INFINITY, Vec::new());
    for round in 0..=opts.refine_rounds {
        let params: Vec<Vec<f64>> = windows
            .iter()
            .map(|&(lo, hi)| (0..grid_k).map(|i| lo + (hi - lo) * i as f64 / (grid_k - 1) as f64).collect())
            .collect();
        let (cost, choice) = dp_layers(a, b, segs, &params);
        if cost <= best.0 {
            best = (cost, choice.clone());
        }
        if round == opts.refine_rounds {
            break;
        }
        for (j, w) in windows.iter_mut().enumerate() {
            let h = (w.1 - w.0) / (grid_k - 1) as f64;
            let t = best.1[j];
            *w = ((t - 2.0 * h).max(0.0), (t + 2.0 * h).min(1.0));
        }
        grid_k = opts.refine_k.max(3);
    }
    let mut v = Vec::with_capacity(segs.len() + 2);
    v.push(a);
    v.extend(segs.iter().zip(&best.1).map(|(s, &t)| s.at(t)));
    v.push(b);
    (best.0, Polyline::new(v))
}

/// Returns the optimal cost and chosen parameter per layer.
fn dp_layers(a: Point, b: Point, segs: &[Segment], params: &[Vec<f64>]) -> (f64, Vec<f64>) {
    let pts: Vec<Vec<Point>> = segs.iter().zip(params).map(|(s, ts)| ts.iter().map(|&t| s.at(t)).collect()).collect();
    let mut cost: Vec<f64> = pts[0].iter().map(|&p| a.dist(p)).collect();
    let mut back: Vec<Vec<usize>> = Vec::with_capacity(segs.len());
    back.push(Vec::new());
    for j in 1..pts.len() {
        let mut next = vec![f64::INFINITY; pts[j].len()];
        let mut arg = vec![0; pts[j].len()];
        for (i, &q) in pts[j].iter().enumerate() {
            for (h, &p) in pts[j - 1].iter().enumerate() {
                let c = cost[h] + p.dist(q);
                if c < next[i] {
                    next[i] = c;
                    arg[i] = h;
                }
            }
        }
        cost = next;
        back.push(arg);
    }
    let last = pts.len() - 1;
    let (mut i, total) = pts[last]
        .iter()
        .enumerate()
        .map(|(i, &p)| (i, cost[i] + p.dist(b)))
        .min_by(|x, y| x.1.total_cmp(&y.1))
        .expect("non-empty layer");
    let mut choice = vec![0.0; pts.len()];
    for j in (0..pts.len()).rev() {
        choice[j] = params[j][i];
        if j > 0 {
            i = back[j][i];
        }
    }
    (total, choice)
}
