//! Convex dissection of free space and its topology graph.
//!
//! Free space is triangulated with a constrained Delaunay triangulation whose
//! constraints are the boundary and obstacle edges. Triangles are then merged
//! greedily (Hertel-Mehlhorn) across their shared diagonals, longest first,
//! whenever the union stays convex. Diagonals that survive are the cutlines.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use spade::{ConstrainedDelaunayTriangulation, Point2, Triangulation};
use thiserror::Error;

use crate::env_model::{is_convex_ccw, Environment};
use crate::geometry::{
    centroid, point_in_convex_polygon, point_in_polygon, polygon_edges, signed_area, Aabb, Containment, Point, Segment,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PolygonId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CutlineId(pub u32);

impl PolygonId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl CutlineId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for PolygonId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for CutlineId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "c{}", self.0)
    }
}

#[derive(Debug, Error)]
pub enum DissectionError {
    #[error("triangulation failed: {0}")]
    Triangulation(String),
    #[error("point {0} is not in free space")]
    NotInFreeSpace(Point),
    #[error("unknown cutline {0}")]
    UnknownCutline(CutlineId),
    #[error("snapshot: {0}")]
    Snapshot(String),
    #[error(transparent)]
    Env(#[from] crate::env_model::EnvError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvexPolygon {
    pub id: PolygonId,
    /// Counter-clockwise vertices.
    pub vertices: Vec<Point>,
    /// Incident cutlines in ascending id order.
    pub cutline_ids: Vec<CutlineId>,
}

impl ConvexPolygon {
    pub fn contains(&self, p: Point, eps: f64) -> bool {
        point_in_convex_polygon(p, &self.vertices, eps)
    }

    pub fn bbox(&self) -> Aabb {
        Aabb::from_points(&self.vertices).expect("polygon has vertices")
    }
}

/// Shared full edge between two adjacent polygons. `left` sees the segment
/// `a -> b` as one of its counter-clockwise edges.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cutline {
    pub id: CutlineId,
    pub segment: Segment,
    pub left: PolygonId,
    pub right: PolygonId,
}

impl Cutline {
    pub fn at(&self, t: f64) -> Point {
        self.segment.at(t)
    }

    pub fn length(&self) -> f64 {
        self.segment.length()
    }

    pub fn is_incident(&self, p: PolygonId) -> bool {
        self.left == p || self.right == p
    }

    /// The polygon on the other side from `p`, if `p` is incident.
    pub fn other(&self, p: PolygonId) -> Option<PolygonId> {
        if p == self.left {
            Some(self.right)
        } else if p == self.right {
            Some(self.left)
        } else {
            None
        }
    }
}

/// Undirected multigraph-free graph with one node per polygon and one edge
/// per cutline.
#[derive(Debug, Clone, PartialEq)]
pub struct TopologyGraph {
    pub nodes: Vec<PolygonId>,
    pub edges: Vec<(CutlineId, PolygonId, PolygonId)>,
    component: Vec<u32>,
    components: usize,
}

impl TopologyGraph {
    fn build(n_nodes: usize, cutlines: &[Cutline]) -> Self {
        let mut parent: Vec<usize> = (0..n_nodes).collect();
        fn find(parent: &mut [usize], mut i: usize) -> usize {
            while parent[i] != i {
                parent[i] = parent[parent[i]];
                i = parent[i];
            }
            i
        }
        for c in cutlines {
            let (a, b) = (find(&mut parent, c.left.index()), find(&mut parent, c.right.index()));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
        let mut label = HashMap::new();
        let component: Vec<u32> = (0..n_nodes)
            .map(|i| {
                let r = find(&mut parent, i);
                let next = label.len() as u32;
                *label.entry(r).or_insert(next)
            })
            .collect();
        TopologyGraph {
            nodes: (0..n_nodes as u32).map(PolygonId).collect(),
            edges: cutlines.iter().map(|c| (c.id, c.left, c.right)).collect(),
            component,
            components: label.len(),
        }
    }

    pub fn component_count(&self) -> usize {
        self.components
    }

    pub fn component_of(&self, p: PolygonId) -> u32 {
        self.component[p.index()]
    }

    pub fn connected(&self, a: PolygonId, b: PolygonId) -> bool {
        self.component_of(a) == self.component_of(b)
    }

    /// Independent cycles: `E - V + C`.
    pub fn cycle_count(&self) -> usize {
        self.edges.len() + self.components - self.nodes.len()
    }
}

/// Uniform bucket grid over polygon bounding boxes.
#[derive(Debug, Clone, PartialEq)]
pub struct GridLocator {
    origin: Point,
    cell: f64,
    cols: usize,
    rows: usize,
    buckets: Vec<Vec<PolygonId>>,
}

impl GridLocator {
    fn build(bbox: Aabb, polygons: &[ConvexPolygon], eps: f64) -> Self {
        let n = polygons.len().max(1) as f64;
        let per_axis = (2.0 * n.sqrt()).ceil().clamp(1.0, 512.0);
        let span = bbox.width().max(bbox.height()).max(eps);
        let cell = span / per_axis;
        let cols = ((bbox.width() / cell).ceil() as usize).max(1);
        let rows = ((bbox.height() / cell).ceil() as usize).max(1);
        let mut loc = GridLocator { origin: bbox.min, cell, cols, rows, buckets: vec![Vec::new(); cols * rows] };
        for poly in polygons {
            let bb = poly.bbox();
            let (c0, r0) = loc.cell_clamped(Point::new(bb.min.x - eps, bb.min.y - eps));
            let (c1, r1) = loc.cell_clamped(Point::new(bb.max.x + eps, bb.max.y + eps));
            for r in r0..=r1 {
                for c in c0..=c1 {
                    loc.buckets[r * cols + c].push(poly.id);
                }
            }
        }
        loc
    }

    fn cell_clamped(&self, p: Point) -> (usize, usize) {
        let c = ((p.x - self.origin.x) / self.cell).floor().clamp(0.0, (self.cols - 1) as f64);
        let r = ((p.y - self.origin.y) / self.cell).floor().clamp(0.0, (self.rows - 1) as f64);
        (c as usize, r as usize)
    }

    fn candidates(&self, p: Point) -> &[PolygonId] {
        let (c, r) = self.cell_clamped(p);
        &self.buckets[r * self.cols + c]
    }
}

/// Where to look for adjacent cutlines.
#[derive(Debug, Clone, Copy)]
pub enum Adjacency<'a> {
    Point(Point),
    Cutline(CutlineId),
    Set(&'a [CutlineId]),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvexDissection {
    pub env: Environment,
    pub eps: f64,
    pub polygons: Vec<ConvexPolygon>,
    pub cutlines: Vec<Cutline>,
    pub graph: TopologyGraph,
    pub locator: GridLocator,
}

impl ConvexDissection {
    /// Builds the dissection of the environment's free space.
    pub fn build(env: &Environment) -> Result<Self, DissectionError> {
        build_topology_graph(env)
    }

    pub fn polygon(&self, id: PolygonId) -> &ConvexPolygon {
        &self.polygons[id.index()]
    }

    pub fn cutline(&self, id: CutlineId) -> &Cutline {
        &self.cutlines[id.index()]
    }

    /// The cutline joining two polygons, if they are adjacent.
    pub fn cutline_between(&self, a: PolygonId, b: PolygonId) -> Option<CutlineId> {
        self.polygon(a).cutline_ids.iter().copied().find(|&c| self.cutline(c).other(a) == Some(b))
    }

    /// All polygons whose closure contains `p`, ascending.
    pub fn containing(&self, p: Point) -> Vec<PolygonId> {
        let mut out: Vec<PolygonId> =
            self.locator.candidates(p).iter().copied().filter(|&id| self.polygon(id).contains(p, self.eps)).collect();
        out.sort_unstable();
        out
    }

    /// The polygon containing `p`; on shared edges or vertices, the smallest id.
    pub fn locate(&self, p: Point) -> Result<PolygonId, DissectionError> {
        if !p.is_finite() {
            return Err(DissectionError::NotInFreeSpace(p));
        }
        self.locator
            .candidates(p)
            .iter()
            .copied()
            .filter(|&id| self.polygon(id).contains(p, self.eps))
            .min()
            .ok_or(DissectionError::NotInFreeSpace(p))
    }

    pub fn adjacent_cutlines(&self, at: Adjacency<'_>) -> Result<Vec<CutlineId>, DissectionError> {
        match at {
            Adjacency::Point(p) => self.cutlines_adjacent_to_point(p),
            Adjacency::Cutline(c) => self.cutlines_adjacent_to_cutline(c),
            Adjacency::Set(set) => {
                let mut acc = BTreeSet::new();
                for &c in set {
                    acc.extend(self.cutlines_adjacent_to_cutline(c)?);
                }
                Ok(acc.into_iter().collect())
            }
        }
    }

    /// Cutlines of every polygon containing `p`.
    pub fn cutlines_adjacent_to_point(&self, p: Point) -> Result<Vec<CutlineId>, DissectionError> {
        let polys = self.containing(p);
        if polys.is_empty() {
            return Err(DissectionError::NotInFreeSpace(p));
        }
        let set: BTreeSet<CutlineId> =
            polys.iter().flat_map(|&id| self.polygon(id).cutline_ids.iter().copied()).collect();
        Ok(set.into_iter().collect())
    }

    /// Cutlines of both incident polygons of `c`, excluding `c`.
    pub fn cutlines_adjacent_to_cutline(&self, c: CutlineId) -> Result<Vec<CutlineId>, DissectionError> {
        let cut = self.cutlines.get(c.index()).ok_or(DissectionError::UnknownCutline(c))?;
        let set: BTreeSet<CutlineId> = [cut.left, cut.right]
            .iter()
            .flat_map(|&id| self.polygon(id).cutline_ids.iter().copied())
            .filter(|&x| x != c)
            .collect();
        Ok(set.into_iter().collect())
    }

    /// Sequence of polygons around a shared vertex `v`, from `from` to `to`,
    /// moving only across cutlines that end at `v`. Used to resolve paths
    /// that pass exactly through a vertex.
    pub fn walk_around_vertex(&self, v: Point, from: PolygonId, to: PolygonId) -> Option<Vec<CutlineId>> {
        let mut prev: HashMap<PolygonId, (PolygonId, CutlineId)> = HashMap::new();
        let mut queue = VecDeque::from([from]);
        let mut seen = BTreeSet::from([from]);
        while let Some(p) = queue.pop_front() {
            if p == to {
                let mut path = Vec::new();
                let mut cur = to;
                while cur != from {
                    let (q, c) = prev[&cur];
                    path.push(c);
                    cur = q;
                }
                path.reverse();
                return Some(path);
            }
            for &c in &self.polygon(p).cutline_ids {
                let cut = self.cutline(c);
                if !cut.segment.contains(v, self.eps) {
                    continue;
                }
                let q = cut.other(p).expect("incident");
                if seen.insert(q) {
                    prev.insert(q, (p, c));
                    queue.push_back(q);
                }
            }
        }
        None
    }

    pub fn validate(&self, samples: usize, seed: u64) -> ValidationReport {
        validate_dissection(self, samples, seed)
    }
}

/// Vertex table with tolerance-based deduplication.
struct VertexTable {
    points: Vec<Point>,
    index: HashMap<(i64, i64), usize>,
    quantum: f64,
}

impl VertexTable {
    fn new(eps: f64) -> Self {
        VertexTable { points: Vec::new(), index: HashMap::new(), quantum: (eps * 16.0).max(1e-12) }
    }

    fn key(&self, p: Point) -> (i64, i64) {
        ((p.x / self.quantum).round() as i64, (p.y / self.quantum).round() as i64)
    }

    fn intern(&mut self, p: Point) -> usize {
        let (kx, ky) = self.key(p);
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(&i) = self.index.get(&(kx + dx, ky + dy)) {
                    if self.points[i].dist(p) <= self.quantum {
                        return i;
                    }
                }
            }
        }
        let i = self.points.len();
        self.points.push(p);
        self.index.insert((kx, ky), i);
        i
    }
}

/// Boundary and obstacle edges as a planar straight-line graph, split at
/// every vertex that lies on another edge.
fn constraint_graph(env: &Environment, eps: f64) -> (Vec<Point>, Vec<(usize, usize)>) {
    let mut table = VertexTable::new(eps);
    let mut raw = Vec::new();
    for ring in env.polygons() {
        let ids: Vec<usize> = ring.iter().map(|&p| table.intern(p)).collect();
        for i in 0..ids.len() {
            let (a, b) = (ids[i], ids[(i + 1) % ids.len()]);
            if a != b {
                raw.push((a, b));
            }
        }
    }
    let pts = table.points;
    let mut edges = BTreeSet::new();
    for (a, b) in raw {
        let seg = Segment::new(pts[a], pts[b]);
        let bb = Aabb::from_points([&seg.a, &seg.b]).unwrap();
        let mut on: Vec<(f64, usize)> = pts
            .iter()
            .enumerate()
            .filter(|&(i, &p)| i != a && i != b && bb.contains(p, eps) && seg.contains(p, eps))
            .map(|(i, &p)| (seg.project_param(p), i))
            .collect();
        on.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut chain = vec![a];
        chain.extend(on.into_iter().map(|(_, i)| i));
        chain.push(b);
        for w in chain.windows(2) {
            edges.insert((w[0].min(w[1]), w[0].max(w[1])));
        }
    }
    (pts, edges.into_iter().collect())
}

/// Builds the convex dissection and topology graph for `env`.
pub fn build_topology_graph(env: &Environment) -> Result<ConvexDissection, DissectionError> {
    let eps = env.eps();
    let (pts, constraints) = constraint_graph(env, eps);

    let mut cdt: ConstrainedDelaunayTriangulation<Point2<f64>> = ConstrainedDelaunayTriangulation::new();
    let mut handles = Vec::with_capacity(pts.len());
    let mut back: HashMap<usize, usize> = HashMap::new();
    for (i, p) in pts.iter().enumerate() {
        let h = cdt.insert(Point2::new(p.x, p.y)).map_err(|e| DissectionError::Triangulation(format!("{e:?}")))?;
        back.insert(h.index(), i);
        handles.push(h);
    }
    for &(a, b) in &constraints {
        if !cdt.can_add_constraint(handles[a], handles[b]) {
            return Err(DissectionError::Triangulation(format!(
                "constraint {}-{} crosses another constraint",
                pts[a], pts[b]
            )));
        }
        cdt.add_constraint(handles[a], handles[b]);
    }

    // Triangles as CCW vertex-index triples.
    let mut tris: Vec<[usize; 3]> = Vec::new();
    for f in cdt.inner_faces() {
        let vs = f.vertices();
        let mut t = [back[&vs[0].fix().index()], back[&vs[1].fix().index()], back[&vs[2].fix().index()]];
        let area = signed_area(&[pts[t[0]], pts[t[1]], pts[t[2]]]);
        if area.abs() <= eps * eps {
            continue;
        }
        if area < 0.0 {
            t.swap(1, 2);
        }
        tris.push(t);
    }
    let constraint_set: BTreeSet<(usize, usize)> = cdt
        .undirected_edges()
        .filter(|e| e.is_constraint_edge())
        .map(|e| {
            let [u, v] = e.vertices();
            let (u, v) = (back[&u.fix().index()], back[&v.fix().index()]);
            (u.min(v), u.max(v))
        })
        .collect();

    // Edge -> incident triangles.
    let mut edge_tris: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for (ti, t) in tris.iter().enumerate() {
        for k in 0..3 {
            let (u, v) = (t[k], t[(k + 1) % 3]);
            edge_tris.entry((u.min(v), u.max(v))).or_default().push(ti);
        }
    }

    // Regions of triangles connected across non-constraint edges are
    // uniformly free or blocked; classify one triangle per region.
    let mut region = vec![usize::MAX; tris.len()];
    let mut free_region = Vec::new();
    for seed in 0..tris.len() {
        if region[seed] != usize::MAX {
            continue;
        }
        let rid = free_region.len();
        region[seed] = rid;
        let mut stack = vec![seed];
        while let Some(ti) = stack.pop() {
            let t = tris[ti];
            for k in 0..3 {
                let key = (t[k].min(t[(k + 1) % 3]), t[k].max(t[(k + 1) % 3]));
                if constraint_set.contains(&key) {
                    continue;
                }
                for &tj in &edge_tris[&key] {
                    if region[tj] == usize::MAX {
                        region[tj] = rid;
                        stack.push(tj);
                    }
                }
            }
        }
        let t = tris[seed];
        let c = centroid(&[pts[t[0]], pts[t[1]], pts[t[2]]]);
        let free = point_in_polygon(c, &env.boundary, eps) == Containment::Inside
            && env.obstacles.iter().all(|o| point_in_polygon(c, o, eps) == Containment::Outside);
        free_region.push(free);
    }
    let free_tris: Vec<usize> = (0..tris.len()).filter(|&t| free_region[region[t]]).collect();
    if free_tris.is_empty() {
        return Err(DissectionError::Triangulation("no free triangles".into()));
    }

    // Hertel-Mehlhorn: polygon cycles keyed by union-find root.
    let n = tris.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    let mut cycles: Vec<Option<Vec<usize>>> = vec![None; n];
    for &t in &free_tris {
        cycles[t] = Some(tris[t].to_vec());
    }
    let is_free = |t: usize| free_region[region[t]];
    // Diagonals in canonical (u < v) order define the tie-break ids.
    let mut diagonals: Vec<((usize, usize), usize, usize)> = edge_tris
        .iter()
        .filter(|(k, ts)| ts.len() == 2 && !constraint_set.contains(k) && is_free(ts[0]) && is_free(ts[1]))
        .map(|(&k, ts)| (k, ts[0], ts[1]))
        .collect();
    diagonals.sort_by_key(|d| d.0);
    let mut order: Vec<usize> = (0..diagonals.len()).collect();
    order.sort_by(|&i, &j| {
        let li = pts[diagonals[i].0 .0].dist(pts[diagonals[i].0 .1]);
        let lj = pts[diagonals[j].0 .0].dist(pts[diagonals[j].0 .1]);
        lj.total_cmp(&li).then(i.cmp(&j))
    });
    let mut removed = vec![false; diagonals.len()];
    for &di in &order {
        let ((u, v), t1, t2) = diagonals[di];
        let (p, q) = (find(&mut parent, t1), find(&mut parent, t2));
        if p == q {
            continue;
        }
        let pc = cycles[p].as_ref().unwrap();
        let qc = cycles[q].as_ref().unwrap();
        if let Some(merged) = try_merge(pc, qc, u, v, &pts, eps) {
            let root = p.min(q);
            let other = p.max(q);
            parent[other] = root;
            cycles[other] = None;
            cycles[root] = Some(merged);
            removed[di] = true;
        }
    }

    // Final polygons, ordered by their smallest triangle index.
    let mut poly_of_root: HashMap<usize, PolygonId> = HashMap::new();
    let mut polygons: Vec<ConvexPolygon> = Vec::new();
    let mut vertex_cycles: Vec<Vec<usize>> = Vec::new();
    for &t in &free_tris {
        let r = find(&mut parent, t);
        if poly_of_root.contains_key(&r) {
            continue;
        }
        let id = PolygonId(polygons.len() as u32);
        poly_of_root.insert(r, id);
        let cyc = cycles[r].clone().expect("root carries the cycle");
        polygons.push(ConvexPolygon { id, vertices: cyc.iter().map(|&i| pts[i]).collect(), cutline_ids: Vec::new() });
        vertex_cycles.push(cyc);
    }

    let mut cutlines = Vec::new();
    for (di, &((u, v), t1, t2)) in diagonals.iter().enumerate() {
        if removed[di] {
            continue;
        }
        let p1 = poly_of_root[&find(&mut parent, t1)];
        let p2 = poly_of_root[&find(&mut parent, t2)];
        debug_assert_ne!(p1, p2);
        // Orient so that `left` has the directed edge a -> b.
        let has_edge =
            |cyc: &[usize], a: usize, b: usize| (0..cyc.len()).any(|i| cyc[i] == a && cyc[(i + 1) % cyc.len()] == b);
        let (a, b) = if has_edge(&vertex_cycles[p1.index()], u, v) { (u, v) } else { (v, u) };
        let (left, right) = if has_edge(&vertex_cycles[p1.index()], a, b) { (p1, p2) } else { (p2, p1) };
        let id = CutlineId(cutlines.len() as u32);
        cutlines.push(Cutline { id, segment: Segment::new(pts[a], pts[b]), left, right });
        polygons[left.index()].cutline_ids.push(id);
        polygons[right.index()].cutline_ids.push(id);
    }
    for p in &mut polygons {
        p.cutline_ids.sort_unstable();
    }

    Ok(assemble(env.clone(), eps, polygons, cutlines))
}

fn assemble(env: Environment, eps: f64, polygons: Vec<ConvexPolygon>, cutlines: Vec<Cutline>) -> ConvexDissection {
    let graph = TopologyGraph::build(polygons.len(), &cutlines);
    let locator = GridLocator::build(env.bbox(), &polygons, eps);
    ConvexDissection { env, eps, polygons, cutlines, graph, locator }
}

/// Merges two CCW cycles across their shared edge {u, v} if the result is
/// convex at both ends of the removed edge.
fn try_merge(pc: &[usize], qc: &[usize], u: usize, v: usize, pts: &[Point], eps: f64) -> Option<Vec<usize>> {
    let pos =
        |cyc: &[usize], a: usize, b: usize| (0..cyc.len()).find(|&i| cyc[i] == a && cyc[(i + 1) % cyc.len()] == b);
    // P holds a -> b, Q holds b -> a.
    let (a, b, ip) = match pos(pc, u, v) {
        Some(i) => (u, v, i),
        None => (v, u, pos(pc, v, u)?),
    };
    let iq = pos(qc, b, a)?;
    let (np, nq) = (pc.len(), qc.len());
    let p_prev_a = pts[pc[(ip + np - 1) % np]];
    let p_next_b = pts[pc[(ip + 2) % np]];
    let q_prev_b = pts[qc[(iq + nq - 1) % nq]];
    let q_next_a = pts[qc[(iq + 2) % nq]];
    let convex_at = |prev: Point, at: Point, next: Point| {
        let d = at - prev;
        d.cross(next - at) >= -eps * d.norm()
    };
    if !convex_at(p_prev_a, pts[a], q_next_a) || !convex_at(q_prev_b, pts[b], p_next_b) {
        return None;
    }
    // Walk P from b around to a, then Q from a's successor to b's predecessor.
    let mut out = Vec::with_capacity(np + nq - 2);
    for k in 0..np {
        out.push(pc[(ip + 1 + k) % np]);
    }
    for k in 0..nq - 2 {
        out.push(qc[(iq + 2 + k) % nq]);
    }
    Some(out)
}

/// Result of [`validate_dissection`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub samples: usize,
    pub free_samples: usize,
    pub covered_once: usize,
    pub uncovered: usize,
    pub multiply_covered: usize,
    /// Non-free samples that some polygon claims.
    pub covered_outside: usize,
    pub convexity_violations: Vec<PolygonId>,
    pub pairing_violations: Vec<String>,
}

impl ValidationReport {
    pub fn coverage(&self) -> f64 {
        if self.free_samples == 0 {
            1.0
        } else {
            self.covered_once as f64 / self.free_samples as f64
        }
    }

    pub fn passed(&self) -> bool {
        self.uncovered == 0
            && self.multiply_covered == 0
            && self.covered_outside == 0
            && self.convexity_violations.is_empty()
            && self.pairing_violations.is_empty()
    }
}

/// Monte-Carlo coverage check plus exhaustive convexity and cutline pairing
/// checks. Uses brute force over all polygons, not the locator.
pub fn validate_dissection(d: &ConvexDissection, samples: usize, seed: u64) -> ValidationReport {
    let eps = d.eps;
    let env = &d.env;
    let bb = env.bbox();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let poly_edges: Vec<Segment> = d.polygons.iter().flat_map(|p| polygon_edges(&p.vertices)).collect();

    let mut report = ValidationReport {
        samples,
        free_samples: 0,
        covered_once: 0,
        uncovered: 0,
        multiply_covered: 0,
        covered_outside: 0,
        convexity_violations: Vec::new(),
        pairing_violations: Vec::new(),
    };
    let margin = 10.0 * eps;
    for _ in 0..samples {
        let p = Point::new(rng.gen_range(bb.min.x..=bb.max.x), rng.gen_range(bb.min.y..=bb.max.y));
        if env.clearance(p) <= margin || poly_edges.iter().any(|e| e.distance_to(p) <= margin) {
            continue;
        }
        let hits = d.polygons.iter().filter(|poly| poly.contains(p, eps)).count();
        if env.is_free(p) {
            report.free_samples += 1;
            match hits {
                0 => report.uncovered += 1,
                1 => report.covered_once += 1,
                _ => report.multiply_covered += 1,
            }
        } else if hits > 0 {
            report.covered_outside += 1;
        }
    }

    for poly in &d.polygons {
        if !is_convex_ccw(&poly.vertices, eps) {
            report.convexity_violations.push(poly.id);
        }
    }

    let by_id: HashMap<PolygonId, &ConvexPolygon> = d.polygons.iter().map(|p| (p.id, p)).collect();
    let has_edge = |poly: &ConvexPolygon, a: Point, b: Point| {
        polygon_edges(&poly.vertices).any(|e| e.a.approx_eq(a, eps) && e.b.approx_eq(b, eps))
    };
    let env_edges: Vec<Segment> = env.edges().collect();
    for c in &d.cutlines {
        if c.left == c.right {
            report.pairing_violations.push(format!("{} has identical sides", c.id));
            continue;
        }
        match (by_id.get(&c.left), by_id.get(&c.right)) {
            (Some(l), Some(r)) => {
                if !has_edge(l, c.segment.a, c.segment.b) || !has_edge(r, c.segment.b, c.segment.a) {
                    report.pairing_violations.push(format!("{} is not a shared edge", c.id));
                }
                if !l.cutline_ids.contains(&c.id) || !r.cutline_ids.contains(&c.id) {
                    report.pairing_violations.push(format!("{} missing from incident polygons", c.id));
                }
            }
            _ => report.pairing_violations.push(format!("{} references a missing polygon", c.id)),
        }
        if env_edges.iter().any(|e| e.contains(c.segment.midpoint(), eps)) {
            report.pairing_violations.push(format!("{} runs along an obstacle edge", c.id));
        }
    }
    for poly in &d.polygons {
        for e in polygon_edges(&poly.vertices) {
            let is_cut = poly.cutline_ids.iter().any(|&cid| {
                d.cutlines.get(cid.index()).is_some_and(|c| {
                    (c.segment.a.approx_eq(e.a, eps) && c.segment.b.approx_eq(e.b, eps))
                        || (c.segment.a.approx_eq(e.b, eps) && c.segment.b.approx_eq(e.a, eps))
                })
            });
            let on_env = env_edges.iter().any(|f| f.contains(e.midpoint(), eps));
            if !is_cut && !on_env {
                report
                    .pairing_violations
                    .push(format!("polygon {} edge {e} is neither a cutline nor an obstacle edge", poly.id));
            }
        }
    }
    report
}

#[derive(Debug, Serialize, Deserialize)]
struct PolygonRecord {
    id: PolygonId,
    vertices: Vec<Point>,
    cutlines: Vec<CutlineId>,
}

#[derive(Debug, Serialize, Deserialize)]
struct CutlineRecord {
    id: CutlineId,
    a: Point,
    b: Point,
    left: PolygonId,
    right: PolygonId,
}

#[derive(Debug, Serialize, Deserialize)]
struct EnvRecord {
    boundary: Vec<Point>,
    obstacles: Vec<Vec<Point>>,
}

/// JSON form of a dissection, reloadable without re-triangulating.
#[derive(Debug, Serialize, Deserialize)]
pub struct DissectionSnapshot {
    pub format: String,
    pub env_hash: String,
    environment: EnvRecord,
    source_resolution: Option<(u32, u32)>,
    polygons: Vec<PolygonRecord>,
    cutlines: Vec<CutlineRecord>,
    graph_edges: Vec<(CutlineId, PolygonId, PolygonId)>,
}

pub const SNAPSHOT_FORMAT: &str = "cdt-dissection/1";

impl ConvexDissection {
    pub fn to_snapshot(&self) -> DissectionSnapshot {
        DissectionSnapshot {
            format: SNAPSHOT_FORMAT.into(),
            env_hash: self.env.content_hash(),
            environment: EnvRecord { boundary: self.env.boundary.clone(), obstacles: self.env.obstacles.clone() },
            source_resolution: self.env.source_resolution,
            polygons: self
                .polygons
                .iter()
                .map(|p| PolygonRecord { id: p.id, vertices: p.vertices.clone(), cutlines: p.cutline_ids.clone() })
                .collect(),
            cutlines: self
                .cutlines
                .iter()
                .map(|c| CutlineRecord { id: c.id, a: c.segment.a, b: c.segment.b, left: c.left, right: c.right })
                .collect(),
            graph_edges: self.graph.edges.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_snapshot()).expect("snapshot serializes")
    }

    pub fn from_snapshot(s: DissectionSnapshot) -> Result<Self, DissectionError> {
        if s.format != SNAPSHOT_FORMAT {
            return Err(DissectionError::Snapshot(format!("unsupported format {:?}", s.format)));
        }
        let mut env = Environment::new(s.environment.boundary, s.environment.obstacles)?;
        env.source_resolution = s.source_resolution;
        if env.content_hash() != s.env_hash {
            return Err(DissectionError::Snapshot("environment hash mismatch".into()));
        }
        let polygons: Vec<ConvexPolygon> = s
            .polygons
            .into_iter()
            .map(|r| ConvexPolygon { id: r.id, vertices: r.vertices, cutline_ids: r.cutlines })
            .collect();
        let cutlines: Vec<Cutline> = s
            .cutlines
            .into_iter()
            .map(|r| Cutline { id: r.id, segment: Segment::new(r.a, r.b), left: r.left, right: r.right })
            .collect();
        if polygons.iter().enumerate().any(|(i, p)| p.id.index() != i)
            || cutlines.iter().enumerate().any(|(i, c)| c.id.index() != i)
        {
            return Err(DissectionError::Snapshot("ids must be dense and ordered".into()));
        }
        if cutlines.iter().any(|c| c.left.index() >= polygons.len() || c.right.index() >= polygons.len()) {
            return Err(DissectionError::Snapshot("cutline references unknown polygon".into()));
        }
        let eps = env.eps();
        Ok(assemble(env, eps, polygons, cutlines))
    }

    pub fn from_json(text: &str) -> Result<Self, DissectionError> {
        Self::from_snapshot(serde_json::from_str(text)?)
    }
}
