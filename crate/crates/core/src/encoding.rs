//! Homotopy-class encodings: walks in the topology graph.
//!
//! An encoding records the polygons a path visits and the cutline crossed
//! between each consecutive pair. Concatenation with a cutline symbol extends
//! the walk across that cutline from whichever side the walk ends on.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::dissection::{ConvexDissection, CutlineId, DissectionError, PolygonId};
use crate::geometry::{Point, Polyline};

#[derive(Debug, Error, PartialEq)]
pub enum EncodingError {
    #[error("point {0} is not in free space")]
    NotInFreeSpace(Point),
    #[error("path leaves free space at {0}")]
    LeavesFreeSpace(Point),
    #[error("path runs along cutline {0}")]
    AlongCutline(CutlineId),
    #[error("path tracing made no progress near {0}")]
    Stuck(Point),
    #[error("malformed encoding: {0}")]
    Malformed(String),
}

impl From<DissectionError> for EncodingError {
    fn from(e: DissectionError) -> Self {
        match e {
            DissectionError::NotInFreeSpace(p) => EncodingError::NotInFreeSpace(p),
            other => EncodingError::Malformed(other.to_string()),
        }
    }
}

/// A cutline used as a concatenation symbol; it stands for both crossing
/// directions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CutlineSymbol(pub CutlineId);

/// A polygon walk with its crossing sequence. Ordering is lexicographic by
/// node ids, which is also the tie-break order used by queries.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CdtEncoding {
    nodes: Vec<PolygonId>,
    crossings: Vec<CutlineId>,
}

impl fmt::Display for CdtEncoding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, n) in self.nodes.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}", n.0)?;
        }
        Ok(())
    }
}

impl CdtEncoding {
    /// The single-node walk of a constant path.
    pub fn single(node: PolygonId) -> Self {
        CdtEncoding { nodes: vec![node], crossings: Vec::new() }
    }

    /// Builds a walk from polygon ids, looking up the crossing cutlines.
    pub fn from_nodes(d: &ConvexDissection, nodes: &[PolygonId]) -> Result<Self, EncodingError> {
        let first = *nodes.first().ok_or_else(|| EncodingError::Malformed("empty walk".into()))?;
        if first.index() >= d.polygons.len() {
            return Err(EncodingError::Malformed(format!("unknown polygon {first}")));
        }
        let mut enc = CdtEncoding::single(first);
        for w in nodes.windows(2) {
            if w[1].index() >= d.polygons.len() {
                return Err(EncodingError::Malformed(format!("unknown polygon {}", w[1])));
            }
            let c = d
                .cutline_between(w[0], w[1])
                .ok_or_else(|| EncodingError::Malformed(format!("{} and {} are not adjacent", w[0], w[1])))?;
            enc.nodes.push(w[1]);
            enc.crossings.push(c);
        }
        Ok(enc)
    }

    /// Parses the comma-separated node form, e.g. `"3,5,9"`.
    pub fn parse(d: &ConvexDissection, s: &str) -> Result<Self, EncodingError> {
        let nodes = s
            .split(',')
            .map(|t| t.trim().parse::<u32>().map(PolygonId))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| EncodingError::Malformed(format!("{s:?}: {e}")))?;
        Self::from_nodes(d, &nodes)
    }

    pub fn nodes(&self) -> &[PolygonId] {
        &self.nodes
    }

    pub fn first(&self) -> PolygonId {
        self.nodes[0]
    }

    pub fn last(&self) -> PolygonId {
        *self.nodes.last().expect("walks are non-empty")
    }

    /// Crossed cutlines in order; empty for a single-node walk.
    pub fn cutline_sequence(&self) -> &[CutlineId] {
        &self.crossings
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Extends the walk across `s`, or `None` when the walk does not end on
    /// either side of that cutline.
    pub fn concat(&self, d: &ConvexDissection, s: CutlineSymbol) -> Option<CdtEncoding> {
        let cut = d.cutlines.get(s.0.index())?;
        let next = cut.other(self.last())?;
        let mut out = self.clone();
        out.nodes.push(next);
        out.crossings.push(s.0);
        Some(out)
    }

    /// True when the walk ends with a crossing of `c` followed by its
    /// immediate reversal.
    pub fn has_backtrack(&self) -> bool {
        self.crossings.windows(2).any(|w| w[0] == w[1])
    }
}

/// Walk of the polygon containing `x`.
pub fn trivial_encoding(d: &ConvexDissection, x: Point) -> Result<CdtEncoding, EncodingError> {
    Ok(CdtEncoding::single(d.locate(x)?))
}

/// Set equality under exact walk equality.
pub fn encoding_set_equal<'a>(
    a: impl IntoIterator<Item = &'a CdtEncoding>,
    b: impl IntoIterator<Item = &'a CdtEncoding>,
) -> bool {
    let sa: BTreeSet<&CdtEncoding> = a.into_iter().collect();
    let sb: BTreeSet<&CdtEncoding> = b.into_iter().collect();
    sa == sb
}

/// Encodes a concrete path by tracing it through the dissection.
///
/// The walk starts at `locate(first vertex)` and gains one node per cutline
/// crossing. Passing exactly through a shared vertex is resolved by walking
/// around that vertex on the free side. Back-and-forth crossings are kept.
pub fn encode_path(d: &ConvexDissection, path: &Polyline) -> Result<CdtEncoding, EncodingError> {
    let eps = d.eps;
    let start = path.first();
    let mut cur = d.locate(start)?;
    let mut enc = CdtEncoding::single(cur);
    for seg in path.segments() {
        let dir = seg.dir();
        let len = dir.norm();
        if len <= eps {
            continue;
        }
        let unit = dir * (1.0 / len);
        let tol = eps / len;
        let mut t = 0.0f64;
        let mut guard = 0usize;
        loop {
            let poly = d.polygon(cur);
            if poly.contains(seg.b, eps) && exit_param(&poly.vertices, seg.a, dir, t) >= 1.0 - tol {
                break;
            }
            guard += 1;
            if guard > 4 * d.polygons.len() + 16 {
                return Err(EncodingError::Stuck(seg.at(t)));
            }
            let t_exit = exit_param(&poly.vertices, seg.a, dir, t).min(1.0);
            let x = seg.at(t_exit);
            let next = entered_polygon(d, cur, x, unit)?;
            let hops = match d.cutline_between(cur, next) {
                Some(c) if d.cutline(c).segment.contains(x, eps) => vec![c],
                _ => d.walk_around_vertex(x, cur, next).ok_or(EncodingError::LeavesFreeSpace(x))?,
            };
            for c in hops {
                enc = enc.concat(d, CutlineSymbol(c)).expect("hop starts at the current polygon");
            }
            cur = next;
            t = t_exit;
        }
    }
    Ok(enc)
}

/// Largest parameter `t' >= t` such that `a + t' dir` stays in the convex
/// polygon.
fn exit_param(poly: &[Point], a: Point, dir: Point, t: f64) -> f64 {
    let n = poly.len();
    let mut t_exit = f64::INFINITY;
    for i in 0..n {
        let (u, v) = (poly[i], poly[(i + 1) % n]);
        let e = v - u;
        let rate = e.cross(dir);
        if rate < 0.0 {
            let te = -e.cross(a - u) / rate;
            t_exit = t_exit.min(te);
        }
    }
    t_exit.max(t)
}

/// The polygon that a path leaving `from` at `x` in direction `unit` enters.
fn entered_polygon(d: &ConvexDissection, from: PolygonId, x: Point, unit: Point) -> Result<PolygonId, EncodingError> {
    const ANGLE_TOL: f64 = 1e-12;
    let eps = d.eps;
    let mut found = None;
    for q in d.containing(x) {
        if q == from {
            continue;
        }
        let poly = d.polygon(q);
        let n = poly.vertices.len();
        let mut enters = true;
        for i in 0..n {
            let (u, v) = (poly.vertices[i], poly.vertices[(i + 1) % n]);
            let edge = crate::geometry::Segment::new(u, v);
            if !edge.contains(x, eps) {
                continue;
            }
            let e = (v - u) * (1.0 / (v - u).norm());
            let s = e.cross(unit);
            if s.abs() <= ANGLE_TOL {
                if let Some(&c) = poly.cutline_ids.iter().find(|&&c| {
                    let cs = d.cutline(c).segment;
                    (cs.a.approx_eq(u, eps) && cs.b.approx_eq(v, eps))
                        || (cs.a.approx_eq(v, eps) && cs.b.approx_eq(u, eps))
                }) {
                    return Err(EncodingError::AlongCutline(c));
                }
            }
            if s < -ANGLE_TOL {
                enters = false;
                break;
            }
        }
        if enters && found.is_none() {
            found = Some(q);
        }
    }
    found.ok_or(EncodingError::LeavesFreeSpace(x))
}
