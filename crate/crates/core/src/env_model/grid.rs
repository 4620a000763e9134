//! Occupancy grids: PGM/PNG loading and conversion to polygons.
//!
//! Conversion traces the cell-edge boundary of the largest 4-connected free
//! region. Its outer cycle becomes the environment boundary and every inner
//! cycle an obstacle, so obstacles touching the map border end up folded into
//! the boundary. Diagonal-only contacts are closed first so that every traced
//! cycle is simple.

use std::collections::HashMap;

use thiserror::Error;

use super::{EnvError, Environment, PolygonRef};
use crate::geometry::{orient_eps, Orientation, Point, Segment};

pub const DEFAULT_THRESHOLD: u8 = 128;
pub const DEFAULT_SIMPLIFY_TOL: f64 = 1.5;

#[derive(Debug, Error)]
pub enum GridError {
    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },
    #[error("image decode failed: {0}")]
    Image(#[from] image::ImageError),
}

fn parse_err(offset: usize, message: impl Into<String>) -> GridError {
    GridError::Parse { offset, message: message.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridFormat {
    Pgm,
    Png,
}

impl GridFormat {
    /// Guess from a file extension (`pgm` or `png`, any case).
    pub fn from_extension(ext: &str) -> Option<Self> {
        match ext.to_ascii_lowercase().as_str() {
            "pgm" => Some(GridFormat::Pgm),
            "png" => Some(GridFormat::Png),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct GridLoadOptions {
    /// Pixels darker than this are occupied.
    pub threshold: u8,
    /// Treat bright pixels as occupied instead.
    pub invert: bool,
    /// Map units per pixel.
    pub cell_size: f64,
}

impl Default for GridLoadOptions {
    fn default() -> Self {
        GridLoadOptions { threshold: DEFAULT_THRESHOLD, invert: false, cell_size: 1.0 }
    }
}

/// Row-major binary occupancy, row 0 at the top of the image.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyGrid {
    pub width: usize,
    pub height: usize,
    pub cells: Vec<bool>,
    pub cell_size: f64,
}

impl OccupancyGrid {
    pub fn new(width: usize, height: usize, cells: Vec<bool>, cell_size: f64) -> Self {
        assert_eq!(width * height, cells.len(), "cell count must match dimensions");
        assert!(cell_size > 0.0, "cell size must be positive");
        OccupancyGrid { width, height, cells, cell_size }
    }

    pub fn empty(width: usize, height: usize) -> Self {
        Self::new(width, height, vec![false; width * height], 1.0)
    }

    pub fn occupied(&self, col: usize, row: usize) -> bool {
        self.cells[row * self.width + col]
    }

    pub fn set(&mut self, col: usize, row: usize, occ: bool) {
        self.cells[row * self.width + col] = occ;
    }

    pub fn occupied_count(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }

    /// Cell containing a map-space point, if inside the grid.
    pub fn cell_of(&self, p: Point) -> Option<(usize, usize)> {
        let c = (p.x / self.cell_size).floor();
        let r = (p.y / self.cell_size).floor();
        if c < 0.0 || r < 0.0 || c >= self.width as f64 || r >= self.height as f64 {
            return None;
        }
        Some((c as usize, r as usize))
    }

    pub fn cell_center(&self, col: usize, row: usize) -> Point {
        Point::new((col as f64 + 0.5) * self.cell_size, (row as f64 + 0.5) * self.cell_size)
    }
}

pub fn load_occupancy_grid(
    bytes: &[u8],
    format: GridFormat,
    opts: GridLoadOptions,
) -> Result<OccupancyGrid, GridError> {
    let (width, height, pixels) = match format {
        GridFormat::Pgm => parse_pgm(bytes)?,
        GridFormat::Png => {
            let img = image::load_from_memory_with_format(bytes, image::ImageFormat::Png)?.into_luma8();
            let (w, h) = img.dimensions();
            (w as usize, h as usize, img.into_raw())
        }
    };
    let cells = pixels.iter().map(|&v| (v < opts.threshold) != opts.invert).collect();
    Ok(OccupancyGrid::new(width, height, cells, opts.cell_size))
}

/// Binary PGM (`P5`) with maxval up to 255.
fn parse_pgm(bytes: &[u8]) -> Result<(usize, usize, Vec<u8>), GridError> {
    let mut pos = 0usize;
    if bytes.len() < 2 || &bytes[..2] != b"P5" {
        return Err(parse_err(0, "missing P5 magic"));
    }
    pos += 2;
    let mut fields = [0usize; 3];
    for (k, field) in fields.iter_mut().enumerate() {
        // Whitespace and comments before each header number.
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                Some(_) => break,
                None => return Err(parse_err(pos, "header truncated")),
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        if start == pos {
            return Err(parse_err(pos, format!("expected header number {}", k + 1)));
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| parse_err(start, "header number out of range"))?;
    }
    let [width, height, maxval] = fields;
    if width == 0 || height == 0 {
        return Err(parse_err(pos, "zero image dimension"));
    }
    if maxval == 0 || maxval > 255 {
        return Err(parse_err(pos, format!("unsupported maxval {maxval}")));
    }
    match bytes.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        _ => return Err(parse_err(pos, "expected single whitespace after maxval")),
    }
    let need = width.checked_mul(height).ok_or_else(|| parse_err(pos, "image dimensions overflow"))?;
    let data = &bytes[pos..];
    if data.len() < need {
        return Err(parse_err(bytes.len(), format!("pixel data truncated: {} of {} bytes", data.len(), need)));
    }
    let scale = |v: u8| if maxval == 255 { v } else { ((v as usize * 255) / maxval).min(255) as u8 };
    Ok((width, height, data[..need].iter().map(|&v| scale(v)).collect()))
}

/// Grid padded by one occupied cell on every side.
struct Padded {
    w: usize,
    h: usize,
    occ: Vec<bool>,
}

impl Padded {
    fn new(g: &OccupancyGrid) -> Self {
        let (w, h) = (g.width + 2, g.height + 2);
        let mut occ = vec![true; w * h];
        for r in 0..g.height {
            for c in 0..g.width {
                occ[(r + 1) * w + c + 1] = g.occupied(c, r);
            }
        }
        Padded { w, h, occ }
    }

    fn at(&self, c: usize, r: usize) -> bool {
        self.occ[r * self.w + c]
    }

    /// Fills one free cell of every 2x2 block whose occupied cells touch
    /// only diagonally, until none remain.
    fn close_diagonal_contacts(&mut self) {
        loop {
            let mut changed = false;
            for r in 0..self.h - 1 {
                for c in 0..self.w - 1 {
                    let tl = self.at(c, r);
                    let tr = self.at(c + 1, r);
                    let bl = self.at(c, r + 1);
                    let br = self.at(c + 1, r + 1);
                    if tl == br && tr == bl && tl != tr {
                        // Fill the free cell on the top row.
                        let (fc, fr) = if tl { (c + 1, r) } else { (c, r) };
                        self.occ[fr * self.w + fc] = true;
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
    }

    /// Label of the largest 4-connected free region (ties: first in scan order).
    fn largest_free_region(&self) -> Option<Vec<bool>> {
        let mut label = vec![usize::MAX; self.w * self.h];
        let mut best: Option<(usize, usize)> = None;
        let mut next = 0usize;
        let mut stack = Vec::new();
        for start in 0..self.w * self.h {
            if self.occ[start] || label[start] != usize::MAX {
                continue;
            }
            let mut size = 0;
            label[start] = next;
            stack.push(start);
            while let Some(i) = stack.pop() {
                size += 1;
                let (c, r) = (i % self.w, i / self.w);
                let mut visit = |j: usize| {
                    if !self.occ[j] && label[j] == usize::MAX {
                        label[j] = next;
                        stack.push(j);
                    }
                };
                if c > 0 {
                    visit(i - 1);
                }
                if c + 1 < self.w {
                    visit(i + 1);
                }
                if r > 0 {
                    visit(i - self.w);
                }
                if r + 1 < self.h {
                    visit(i + self.w);
                }
            }
            if best.is_none_or(|(_, s)| size > s) {
                best = Some((next, size));
            }
            next += 1;
        }
        let (id, _) = best?;
        Some(label.into_iter().map(|l| l == id).collect())
    }
}

/// Boundary cycles of a region given as a cell mask, in lattice-corner
/// coordinates. Each cell contributes its sides toward non-region cells.
fn trace_cycles(w: usize, h: usize, region: &[bool]) -> Vec<Vec<(i64, i64)>> {
    let inside = |c: i64, r: i64| {
        c >= 0 && r >= 0 && (c as usize) < w && (r as usize) < h && region[r as usize * w + c as usize]
    };
    let mut next: HashMap<(i64, i64), (i64, i64)> = HashMap::new();
    for r in 0..h as i64 {
        for c in 0..w as i64 {
            if !inside(c, r) {
                continue;
            }
            if !inside(c - 1, r) {
                next.insert((c, r), (c, r + 1));
            }
            if !inside(c, r + 1) {
                next.insert((c, r + 1), (c + 1, r + 1));
            }
            if !inside(c + 1, r) {
                next.insert((c + 1, r + 1), (c + 1, r));
            }
            if !inside(c, r - 1) {
                next.insert((c + 1, r), (c, r));
            }
        }
    }
    let mut starts: Vec<(i64, i64)> = next.keys().copied().collect();
    starts.sort_by_key(|&(x, y)| (y, x));
    let mut seen = std::collections::HashSet::new();
    let mut cycles = Vec::new();
    for s in starts {
        if seen.contains(&s) {
            continue;
        }
        let mut cyc = Vec::new();
        let mut cur = s;
        loop {
            seen.insert(cur);
            cyc.push(cur);
            cur = next[&cur];
            if cur == s {
                break;
            }
        }
        cycles.push(drop_collinear_lattice(cyc));
    }
    cycles
}

fn drop_collinear_lattice(cyc: Vec<(i64, i64)>) -> Vec<(i64, i64)> {
    let n = cyc.len();
    (0..n)
        .filter(|&i| {
            let a = cyc[(i + n - 1) % n];
            let b = cyc[i];
            let c = cyc[(i + 1) % n];
            (b.0 - a.0) * (c.1 - b.1) - (b.1 - a.1) * (c.0 - b.0) != 0
        })
        .map(|i| cyc[i])
        .collect()
}

/// Douglas-Peucker on a closed ring, anchored at the first vertex and the
/// vertex farthest from it.
fn simplify_ring(ring: &[Point], tol: f64) -> Vec<Point> {
    let n = ring.len();
    if tol <= 0.0 || n <= 4 {
        return ring.to_vec();
    }
    let far = (1..n).max_by(|&i, &j| ring[0].dist(ring[i]).total_cmp(&ring[0].dist(ring[j]))).unwrap();
    let mut keep = vec![false; n];
    keep[0] = true;
    keep[far] = true;
    fn dp(ring: &[Point], lo: usize, hi: usize, tol: f64, keep: &mut [bool]) {
        let n = ring.len();
        let idx = |k: usize| k % n;
        if hi <= lo + 1 {
            return;
        }
        let seg = Segment::new(ring[idx(lo)], ring[idx(hi)]);
        let (mut best, mut dmax) = (lo, 0.0);
        for k in lo + 1..hi {
            let d = seg.distance_to(ring[idx(k)]);
            if d > dmax {
                dmax = d;
                best = k;
            }
        }
        if dmax > tol {
            keep[idx(best)] = true;
            dp(ring, lo, best, tol, keep);
            dp(ring, best, hi, tol, keep);
        }
    }
    dp(ring, 0, far, tol, &mut keep);
    dp(ring, far, n, tol, &mut keep);
    let out: Vec<Point> = (0..n).filter(|&i| keep[i]).map(|i| ring[i]).collect();
    // Drop vertices that became collinear.
    let m = out.len();
    let cleaned: Vec<Point> = (0..m)
        .filter(|&i| orient_eps(out[(i + m - 1) % m], out[i], out[(i + 1) % m], 1e-12) != Orientation::Collinear)
        .map(|i| out[i])
        .collect();
    if cleaned.len() >= 3 {
        cleaned
    } else {
        ring.to_vec()
    }
}

/// Converts an occupancy grid to a polygonal environment.
///
/// Only the largest connected free region is kept; free pockets cut off from
/// it are treated as occupied.
pub fn grid_to_environment(g: &OccupancyGrid, simplify_tol: f64) -> Result<Environment, EnvError> {
    let mut padded = Padded::new(g);
    padded.close_diagonal_contacts();
    let region = padded.largest_free_region().ok_or(EnvError::EmptyFreeSpace)?;
    let cycles = trace_cycles(padded.w, padded.h, &region);

    let to_map = |(x, y): (i64, i64)| Point::new((x - 1) as f64 * g.cell_size, (y - 1) as f64 * g.cell_size);
    let rings: Vec<Vec<Point>> = cycles.into_iter().map(|c| c.into_iter().map(to_map).collect()).collect();
    let outer = rings
        .iter()
        .enumerate()
        .max_by(|(_, a), (_, b)| {
            crate::geometry::signed_area(a).abs().total_cmp(&crate::geometry::signed_area(b).abs())
        })
        .map(|(i, _)| i)
        .ok_or(EnvError::EmptyFreeSpace)?;
    let mut ordered = Vec::with_capacity(rings.len());
    ordered.push(rings[outer].clone());
    ordered.extend(rings.iter().enumerate().filter(|&(i, _)| i != outer).map(|(_, r)| r.clone()));

    // Per-ring tolerance; shrink the tolerance of whichever ring breaks
    // validity until the environment validates. Unsimplified rings are
    // valid by construction.
    let tol_px = simplify_tol * g.cell_size;
    let mut tols = vec![tol_px; ordered.len()];
    loop {
        let simplified: Vec<Vec<Point>> = ordered.iter().zip(&tols).map(|(r, &t)| simplify_ring(r, t)).collect();
        let mut it = simplified.into_iter();
        let boundary = it.next().unwrap();
        match Environment::new(boundary, it.collect()) {
            Ok(mut env) => {
                env.source_resolution = Some((g.width as u32, g.height as u32));
                return Ok(env);
            }
            Err(EnvError::Validation { polygon, reason }) => {
                let idx = match polygon {
                    PolygonRef::Boundary => 0,
                    PolygonRef::Obstacle(i) => i + 1,
                };
                log::debug!("simplification broke {polygon} ({reason}); retrying finer");
                if tols[idx] > 0.25 * g.cell_size {
                    tols[idx] *= 0.5;
                } else if tols[idx] > 0.0 {
                    tols[idx] = 0.0;
                } else if tols.iter().any(|&t| t > 0.0) {
                    tols.iter_mut().for_each(|t| *t = 0.0);
                } else {
                    return Err(EnvError::Validation { polygon, reason });
                }
            }
            Err(e) => return Err(e),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pgm(w: usize, h: usize, body: &[u8]) -> Vec<u8> {
        let mut v = format!("P5\n# test\n{w} {h}\n255\n").into_bytes();
        v.extend_from_slice(body);
        v
    }

    #[test]
    fn pgm_threshold() {
        let g = load_occupancy_grid(&pgm(2, 2, &[0, 255, 255, 0]), GridFormat::Pgm, Default::default()).unwrap();
        assert!(g.occupied(0, 0));
        assert!(!g.occupied(1, 0));
        assert!(!g.occupied(0, 1));
        assert!(g.occupied(1, 1));
    }

    #[test]
    fn pgm_truncated() {
        let bytes = pgm(2, 2, &[0, 255, 255]);
        match load_occupancy_grid(&bytes, GridFormat::Pgm, Default::default()) {
            Err(GridError::Parse { offset, .. }) => assert_eq!(offset, bytes.len()),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn pgm_bad_magic_and_header() {
        assert!(matches!(
            load_occupancy_grid(b"P2\n1 1\n255\n\0", GridFormat::Pgm, Default::default()),
            Err(GridError::Parse { offset: 0, .. })
        ));
        assert!(matches!(
            load_occupancy_grid(b"P5\n1 x\n255\n\0", GridFormat::Pgm, Default::default()),
            Err(GridError::Parse { .. })
        ));
    }

    #[test]
    fn pgm_empty_map() {
        let bytes = pgm(100, 100, &vec![255u8; 10_000]);
        let g = load_occupancy_grid(&bytes, GridFormat::Pgm, Default::default()).unwrap();
        assert_eq!(g.occupied_count(), 0);
    }

    #[test]
    fn invert_flag() {
        let opts = GridLoadOptions { invert: true, ..Default::default() };
        let g = load_occupancy_grid(&pgm(2, 1, &[0, 255]), GridFormat::Pgm, opts).unwrap();
        assert!(!g.occupied(0, 0));
        assert!(g.occupied(1, 0));
    }

    #[test]
    fn png_loader() {
        let mut img = image::GrayImage::from_pixel(3, 2, image::Luma([255u8]));
        img.put_pixel(2, 1, image::Luma([10u8]));
        let mut buf = std::io::Cursor::new(Vec::new());
        img.write_to(&mut buf, image::ImageFormat::Png).unwrap();
        let g = load_occupancy_grid(buf.get_ref(), GridFormat::Png, Default::default()).unwrap();
        assert_eq!((g.width, g.height), (3, 2));
        assert_eq!(g.occupied_count(), 1);
        assert!(g.occupied(2, 1));
    }

    #[test]
    fn centered_block_gives_one_obstacle() {
        let mut g = OccupancyGrid::empty(10, 10);
        for (c, r) in [(4, 4), (5, 4), (4, 5), (5, 5)] {
            g.set(c, r, true);
        }
        let env = grid_to_environment(&g, DEFAULT_SIMPLIFY_TOL).unwrap();
        assert_eq!(env.obstacles.len(), 1);
        let n = env.obstacles[0].len();
        assert!((4..=8).contains(&n), "{n} vertices");
        assert_eq!(env.boundary.len(), 4);
        assert_eq!(env.count_independent_obstacles(), 1);
        assert_eq!(env.source_resolution, Some((10, 10)));
    }

    #[test]
    fn empty_and_full_grids() {
        let env = grid_to_environment(&OccupancyGrid::empty(10, 10), DEFAULT_SIMPLIFY_TOL).unwrap();
        assert!(env.obstacles.is_empty());
        let full = OccupancyGrid::new(4, 4, vec![true; 16], 1.0);
        assert!(matches!(grid_to_environment(&full, 1.5), Err(EnvError::EmptyFreeSpace)));
    }

    #[test]
    fn border_obstacles_fold_into_boundary() {
        let mut g = OccupancyGrid::empty(20, 10);
        // wall from the top edge, plus an island
        for r in 0..6 {
            g.set(8, r, true);
        }
        g.set(15, 5, true);
        g.set(16, 5, true);
        let env = grid_to_environment(&g, 0.0).unwrap();
        assert_eq!(env.obstacles.len(), 1);
        assert_eq!(env.count_independent_obstacles(), 1);
        assert!(!env.is_free(Point::new(8.5, 2.5)));
        assert!(env.is_free(Point::new(8.5, 8.5)));
    }

    #[test]
    fn diagonal_contacts_are_closed() {
        let mut g = OccupancyGrid::empty(10, 10);
        g.set(3, 3, true);
        g.set(4, 4, true);
        let env = grid_to_environment(&g, 0.0).unwrap();
        assert_eq!(env.obstacles.len(), 1);
    }
}
