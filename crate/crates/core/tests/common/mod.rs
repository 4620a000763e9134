//! Random instance helpers shared by the integration tests.
#![allow(dead_code)]

use cdt_core::dissection::{ConvexDissection, CutlineId};
use cdt_core::encoding::{CdtEncoding, CutlineSymbol};
use cdt_core::geometry::{signed_area, Point};
use rand::Rng;

/// Uniform point inside a convex CCW polygon.
pub fn point_in_convex(poly: &[Point], rng: &mut impl Rng) -> Point {
    let fan: Vec<(Point, Point, Point, f64)> = (1..poly.len() - 1)
        .map(|i| {
            let (a, b, c) = (poly[0], poly[i], poly[i + 1]);
            (a, b, c, signed_area(&[a, b, c]).abs())
        })
        .collect();
    let total: f64 = fan.iter().map(|t| t.3).sum();
    let mut pick = rng.gen_range(0.0..total);
    let (a, b, c, _) = *fan
        .iter()
        .find(|t| {
            pick -= t.3;
            pick <= 0.0
        })
        .unwrap_or(fan.last().expect("polygon has a triangle"));
    let (mut u, mut v) = (rng.gen::<f64>(), rng.gen::<f64>());
    if u + v > 1.0 {
        u = 1.0 - u;
        v = 1.0 - v;
    }
    a + (b - a) * u + (c - a) * v
}

/// Random reduced walk of up to `max_steps` crossings starting in the
/// polygon of `a`, plus a random end point in its last polygon.
pub fn random_class(d: &ConvexDissection, a: Point, max_steps: usize, rng: &mut impl Rng) -> (CdtEncoding, Point) {
    let mut enc = CdtEncoding::single(d.locate(a).unwrap());
    let steps = rng.gen_range(0..=max_steps);
    let mut prev: Option<CutlineId> = None;
    for _ in 0..steps {
        let opts: Vec<CutlineId> =
            d.polygon(enc.last()).cutline_ids.iter().copied().filter(|&c| Some(c) != prev).collect();
        if opts.is_empty() {
            break;
        }
        let c = opts[rng.gen_range(0..opts.len())];
        enc = enc.concat(d, CutlineSymbol(c)).unwrap();
        prev = Some(c);
    }
    let b = point_in_convex(&d.polygon(enc.last()).vertices, rng);
    (enc, b)
}
