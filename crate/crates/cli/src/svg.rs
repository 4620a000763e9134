//! Deterministic SVG 1.1 rendering of dissections and planned paths.

use std::fmt::Write;

use cdt_core::dissection::ConvexDissection;
use cdt_core::geometry::Point;

const PALETTE: [&str; 8] = ["#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"];

/// Paths and markers drawn over a dissection.
#[derive(Debug, Clone, Default)]
pub struct Overlay {
    pub paths: Vec<Vec<Point>>,
    pub init: Option<Point>,
    pub goals: Vec<Point>,
}

fn pts(points: &[Point]) -> String {
    let mut s = String::new();
    for (i, p) in points.iter().enumerate() {
        if i > 0 {
            s.push(' ');
        }
        write!(s, "{:.3},{:.3}", p.x, p.y).unwrap();
    }
    s
}

fn path_d(points: &[Point]) -> String {
    let mut s = String::new();
    for (i, p) in points.iter().enumerate() {
        write!(s, "{}{:.3},{:.3} ", if i == 0 { 'M' } else { 'L' }, p.x, p.y).unwrap();
    }
    s.push('Z');
    s
}

/// One `<path>` per convex polygon, one `<line>` per cutline, one
/// `<polyline>` per overlay path. Map y points up.
pub fn render(d: &ConvexDissection, overlay: &Overlay) -> String {
    let bb = d.env.bbox();
    let (w, h) = (bb.max.x - bb.min.x, bb.max.y - bb.min.y);
    let unit = d.env.diagonal() / 1000.0;
    let mut s = String::new();
    writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#).unwrap();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" viewBox="{:.3} {:.3} {:.3} {:.3}">"#,
        bb.min.x, -bb.max.y, w, h
    )
    .unwrap();
    writeln!(s, r#"<g transform="scale(1,-1)" stroke-linejoin="round">"#).unwrap();
    writeln!(s, r##"<polygon class="boundary" points="{}" fill="#555"/>"##, pts(&d.env.boundary)).unwrap();
    for p in &d.polygons {
        writeln!(
            s,
            r##"<path class="polygon" id="p{}" d="{}" fill="#f4f1e8" stroke="#bbb" stroke-width="{:.3}"/>"##,
            p.id.0,
            path_d(&p.vertices),
            unit
        )
        .unwrap();
    }
    for c in &d.cutlines {
        writeln!(
            s,
            r##"<line class="cutline" id="c{}" x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="#6a9fd4" stroke-width="{:.3}"/>"##,
            c.id.0, c.segment.a.x, c.segment.a.y, c.segment.b.x, c.segment.b.y, unit
        )
        .unwrap();
    }
    for (i, path) in overlay.paths.iter().enumerate() {
        writeln!(
            s,
            r#"<polyline class="path" points="{}" fill="none" stroke="{}" stroke-width="{:.3}"/>"#,
            pts(path),
            PALETTE[i % PALETTE.len()],
            3.0 * unit
        )
        .unwrap();
    }
    if let Some(p) = overlay.init {
        writeln!(s, r##"<circle class="init" cx="{:.3}" cy="{:.3}" r="{:.3}" fill="#2ca02c"/>"##, p.x, p.y, 6.0 * unit)
            .unwrap();
    }
    for p in &overlay.goals {
        writeln!(s, r##"<circle class="goal" cx="{:.3}" cy="{:.3}" r="{:.3}" fill="#d62728"/>"##, p.x, p.y, 5.0 * unit)
            .unwrap();
    }
    s.push_str("</g>\n</svg>\n");
    s
}
