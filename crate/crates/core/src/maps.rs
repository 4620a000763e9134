//! Seeded map generators for tests and benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::env_model::Environment;
use crate::geometry::Point;

/// Side length of the benchmark maps.
pub const BENCH_SIZE: f64 = 1000.0;

pub fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Vec<Point> {
    vec![Point::new(x0, y0), Point::new(x1, y0), Point::new(x1, y1), Point::new(x0, y1)]
}

fn overlaps_with_gap(a: &[f64; 4], b: &[f64; 4], gap: f64) -> bool {
    a[0] < b[2] + gap && b[0] < a[2] + gap && a[1] < b[3] + gap && b[1] < a[3] + gap
}

/// A 1000 x 1000 map with 3 to 10 axis-aligned rectangular obstacles that
/// keep at least 10 units from each other and from the border.
pub fn random_rect_map(seed: u64) -> Environment {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(3..=10);
    random_rect_map_with(&mut rng, n)
}

/// Like [`random_rect_map`] with a fixed obstacle count.
pub fn random_rect_map_n(seed: u64, n: usize) -> Environment {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_rect_map_with(&mut rng, n)
}

fn random_rect_map_with(rng: &mut ChaCha8Rng, n: usize) -> Environment {
    let (s, gap) = (BENCH_SIZE, 10.0);
    let mut rects: Vec<[f64; 4]> = Vec::with_capacity(n);
    let mut attempts = 0;
    while rects.len() < n && attempts < 10_000 {
        attempts += 1;
        let w = rng.gen_range(50.0..250.0_f64).round();
        let h = rng.gen_range(50.0..250.0_f64).round();
        let x = rng.gen_range(gap..s - gap - w).round();
        let y = rng.gen_range(gap..s - gap - h).round();
        let r = [x, y, x + w, y + h];
        if rects.iter().all(|o| !overlaps_with_gap(&r, o, gap)) {
            rects.push(r);
        }
    }
    Environment::new(rect(0.0, 0.0, s, s), rects.iter().map(|r| rect(r[0], r[1], r[2], r[3])).collect())
        .expect("generated rectangles are disjoint and inside the boundary")
}

/// Serpentine corridors formed by walls attached to the border, plus one
/// free-standing block, so free space has exactly one independent cycle.
pub fn maze_map() -> Environment {
    let s = BENCH_SIZE;
    let mut obstacles = Vec::new();
    for (i, x) in [190.0, 390.0, 590.0, 790.0].into_iter().enumerate() {
        if i % 2 == 0 {
            obstacles.push(rect(x, 0.0, x + 20.0, 800.0));
        } else {
            obstacles.push(rect(x, 200.0, x + 20.0, s));
        }
    }
    obstacles.push(rect(260.0, 400.0, 340.0, 600.0));
    Environment::new(rect(0.0, 0.0, s, s), obstacles).expect("maze map is valid")
}

/// A 4 x 4 lattice of jittered square blocks minus two, leaving 14
/// independent obstacles spread evenly over the map.
pub fn cluttered_map(seed: u64) -> Environment {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut obstacles = Vec::new();
    for r in 0..4 {
        for c in 0..4 {
            if (r, c) == (0, 0) || (r, c) == (3, 3) {
                continue;
            }
            let cx = 125.0 + 250.0 * c as f64 + rng.gen_range(-30.0..30.0_f64).round();
            let cy = 125.0 + 250.0 * r as f64 + rng.gen_range(-30.0..30.0_f64).round();
            let h = rng.gen_range(40.0..70.0_f64).round();
            obstacles.push(rect(cx - h, cy - h, cx + h, cy + h));
        }
    }
    Environment::new(rect(0.0, 0.0, BENCH_SIZE, BENCH_SIZE), obstacles).expect("cluttered map is valid")
}

/// `n` equal blocks in a horizontal row across a 10n+10 by 10 map, each
/// spanning the middle band so every block can be passed above or below.
pub fn row_map(n: usize) -> Environment {
    let w = 10.0 * n as f64 + 10.0;
    let obstacles = (0..n)
        .map(|i| {
            let x = 10.0 * i as f64 + 7.0;
            rect(x, 3.0, x + 6.0, 7.0)
        })
        .collect();
    Environment::new(rect(0.0, 0.0, w, 10.0), obstacles).expect("row map is valid")
}

/// 10 x 10 square with a centered 2 x 2 block.
pub fn block_map() -> Environment {
    Environment::new(rect(0.0, 0.0, 10.0, 10.0), vec![rect(4.0, 4.0, 6.0, 6.0)]).expect("block map is valid")
}

/// 10 x 10 square split by a full-height wall; the right chamber is sealed
/// off from the left.
pub fn sealed_map() -> Environment {
    Environment::new(rect(0.0, 0.0, 10.0, 10.0), vec![rect(6.0, 0.0, 7.0, 10.0)]).expect("sealed map is valid")
}

/// Uniformly random point of free space.
pub fn random_free_point(env: &Environment, rng: &mut impl Rng) -> Point {
    let bb = env.bbox();
    loop {
        let p = Point::new(rng.gen_range(bb.min.x..bb.max.x), rng.gen_range(bb.min.y..bb.max.y));
        if env.is_free(p) {
            return p;
        }
    }
}
