use cdt_core::env_model::{
    grid_to_environment, load_occupancy_grid, Environment, GridFormat, GridLoadOptions, OccupancyGrid,
    DEFAULT_SIMPLIFY_TOL,
};
use cdt_core::geometry::{signed_area, Point};
use cdt_core::maps::{random_rect_map, rect};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Same ring up to rotation of the starting vertex.
fn same_ring(a: &[Point], b: &[Point]) -> bool {
    a.len() == b.len() && (0..a.len()).any(|s| (0..a.len()).all(|i| a[(i + s) % a.len()] == b[i]))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn json_round_trip(seed in 0u64..10_000, rotate in 0usize..4, flip in any::<bool>()) {
        let env = random_rect_map(seed);
        // Perturb vertex order and orientation before writing.
        let mut text_env = env.clone();
        for o in &mut text_env.obstacles {
            let n = o.len();
            o.rotate_left(rotate % n);
            if flip {
                o.reverse();
            }
        }
        let back = Environment::from_json(&text_env.to_json()).unwrap();
        prop_assert!(same_ring(&back.boundary, &env.boundary));
        prop_assert_eq!(back.obstacles.len(), env.obstacles.len());
        for (x, y) in back.obstacles.iter().zip(&env.obstacles) {
            prop_assert!(signed_area(x) < 0.0);
            prop_assert!(same_ring(x, y));
        }
    }
}

fn random_grid(seed: u64) -> OccupancyGrid {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (w, h) = (rng.gen_range(20..60), rng.gen_range(20..60));
    let mut g = OccupancyGrid::empty(w, h);
    for _ in 0..rng.gen_range(1..8) {
        let (bw, bh) = (rng.gen_range(1..10), rng.gen_range(1..10));
        let (c0, r0) = (rng.gen_range(0..w), rng.gen_range(0..h));
        for r in r0..(r0 + bh).min(h) {
            for c in c0..(c0 + bw).min(w) {
                g.set(c, r, true);
            }
        }
    }
    g
}

/// Marks the cells of the largest 4-connected free region. Conversion keeps
/// only that region, so free cells elsewhere are expected to turn occupied.
fn largest_free_region(g: &OccupancyGrid) -> Vec<bool> {
    let mut label = vec![usize::MAX; g.cells.len()];
    let mut sizes = Vec::new();
    for start in 0..g.cells.len() {
        if g.cells[start] || label[start] != usize::MAX {
            continue;
        }
        let id = sizes.len();
        let mut stack = vec![start];
        label[start] = id;
        let mut size = 0;
        while let Some(i) = stack.pop() {
            size += 1;
            let (c, r) = (i % g.width, i / g.width);
            let mut nb = Vec::new();
            if c > 0 {
                nb.push(i - 1);
            }
            if c + 1 < g.width {
                nb.push(i + 1);
            }
            if r > 0 {
                nb.push(i - g.width);
            }
            if r + 1 < g.height {
                nb.push(i + g.width);
            }
            for j in nb {
                if !g.cells[j] && label[j] == usize::MAX {
                    label[j] = id;
                    stack.push(j);
                }
            }
        }
        sizes.push(size);
    }
    let best = (0..sizes.len()).max_by_key(|&i| sizes[i]);
    label.iter().map(|&l| Some(l) == best).collect()
}

#[test]
fn rasterized_round_trip_agrees_away_from_contours() {
    for seed in 0..40 {
        let g = random_grid(seed);
        let env = grid_to_environment(&g, DEFAULT_SIMPLIFY_TOL).unwrap();
        let back = env.rasterize(g.width as u32, g.height as u32, g.cell_size);
        let kept = largest_free_region(&g);
        let (mut considered, mut agree) = (0, 0);
        for r in 0..g.height {
            for c in 0..g.width {
                let i = r * g.width + c;
                if (!g.cells[i] && !kept[i]) || env.clearance(g.cell_center(c, r)) <= DEFAULT_SIMPLIFY_TOL {
                    continue;
                }
                considered += 1;
                agree += usize::from(back[r * g.width + c] == g.occupied(c, r));
            }
        }
        assert!(agree as f64 >= 0.99 * considered as f64, "seed {seed}: {agree}/{considered}");
    }
}

#[test]
fn grid_examples() {
    let pgm = |w: usize, h: usize, body: &[u8]| {
        let mut b = format!("P5\n{w} {h}\n255\n").into_bytes();
        b.extend_from_slice(body);
        b
    };
    let g = load_occupancy_grid(&pgm(2, 2, &[0, 255, 255, 0]), GridFormat::Pgm, GridLoadOptions::default()).unwrap();
    assert!(g.occupied(0, 0) && g.occupied(1, 1) && !g.occupied(1, 0) && !g.occupied(0, 1));
    assert!(load_occupancy_grid(&pgm(2, 2, &[0, 255, 255]), GridFormat::Pgm, GridLoadOptions::default()).is_err());

    let empty = OccupancyGrid::empty(100, 100);
    assert_eq!(empty.occupied_count(), 0);
    assert_eq!(grid_to_environment(&empty, DEFAULT_SIMPLIFY_TOL).unwrap().obstacles.len(), 0);

    let mut block = OccupancyGrid::empty(10, 10);
    for (c, r) in [(4, 4), (5, 4), (4, 5), (5, 5)] {
        block.set(c, r, true);
    }
    let env = grid_to_environment(&block, DEFAULT_SIMPLIFY_TOL).unwrap();
    assert_eq!(env.obstacles.len(), 1);
    assert!((4..=8).contains(&env.obstacles[0].len()));

    let full = OccupancyGrid::new(5, 5, vec![true; 25], 1.0);
    assert!(grid_to_environment(&full, DEFAULT_SIMPLIFY_TOL).is_err());
}

#[test]
fn validation_names_the_polygon() {
    let outside = Environment::new(
        rect(0., 0., 10., 10.),
        vec![vec![Point::new(1., 1.), Point::new(20., 5.), Point::new(1., 9.)]],
    );
    let err = outside.unwrap_err();
    assert_eq!(err.polygon(), Some(cdt_core::env_model::PolygonRef::Obstacle(0)));
}
