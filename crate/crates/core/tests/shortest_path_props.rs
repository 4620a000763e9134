mod common;

use cdt_core::dissection::ConvexDissection;
use cdt_core::encoding::CdtEncoding;
use cdt_core::geometry::{Point, Polyline, Segment};
use cdt_core::maps::{block_map, random_free_point, random_rect_map, random_rect_map_n, row_map};
use cdt_core::oracle::{enumerate_class_optima, visibility_shortest};
use cdt_core::shortest_path::{compress_sweep, compress_until_stationary, get_shortest_path};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

struct Instance {
    d: ConvexDissection,
    enc: CdtEncoding,
    a: Point,
    b: Point,
    cutlines: Vec<Segment>,
}

fn instance(seed: u64) -> Instance {
    let env = random_rect_map(seed % 25);
    let d = ConvexDissection::build(&env).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = random_free_point(&env, &mut rng);
    let (enc, b) = common::random_class(&d, a, 12, &mut rng);
    let cutlines = enc.cutline_sequence().iter().map(|&c| d.cutline(c).segment).collect();
    Instance { d, enc, a, b, cutlines }
}

fn midpoint_path(i: &Instance) -> Polyline {
    let mut v = vec![i.a];
    v.extend(i.cutlines.iter().map(|s| s.at(0.5)));
    v.push(i.b);
    Polyline::new(v)
}

#[test]
fn sweeps_never_lengthen_the_path() {
    for seed in 0..200 {
        let inst = instance(seed);
        let mut path = midpoint_path(&inst);
        for _ in 0..30 {
            let next = compress_sweep(&path, &inst.cutlines).unwrap();
            assert!(next.length() <= path.length() + 1e-9, "seed {seed}: {} > {}", next.length(), path.length());
            for (v, s) in next.vertices[1..next.vertices.len() - 1].iter().zip(&inst.cutlines) {
                assert!(s.distance_to(*v) < 1e-9, "seed {seed}: vertex left its cutline");
            }
            path = next;
        }
    }
}

#[test]
fn converged_paths_are_fixed_points_and_subpaths_are_optimal() {
    for seed in 0..300 {
        let inst = instance(seed);
        let diag = inst.d.env.bbox().diagonal();
        let eps = 1e-9 * diag;
        let mut v = midpoint_path(&inst).vertices;
        let (cost, _) = compress_until_stationary(&mut v, &inst.cutlines, eps, 1e-10 * diag).unwrap();
        let path = Polyline::new(v.clone());
        assert!((path.length() - cost).abs() < 1e-9 * diag);

        let again = compress_sweep(&path, &inst.cutlines).unwrap();
        let moved = again.vertices.iter().zip(&v).map(|(p, q)| p.dist(*q)).fold(0.0, f64::max);
        assert!(moved <= 1e-9 * diag, "seed {seed}: moved {moved}");

        // Any piece between two of its vertices is itself shortest.
        let n = v.len();
        if n < 4 {
            continue;
        }
        let (i, j) = (1 + seed as usize % (n - 3), n - 1 - seed as usize % 2);
        let mut sub = v[i..=j].to_vec();
        let before = Polyline::new(sub.clone()).length();
        let sub_cuts = &inst.cutlines[i..j - 1];
        for (p, s) in sub[1..j - i].iter_mut().zip(sub_cuts) {
            *p = s.at(0.5);
        }
        let (sub_cost, _) = compress_until_stationary(&mut sub, sub_cuts, eps, 1e-10 * diag).unwrap();
        assert!(before <= sub_cost + 10.0 * eps, "seed {seed}: piece {before} vs {sub_cost}");
    }
}

#[test]
fn warm_and_cold_starts_agree() {
    for seed in 0..200 {
        let inst = instance(seed);
        let eps = 1e-9 * inst.d.env.bbox().diagonal();
        let cold = get_shortest_path(&inst.d, &inst.enc, inst.a, inst.b, None, eps).unwrap();
        // Seed from the optimum toward another end point of the same class.
        let mut rng = ChaCha8Rng::seed_from_u64(seed + 1000);
        let other = common::point_in_convex(&inst.d.polygon(inst.enc.last()).vertices, &mut rng);
        let seed_path = get_shortest_path(&inst.d, &inst.enc, inst.a, other, None, eps).unwrap();
        let warm = get_shortest_path(&inst.d, &inst.enc, inst.a, inst.b, Some(&seed_path.path.vertices), eps).unwrap();
        assert!((warm.cost - cold.cost).abs() <= 10.0 * eps, "seed {seed}: {} vs {}", warm.cost, cold.cost);
    }
}

#[test]
fn agrees_with_dense_class_dp() {
    let dense_k = 512;
    let mut maps = vec![block_map(), row_map(2)];
    maps.extend((0..4).map(|s| random_rect_map_n(s, 2)));
    for (m, env) in maps.iter().enumerate() {
        let d = ConvexDissection::build(env).unwrap();
        let diag = env.bbox().diagonal();
        let mut rng = ChaCha8Rng::seed_from_u64(m as u64);
        for _ in 0..3 {
            let a = random_free_point(env, &mut rng);
            let b = random_free_point(env, &mut rng);
            let classes = enumerate_class_optima(&d, a, b, 6, dense_k).unwrap();
            assert!(!classes.is_empty());
            for c in classes.iter().take(20) {
                let r = get_shortest_path(&d, &c.encoding, a, b, None, 1e-10 * diag).unwrap();
                let bound: f64 = 2.0
                    * c.encoding.cutline_sequence().iter().map(|&k| d.cutline(k).length()).sum::<f64>()
                    / dense_k as f64;
                assert!(r.cost <= c.cost + 1e-7 * diag, "map {m}: {} > dp {}", r.cost, c.cost);
                assert!(c.cost - r.cost <= bound + 1e-9 * diag, "map {m}: dp {} vs {}", c.cost, r.cost);
            }
            // The best class is the global shortest path.
            let vis = visibility_shortest(env, a, b).unwrap();
            assert!((classes[0].cost - vis.cost).abs() <= 1e-6 * diag, "map {m}: {} vs {}", classes[0].cost, vis.cost);
        }
    }
}
