//! End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails. Runs without the libtest harness so the lines
//! always reach the output.

use std::collections::BTreeSet;
use std::process::Command;
use std::sync::Arc;
use std::time::Instant;

use cdt_cli::bench::strip_timings;
use cdt_core::dissection::{validate_dissection, ConvexDissection};
use cdt_core::encoding::{encode_path, CdtEncoding, CutlineSymbol};
use cdt_core::env_model::Environment;
use cdt_core::geometry::{signed_area, Point, Polyline, Segment};
use cdt_core::maps::{cluttered_map, maze_map, random_free_point, random_rect_map, row_map};
use cdt_core::oracle::{enumerate_class_optima_with, visibility_shortest, EnumerateOptions, VisibilityGraph};
use cdt_core::planner::{set_init, PlannerConfig, PlannerStats};
use cdt_core::shortest_path::{compress_sweep, compress_until_stationary, SWEEP_CAP};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const MAPS: u64 = 100;
const TIGHT: f64 = 1e-6;
const LOOSE: f64 = 5e-3;
const TIGHT_SHARE: f64 = 0.99;
const RUNTIME_S: f64 = 60.0;
const LATENCY_RATIO: f64 = 1e-3;
const LATENCY_ABS_MS: f64 = 1.0;
const SET_INIT_MS: f64 = 500.0;
const SET_INIT_CUTLINES: usize = 150;
const SWEEP_INSTANCES: u64 = 1000;
/// Floating-point slack on one sweep's length change, relative to length.
const SWEEP_ROUNDOFF: f64 = 1e-12;
const WARM_SWEEPS: f64 = 6.0;

struct Outcome {
    id: usize,
    pass: bool,
    detail: String,
}

fn rel_gap(cost: f64, oracle: f64, diag: f64) -> f64 {
    (cost - oracle).abs() / oracle.max(1e-9 * diag)
}

fn median(xs: &mut [f64]) -> f64 {
    xs.sort_by(f64::total_cmp);
    let m = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[m]
    } else {
        0.5 * (xs[m - 1] + xs[m])
    }
}

/// Everything measured over the 100 benchmark maps in one pass.
struct BenchmarkRun {
    gaps: Vec<f64>,
    elapsed_s: f64,
    set_init_ms: Vec<f64>,
    get_goal_ms: Vec<f64>,
    /// (cutlines, set_init ms) per map.
    budget: Vec<(usize, f64)>,
    stats: Vec<PlannerStats>,
}

fn benchmark_maps() -> BenchmarkRun {
    let start = Instant::now();
    let mut run = BenchmarkRun {
        gaps: Vec::new(),
        elapsed_s: 0.0,
        set_init_ms: Vec::new(),
        get_goal_ms: Vec::new(),
        budget: Vec::new(),
        stats: Vec::new(),
    };
    for seed in 0..MAPS {
        let env = random_rect_map(seed);
        let d = Arc::new(ConvexDissection::build(&env).expect("benchmark maps dissect"));
        let mut rng = ChaCha8Rng::seed_from_u64(seed + 1000);
        let a = random_free_point(&env, &mut rng);
        let b = random_free_point(&env, &mut rng);
        let st = set_init(d.clone(), a, PlannerConfig::default()).expect("set_init succeeds");
        let got = st.get_goal(b).expect("goal reachable").cost;
        let want = visibility_shortest(&env, a, b).expect("oracle succeeds").cost;
        run.gaps.push(rel_gap(got, want, env.diagonal()));
        run.set_init_ms.push(st.stats.set_init_ms);
        run.budget.push((d.cutlines.len(), st.stats.set_init_ms));
        for _ in 0..20 {
            let g = random_free_point(&env, &mut rng);
            let t = Instant::now();
            let _ = std::hint::black_box(st.get_goal(g));
            run.get_goal_ms.push(t.elapsed().as_secs_f64() * 1e3);
        }
        run.stats.push(st.stats.clone());
    }
    run.elapsed_s = start.elapsed().as_secs_f64();
    run
}

fn c1(run: &BenchmarkRun) -> Outcome {
    let tight = run.gaps.iter().filter(|&&g| g <= TIGHT).count();
    let worst = run.gaps.iter().copied().fold(0.0, f64::max);
    Outcome {
        id: 1,
        pass: tight as f64 >= TIGHT_SHARE * MAPS as f64 && worst <= LOOSE && run.elapsed_s < RUNTIME_S,
        detail: format!(
            "optimality: {tight}/{MAPS} within {TIGHT:e} (need >= {}), worst {worst:.2e} (<= {LOOSE:e}), {:.1} s (< {RUNTIME_S} s)",
            (TIGHT_SHARE * MAPS as f64) as usize,
            run.elapsed_s
        ),
    }
}

fn c2() -> Outcome {
    let env = random_rect_map(7);
    let d = Arc::new(ConvexDissection::build(&env).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let a = random_free_point(&env, &mut rng);
    let st = set_init(d, a, PlannerConfig::default()).unwrap();
    let before = st.state_hash();
    let vg = VisibilityGraph::new(&env);
    let (mut tight, mut worst) = (0, 0.0f64);
    let n = 1000;
    for _ in 0..n {
        let g = random_free_point(&env, &mut rng);
        let gap = rel_gap(st.get_goal(g).unwrap().cost, vg.shortest(a, g).unwrap().cost, env.diagonal());
        tight += usize::from(gap <= TIGHT);
        worst = worst.max(gap);
    }
    let unchanged = st.state_hash() == before;
    Outcome {
        id: 2,
        pass: tight as f64 >= TIGHT_SHARE * n as f64 && worst <= LOOSE && unchanged,
        detail: format!(
            "one set_init, {n} goals: {tight} within {TIGHT:e}, worst {worst:.2e}, state hash unchanged: {unchanged}"
        ),
    }
}

fn c3(run: &BenchmarkRun) -> Outcome {
    let gg = median(&mut run.get_goal_ms.clone());
    let si = median(&mut run.set_init_ms.clone());
    Outcome {
        id: 3,
        pass: gg < LATENCY_RATIO * si && gg < LATENCY_ABS_MS,
        detail: format!(
            "latency: median get_goal {:.1} us, median set_init {si:.2} ms, ratio {:.1e} (< {LATENCY_RATIO:e}), abs < {LATENCY_ABS_MS} ms",
            gg * 1e3,
            gg / si
        ),
    }
}

fn c4(run: &BenchmarkRun) -> Outcome {
    let mut extra = Vec::new();
    for env in [maze_map(), cluttered_map(0)] {
        let d = Arc::new(ConvexDissection::build(&env).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let st = set_init(d.clone(), random_free_point(&env, &mut rng), PlannerConfig::default()).unwrap();
        extra.push((d.cutlines.len(), st.stats.set_init_ms));
    }
    let eligible: Vec<(usize, f64)> =
        run.budget.iter().chain(&extra).copied().filter(|&(c, _)| c <= SET_INIT_CUTLINES).collect();
    let (cut, worst) = eligible.iter().copied().fold((0, 0.0), |acc, x| if x.1 > acc.1 { x } else { acc });
    Outcome {
        id: 4,
        pass: !eligible.is_empty() && worst < SET_INIT_MS,
        detail: format!(
            "set_init budget: {} maps with <= {SET_INIT_CUTLINES} cutlines, slowest {worst:.1} ms ({cut} cutlines) < {SET_INIT_MS} ms",
            eligible.len()
        ),
    }
}

/// Uniform point inside a convex CCW polygon.
fn point_in_convex(poly: &[Point], rng: &mut impl Rng) -> Point {
    let areas: Vec<f64> = (1..poly.len() - 1).map(|i| signed_area(&[poly[0], poly[i], poly[i + 1]]).abs()).collect();
    let mut pick = rng.gen_range(0.0..areas.iter().sum::<f64>());
    let mut i = 0;
    while i + 1 < areas.len() && pick > areas[i] {
        pick -= areas[i];
        i += 1;
    }
    let (a, b, c) = (poly[0], poly[i + 1], poly[i + 2]);
    let (mut u, mut v) = (rng.gen::<f64>(), rng.gen::<f64>());
    if u + v > 1.0 {
        u = 1.0 - u;
        v = 1.0 - v;
    }
    a + (b - a) * u + (c - a) * v
}

/// Random reduced walk from the polygon of `a`, with an end point in its last polygon.
fn random_class(d: &ConvexDissection, a: Point, max_steps: usize, rng: &mut impl Rng) -> (CdtEncoding, Point) {
    let mut enc = CdtEncoding::single(d.locate(a).unwrap());
    let mut prev = None;
    for _ in 0..rng.gen_range(0..=max_steps) {
        let opts: Vec<_> = d.polygon(enc.last()).cutline_ids.iter().copied().filter(|&c| Some(c) != prev).collect();
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

fn c5() -> Outcome {
    let maps: Vec<ConvexDissection> =
        (0..MAPS).map(|s| ConvexDissection::build(&random_rect_map(s)).unwrap()).collect();
    let (mut violations, mut capped, mut moved_bad, mut piece_bad) = (0, 0, 0, 0);
    let (mut worst_move, mut worst_piece) = (0.0f64, 0.0f64);
    for seed in 0..SWEEP_INSTANCES {
        let d = &maps[(seed % MAPS) as usize];
        let diag = d.env.diagonal();
        let (eps, eps_geo) = (1e-9 * diag, 1e-9 * diag);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_free_point(&d.env, &mut rng);
        let (enc, b) = random_class(d, a, 12, &mut rng);
        let cuts: Vec<Segment> = enc.cutline_sequence().iter().map(|&c| d.cutline(c).segment).collect();
        let mid: Vec<Point> =
            std::iter::once(a).chain(cuts.iter().map(|s| s.at(0.5))).chain(std::iter::once(b)).collect();

        // Plain sweeps from the midpoints: the length never grows.
        let mut path = Polyline::new(mid.clone());
        for _ in 0..50 {
            let next = compress_sweep(&path, &cuts).unwrap();
            if next.length() > path.length() * (1.0 + SWEEP_ROUNDOFF) {
                violations += 1;
            }
            path = next;
        }

        let mut v = mid;
        match compress_until_stationary(&mut v, &cuts, eps, 1e-10 * diag) {
            Ok((_, it)) if it <= SWEEP_CAP => {}
            _ => {
                capped += 1;
                continue;
            }
        }
        let again = compress_sweep(&Polyline::new(v.clone()), &cuts).unwrap();
        let moved = again.vertices.iter().zip(&v).map(|(p, q)| p.dist(*q)).fold(0.0, f64::max);
        worst_move = worst_move.max(moved / diag);
        moved_bad += usize::from(moved > eps_geo);

        // A piece between two vertices of an optimum is itself optimal.
        let n = v.len();
        if n >= 4 {
            let i = rng.gen_range(0..n - 2);
            let j = rng.gen_range(i + 2..n);
            let piece = Polyline::new(v[i..=j].to_vec()).length();
            let sub_cuts = &cuts[i..j - 1];
            let mut sub: Vec<Point> =
                std::iter::once(v[i]).chain(sub_cuts.iter().map(|s| s.at(0.5))).chain(std::iter::once(v[j])).collect();
            let (best, _) = compress_until_stationary(&mut sub, sub_cuts, eps, 1e-10 * diag).unwrap();
            worst_piece = worst_piece.max((piece - best) / eps);
            piece_bad += usize::from(piece > best + 10.0 * eps);
        }
    }
    Outcome {
        id: 5,
        pass: violations == 0 && capped == 0 && moved_bad == 0 && piece_bad == 0,
        detail: format!(
            "compression, {SWEEP_INSTANCES} instances: {violations} sweep increases, {capped} capped, {moved_bad} fixed-point moves > eps_geo (worst {worst_move:.1e} diag), {piece_bad} sub-path failures (worst {worst_piece:.2} eps, limit 10)"
        ),
    }
}

fn c6(run: &BenchmarkRun) -> Outcome {
    let solves: usize = run.stats.iter().map(|s| s.warm_solves).sum();
    let sweeps: usize = run.stats.iter().map(|s| s.warm_sweeps).sum();
    let mean = sweeps as f64 / solves.max(1) as f64;
    Outcome {
        id: 6,
        pass: solves > 0 && mean <= WARM_SWEEPS,
        detail: format!("warm start: {solves} warm solves, mean {mean:.2} sweeps (<= {WARM_SWEEPS})"),
    }
}

/// x-monotone class optima through `row_map(n)` and their above/below signatures.
fn monotone_classes(n: usize) -> (usize, usize) {
    let env = row_map(n);
    let d = ConvexDissection::build(&env).unwrap();
    let (a, b) = (Point::new(1.0, 5.0), Point::new(10.0 * n as f64 + 9.0, 5.0));
    let opts = EnumerateOptions { max_len: 2 * d.polygons.len(), ..Default::default() };
    let all = enumerate_class_optima_with(&d, a, b, &opts).unwrap();
    let mono: Vec<_> = all.iter().filter(|c| c.path.vertices.windows(2).all(|w| w[1].x >= w[0].x - 1e-9)).collect();
    let sigs: BTreeSet<Vec<bool>> = mono
        .iter()
        .map(|c| {
            (0..n)
                .map(|i| {
                    let x = 10.0 * i as f64 + 10.0;
                    let w = c.path.vertices.windows(2).find(|w| w[0].x <= x && w[1].x >= x).unwrap();
                    let t = (x - w[0].x) / (w[1].x - w[0].x);
                    w[0].y + t * (w[1].y - w[0].y) > 5.0
                })
                .collect()
        })
        .collect();
    (mono.len(), sigs.len())
}

fn c7() -> Outcome {
    let mut counts = Vec::new();
    let mut ok = true;
    for n in 0..4 {
        let (mono, sigs) = monotone_classes(n);
        ok &= mono == 1 << n && sigs == 1 << n;
        counts.push(format!("n={n}: {mono}"));
    }
    let mut same = 0;
    let trials = 100;
    for t in 0..trials {
        let env = random_rect_map(t % 20);
        let d = ConvexDissection::build(&env).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(t + 500);
        let a = random_free_point(&env, &mut rng);
        let (enc, b) = random_class(&d, a, 10, &mut rng);
        let realize = |rng: &mut ChaCha8Rng| {
            let seq = enc.cutline_sequence();
            let mut v = vec![a];
            for (i, &c) in seq.iter().enumerate() {
                v.push(d.cutline(c).at(rng.gen_range(0.05..0.95)));
                if i + 1 < seq.len() {
                    v.push(point_in_convex(&d.polygon(enc.nodes()[i + 1]).vertices, rng));
                }
            }
            v.push(b);
            encode_path(&d, &Polyline::new(v)).ok()
        };
        let (e1, e2) = (realize(&mut rng), realize(&mut rng));
        same += usize::from(e1.is_some() && e1 == e2 && e1.as_ref() == Some(&enc));
    }
    Outcome {
        id: 7,
        pass: ok && same == trials as usize,
        detail: format!(
            "homotopy classes: x-monotone class optima {} (expect 2^n); encode_path agreement {same}/{trials}",
            counts.join(", ")
        ),
    }
}

fn c8() -> Outcome {
    let mut envs: Vec<(String, Environment)> = (0..MAPS).map(|s| (format!("random-{s}"), random_rect_map(s))).collect();
    envs.push(("maze".into(), maze_map()));
    envs.push(("cluttered".into(), cluttered_map(0)));
    let mut failures = Vec::new();
    for (id, env) in &envs {
        let d = ConvexDissection::build(env).unwrap();
        let report = validate_dissection(&d, 10_000, 8);
        if !report.passed() || d.graph.cycle_count() != env.count_independent_obstacles() {
            failures.push(id.clone());
        }
    }
    Outcome {
        id: 8,
        pass: failures.is_empty(),
        detail: format!(
            "dissection validity: {}/{} maps valid with cycle count = independent obstacles{}",
            envs.len() - failures.len(),
            envs.len(),
            if failures.is_empty() { String::new() } else { format!(" (failed: {})", failures.join(", ")) }
        ),
    }
}

fn c9() -> Outcome {
    let triggers = |env: Environment| {
        let d = Arc::new(ConvexDissection::build(&env).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let st = set_init(d.clone(), random_free_point(&env, &mut rng), PlannerConfig::default()).unwrap();
        (st.stats.rewire_triggers, d.cutlines.len())
    };
    let (maze, maze_cuts) = triggers(maze_map());
    let (clutter, clutter_cuts) = triggers(cluttered_map(0));
    Outcome {
        id: 9,
        pass: maze <= maze_cuts && clutter > maze,
        detail: format!(
            "rewiring: maze {maze} triggers ({maze_cuts} cutlines), cluttered {clutter} triggers ({clutter_cuts} cutlines)"
        ),
    }
}

fn c10() -> Outcome {
    let bench = || {
        let out = Command::new(env!("CARGO_BIN_EXE_cdt-dijkstra"))
            .args(["bench", "random:3", "maze", "cluttered", "--trials", "3", "--goals", "10", "--seed", "42"])
            .output()
            .expect("bench runs");
        let mut v: serde_json::Value = serde_json::from_slice(&out.stdout).expect("bench prints JSON");
        strip_timings(&mut v);
        (out.status.success(), v)
    };
    let (ok1, a) = bench();
    let (ok2, b) = bench();
    let rows = a["maps"].as_array().map_or(0, |m| m.len());
    Outcome {
        id: 10,
        pass: ok1 && ok2 && rows == 5 && a == b,
        detail: format!(
            "determinism: two bench runs, seed 42, {rows} maps, identical costs/encodings/triggers: {}",
            a == b
        ),
    }
}

fn main() {
    // `cargo test -- --list` only wants the listing.
    if std::env::args().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    let run = benchmark_maps();
    let outcomes = vec![c1(&run), c2(), c3(&run), c4(&run), c5(), c6(&run), c7(), c8(), c9(), c10()];
    println!();
    for o in &outcomes {
        println!("criterion {:>2}: {} - {}", o.id, if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    let failed = outcomes.iter().filter(|o| !o.pass).count();
    println!("\nacceptance: {} passed; {failed} failed", outcomes.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
