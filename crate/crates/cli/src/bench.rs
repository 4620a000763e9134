//! Benchmark harness: per map, repeated SetInit plus a batch of goal
//! queries, each checked against the visibility-graph oracle.

use std::sync::Arc;
use std::time::Instant;

use cdt_core::dissection::ConvexDissection;
use cdt_core::geometry::Point;
use cdt_core::maps::random_free_point;
use cdt_core::oracle::{OracleError, VisibilityGraph};
use cdt_core::planner::{set_init, PlannerConfig, PlannerError};
use log::info;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::input::NamedMap;

pub const REPORT_FORMAT: &str = "cdt-bench/1";
/// Relative oracle gap that counts as an exact match.
pub const TIGHT_GAP: f64 = 1e-6;
/// Largest relative oracle gap tolerated on any goal.
pub const LOOSE_GAP: f64 = 5e-3;
/// Share of goals that must match within [`TIGHT_GAP`].
pub const TIGHT_SHARE: f64 = 0.99;

#[derive(Debug, Clone)]
pub struct BenchOptions {
    pub trials: usize,
    pub goals: usize,
    pub seed: u64,
    pub config: PlannerConfig,
    /// Scales every planner cost before the oracle comparison. Test hook for
    /// checking that gaps are caught; 1.0 in normal runs.
    pub fault_scale: f64,
}

impl Default for BenchOptions {
    fn default() -> Self {
        BenchOptions { trials: 10, goals: 20, seed: 0, config: PlannerConfig::default(), fault_scale: 1.0 }
    }
}

/// Mean, standard deviation and median of a sample.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub stddev: f64,
    pub median: f64,
    pub max: f64,
}

impl Summary {
    pub fn of(xs: &[f64]) -> Self {
        if xs.is_empty() {
            return Summary::default();
        }
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        let mut sorted = xs.to_vec();
        sorted.sort_by(f64::total_cmp);
        let mid = sorted.len() / 2;
        let median = if sorted.len() % 2 == 1 { sorted[mid] } else { 0.5 * (sorted[mid - 1] + sorted[mid]) };
        Summary { mean, stddev: var.sqrt(), median, max: sorted[sorted.len() - 1] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoalRow {
    pub goal: Point,
    /// `None` when the goal is unreachable from the initial point.
    pub cost: Option<f64>,
    pub oracle_cost: Option<f64>,
    pub rel_gap: f64,
    pub encoding: Option<String>,
    pub get_goal_us: f64,
    /// Cost below the straight-line distance, or reachability disagrees
    /// with the oracle, or the gap exceeds the loose tolerance.
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub init: Point,
    pub set_init_ms: f64,
    pub rewire_triggers: usize,
    pub mean_warm_sweeps: f64,
    pub goals: Vec<GoalRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapReport {
    pub map_id: String,
    pub cutlines: usize,
    pub polygons: usize,
    pub obstacles: usize,
    pub dissection_ms: f64,
    pub set_init_ms: Summary,
    /// Dissection time plus SetInit time, per trial.
    pub all_init_ms: Summary,
    pub get_goal_us: Summary,
    pub rewire_triggers: Summary,
    pub mean_warm_sweeps: f64,
    pub max_rel_gap: f64,
    pub tight_matches: usize,
    pub goal_count: usize,
    pub flagged: usize,
    pub trials: Vec<TrialReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub format: String,
    pub seed: u64,
    pub trials: usize,
    pub goals_per_trial: usize,
    pub interval: f64,
    pub maps: Vec<MapReport>,
    /// Every map meets the oracle tolerances.
    pub passed: bool,
}

impl BenchReport {
    /// The report as JSON with every timing field (`*_ms`, `*_us`) removed,
    /// for comparing runs.
    pub fn without_timings(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("report serializes");
        strip_timings(&mut v);
        v
    }
}

/// Removes keys ending in `_ms` or `_us`, recursively.
pub fn strip_timings(v: &mut serde_json::Value) {
    match v {
        serde_json::Value::Object(m) => {
            m.retain(|k, _| !(k.ends_with("_ms") || k.ends_with("_us")));
            m.values_mut().for_each(strip_timings);
        }
        serde_json::Value::Array(a) => a.iter_mut().for_each(strip_timings),
        _ => {}
    }
}

fn map_seed(seed: u64, map_index: usize) -> u64 {
    seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(map_index as u64)
}

pub fn bench_map(map: &NamedMap, map_index: usize, opts: &BenchOptions) -> Result<MapReport, CliError> {
    let t = Instant::now();
    let d = Arc::new(ConvexDissection::build(&map.env)?);
    let dissection_ms = t.elapsed().as_secs_f64() * 1e3;
    let vg = VisibilityGraph::new(&map.env);
    let floor = 1e-9 * map.env.diagonal();
    let mut rng = ChaCha8Rng::seed_from_u64(map_seed(opts.seed, map_index));
    let mut trials = Vec::with_capacity(opts.trials);
    for trial in 0..opts.trials {
        let init = random_free_point(&map.env, &mut rng);
        let state = set_init(Arc::clone(&d), init, opts.config)?;
        let mut goals = Vec::with_capacity(opts.goals);
        for _ in 0..opts.goals {
            let goal = random_free_point(&map.env, &mut rng);
            let t = Instant::now();
            let res = state.get_goal(goal);
            let get_goal_us = t.elapsed().as_secs_f64() * 1e6;
            let (cost, encoding) = match res {
                Ok(r) => (Some(r.cost * opts.fault_scale), r.encoding.map(|e| e.to_string())),
                Err(PlannerError::Unreachable(_)) => (None, None),
                Err(e) => return Err(e.into()),
            };
            let oracle_cost = match vg.shortest(init, goal) {
                Ok(o) => Some(o.cost),
                Err(OracleError::Unreachable) => None,
                Err(e) => return Err(CliError::Failed(format!("oracle: {e}"))),
            };
            let (rel_gap, flagged) = match (cost, oracle_cost) {
                (Some(c), Some(o)) => {
                    let gap = (c - o).abs() / o.max(floor);
                    (gap, gap > LOOSE_GAP || c < init.dist(goal) - floor)
                }
                (None, None) => (0.0, false),
                _ => (f64::INFINITY, true),
            };
            goals.push(GoalRow { goal, cost, oracle_cost, rel_gap, encoding, get_goal_us, flagged });
        }
        info!("{} trial {trial}: set_init {:.2} ms", map.id, state.stats.set_init_ms);
        trials.push(TrialReport {
            init,
            set_init_ms: state.stats.set_init_ms,
            rewire_triggers: state.stats.rewire_triggers,
            mean_warm_sweeps: state.stats.mean_warm_sweeps(),
            goals,
        });
    }

    let set_init: Vec<f64> = trials.iter().map(|t| t.set_init_ms).collect();
    let all_init: Vec<f64> = set_init.iter().map(|s| s + dissection_ms).collect();
    let rows: Vec<&GoalRow> = trials.iter().flat_map(|t| &t.goals).collect();
    let get_goal: Vec<f64> = rows.iter().map(|r| r.get_goal_us).collect();
    let triggers: Vec<f64> = trials.iter().map(|t| t.rewire_triggers as f64).collect();
    let warm: Vec<f64> = trials.iter().map(|t| t.mean_warm_sweeps).collect();
    Ok(MapReport {
        map_id: map.id.clone(),
        cutlines: d.cutlines.len(),
        polygons: d.polygons.len(),
        obstacles: map.env.obstacles.len(),
        dissection_ms,
        set_init_ms: Summary::of(&set_init),
        all_init_ms: Summary::of(&all_init),
        get_goal_us: Summary::of(&get_goal),
        rewire_triggers: Summary::of(&triggers),
        mean_warm_sweeps: Summary::of(&warm).mean,
        max_rel_gap: rows.iter().map(|r| r.rel_gap).fold(0.0, f64::max),
        tight_matches: rows.iter().filter(|r| r.rel_gap <= TIGHT_GAP).count(),
        goal_count: rows.len(),
        flagged: rows.iter().filter(|r| r.flagged).count(),
        trials,
    })
}

impl MapReport {
    pub fn passed(&self) -> bool {
        self.flagged == 0 && self.tight_matches as f64 >= TIGHT_SHARE * self.goal_count as f64
    }
}

pub fn run_bench(maps: &[NamedMap], opts: &BenchOptions) -> Result<BenchReport, CliError> {
    let maps = maps.iter().enumerate().map(|(i, m)| bench_map(m, i, opts)).collect::<Result<Vec<_>, _>>()?;
    Ok(BenchReport {
        format: REPORT_FORMAT.into(),
        seed: opts.seed,
        trials: opts.trials,
        goals_per_trial: opts.goals,
        interval: opts.config.interval,
        passed: maps.iter().all(MapReport::passed),
        maps,
    })
}
