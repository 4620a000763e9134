//! Subcommand bodies. Each returns the process exit status or an error.

use std::io::Write as _;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use cdt_core::dissection::{validate_dissection, ConvexDissection, DissectionSnapshot};
use cdt_core::geometry::Point;
use cdt_core::maps::random_free_point;
use cdt_core::oracle::{visibility_shortest, OracleError};
use cdt_core::planner::{set_init, PlannerConfig, PlannerError};
use log::info;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bench::{run_bench, BenchOptions, TIGHT_GAP};
use crate::error::CliError;
use crate::input::{self, expand_map_specs, RasterOptions};
use crate::svg::{self, Overlay};

pub const PLAN_FORMAT: &str = "cdt-plan/1";

#[derive(Debug, Clone, Serialize)]
pub struct DissectStats {
    pub polygons: usize,
    pub cutlines: usize,
    pub cycles: usize,
    pub coverage: f64,
    pub valid: bool,
    pub dissection_ms: f64,
}

pub fn cmd_dissect(map: &Path, out: &Path, svg_out: Option<&Path>, raster: RasterOptions) -> Result<i32, CliError> {
    let env = input::load_environment(map, raster)?;
    let t = Instant::now();
    let d = ConvexDissection::build(&env)?;
    let dissection_ms = t.elapsed().as_secs_f64() * 1e3;
    let report = validate_dissection(&d, 10_000, 0);
    input::write(out, &d.to_json())?;
    if let Some(p) = svg_out {
        input::write(p, &svg::render(&d, &Overlay::default()))?;
    }
    let stats = DissectStats {
        polygons: d.polygons.len(),
        cutlines: d.cutlines.len(),
        cycles: d.graph.cycle_count(),
        coverage: report.coverage(),
        valid: report.passed(),
        dissection_ms,
    };
    println!("{}", serde_json::to_string(&stats)?);
    Ok(if stats.valid { 0 } else { 1 })
}

/// One goal of a plan run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanRow {
    pub goal: Point,
    pub cost: Option<f64>,
    pub set_init_ms: f64,
    pub get_goal_us: f64,
    pub encoding: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<Vec<Point>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Saved plan run, renderable on its own.
#[derive(Debug, Serialize, Deserialize)]
pub struct PlanReport {
    pub format: String,
    pub init: Point,
    pub config: PlannerConfig,
    pub set_init_ms: f64,
    pub rows: Vec<PlanRow>,
    pub dissection: DissectionSnapshot,
}

impl PlanReport {
    fn overlay(&self) -> Overlay {
        Overlay {
            paths: self.rows.iter().filter_map(|r| r.path.clone()).collect(),
            init: Some(self.init),
            goals: self.rows.iter().map(|r| r.goal).collect(),
        }
    }
}

pub fn cmd_plan(
    snapshot: &Path,
    init: Point,
    goals: &[Point],
    config: PlannerConfig,
    out: Option<&Path>,
    svg_out: Option<&Path>,
) -> Result<i32, CliError> {
    let d = Arc::new(input::load_dissection(snapshot)?);
    let state = set_init(Arc::clone(&d), init, config)?;
    let set_init_ms = state.stats.set_init_ms;
    info!("set_init {set_init_ms:.2} ms over {} cutlines", d.cutlines.len());
    let mut rows = Vec::with_capacity(goals.len());
    let mut failed = false;
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    for &goal in goals {
        let t = Instant::now();
        let res = state.get_goal(goal);
        let get_goal_us = t.elapsed().as_secs_f64() * 1e6;
        let row = match res {
            Ok(r) => PlanRow {
                goal,
                cost: Some(r.cost),
                set_init_ms,
                get_goal_us,
                encoding: r.encoding.map(|e| e.to_string()),
                path: Some(r.path.vertices),
                error: None,
            },
            Err(e) => {
                failed = true;
                PlanRow {
                    goal,
                    cost: None,
                    set_init_ms,
                    get_goal_us,
                    encoding: None,
                    path: None,
                    error: Some(e.to_string()),
                }
            }
        };
        let printed = PlanRow { path: None, ..row.clone() };
        writeln!(lock, "{}", serde_json::to_string(&printed)?).map_err(|e| CliError::io("<stdout>", e))?;
        rows.push(row);
    }
    let report =
        PlanReport { format: PLAN_FORMAT.into(), init, config, set_init_ms, rows, dissection: d.to_snapshot() };
    if let Some(p) = out {
        input::write(p, &serde_json::to_string(&report)?)?;
    }
    if let Some(p) = svg_out {
        input::write(p, &svg::render(&d, &report.overlay()))?;
    }
    Ok(if failed { 1 } else { 0 })
}

pub fn cmd_bench(
    specs: &[String],
    opts: &BenchOptions,
    raster: RasterOptions,
    strict: bool,
    out: Option<&Path>,
) -> Result<i32, CliError> {
    let maps = expand_map_specs(specs, opts.seed, raster)?;
    let report = run_bench(&maps, opts)?;
    let text = serde_json::to_string_pretty(&report)?;
    match out {
        Some(p) => input::write(p, &text)?,
        None => println!("{text}"),
    }
    for m in &report.maps {
        eprintln!(
            "{}: {} cutlines, set_init {:.2} ms, get_goal median {:.1} us, max gap {:.2e}, flagged {}",
            m.map_id, m.cutlines, m.set_init_ms.mean, m.get_goal_us.median, m.max_rel_gap, m.flagged
        );
    }
    Ok(if strict && !report.passed { 1 } else { 0 })
}

pub fn cmd_render(input_path: &Path, out: &Path) -> Result<i32, CliError> {
    let text = input::read_to_string(input_path)?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    let svg = match value.get("format").and_then(|f| f.as_str()) {
        Some(PLAN_FORMAT) => {
            let report: PlanReport = serde_json::from_value(value)?;
            let overlay = report.overlay();
            svg::render(&ConvexDissection::from_snapshot(report.dissection)?, &overlay)
        }
        Some(cdt_core::dissection::SNAPSHOT_FORMAT) => {
            svg::render(&ConvexDissection::from_snapshot(serde_json::from_value(value)?)?, &Overlay::default())
        }
        other => return Err(CliError::Parse(format!("{}: unknown input format {other:?}", input_path.display()))),
    };
    input::write(out, &svg)?;
    Ok(0)
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleCheckRow {
    pub init: Point,
    pub goal: Point,
    pub cost: Option<f64>,
    pub oracle_cost: Option<f64>,
    pub rel_gap: f64,
    pub ok: bool,
}

/// Compares goal costs with the visibility-graph oracle for random
/// init/goal pairs; exit 1 when any pair misses the tight tolerance.
pub fn cmd_oracle_check(
    map: &Path,
    inits: usize,
    goals: usize,
    seed: u64,
    config: PlannerConfig,
    raster: RasterOptions,
) -> Result<i32, CliError> {
    let env = input::load_environment(map, raster)?;
    let d = Arc::new(ConvexDissection::build(&env)?);
    let floor = 1e-9 * env.diagonal();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bad = 0;
    for _ in 0..inits {
        let init = random_free_point(&env, &mut rng);
        let state = set_init(Arc::clone(&d), init, config)?;
        for _ in 0..goals {
            let goal = random_free_point(&env, &mut rng);
            let cost = match state.get_goal(goal) {
                Ok(r) => Some(r.cost),
                Err(PlannerError::Unreachable(_)) => None,
                Err(e) => return Err(e.into()),
            };
            let oracle_cost = match visibility_shortest(&env, init, goal) {
                Ok(o) => Some(o.cost),
                Err(OracleError::Unreachable) => None,
                Err(e) => return Err(CliError::Failed(format!("oracle: {e}"))),
            };
            let rel_gap = match (cost, oracle_cost) {
                (Some(c), Some(o)) => (c - o).abs() / o.max(floor),
                (None, None) => 0.0,
                _ => f64::INFINITY,
            };
            let ok = rel_gap <= TIGHT_GAP;
            bad += usize::from(!ok);
            println!("{}", serde_json::to_string(&OracleCheckRow { init, goal, cost, oracle_cost, rel_gap, ok })?);
        }
    }
    eprintln!("{} of {} pairs outside {TIGHT_GAP:e}", bad, inits * goals);
    Ok(if bad == 0 { 0 } else { 1 })
}
