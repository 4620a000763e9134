use std::path::PathBuf;
use std::process::ExitCode;

use cdt_cli::bench::BenchOptions;
use cdt_cli::commands;
use cdt_cli::input::{parse_point, RasterOptions};
use cdt_cli::CliError;
use cdt_core::env_model::{GridLoadOptions, DEFAULT_SIMPLIFY_TOL, DEFAULT_THRESHOLD};
use cdt_core::geometry::Point;
use cdt_core::planner::{PlannerConfig, DEFAULT_INTERVAL};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "cdt-dijkstra", version, about = "Optimal all-goals path planning over a convex dissection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct PlannerArgs {
    /// Cutline sample spacing in map units.
    #[arg(long, default_value_t = DEFAULT_INTERVAL)]
    interval: f64,
    /// Path compression tolerance (default: 1e-6 of the map diagonal).
    #[arg(long)]
    eps: Option<f64>,
}

impl PlannerArgs {
    fn config(self) -> PlannerConfig {
        PlannerConfig { interval: self.interval, eps: self.eps, goal_eps: None }
    }
}

#[derive(Args, Clone, Copy)]
struct RasterArgs {
    /// Map units per pixel for PGM/PNG maps.
    #[arg(long, default_value_t = 1.0)]
    cell_size: f64,
    /// Pixels darker than this are obstacles.
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    threshold: u8,
    /// Bright pixels are obstacles instead.
    #[arg(long)]
    invert: bool,
    /// Contour simplification tolerance in pixels.
    #[arg(long, default_value_t = DEFAULT_SIMPLIFY_TOL)]
    simplify_tol: f64,
}

impl RasterArgs {
    fn options(self) -> RasterOptions {
        RasterOptions {
            grid: GridLoadOptions { threshold: self.threshold, invert: self.invert, cell_size: self.cell_size },
            simplify_tol: self.simplify_tol,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Dissect a map (JSON, PGM or PNG) and write a snapshot.
    Dissect {
        map: PathBuf,
        /// Snapshot path (default: next to the map, `.cdt.json`).
        #[arg(short, long)]
        out: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
        #[command(flatten)]
        raster: RasterArgs,
    },
    /// Run SetInit once, then answer each goal; prints one JSON row per goal.
    Plan {
        snapshot: PathBuf,
        #[arg(long, value_parser = point)]
        init: Point,
        #[arg(long = "goal", value_parser = point, required = true)]
        goals: Vec<Point>,
        /// Write the full plan report (renderable) here.
        #[arg(short, long)]
        out: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
        #[command(flatten)]
        planner: PlannerArgs,
    },
    /// Benchmark maps against the visibility oracle. Maps are `random[:N]`,
    /// `maze`, `cluttered` or file paths.
    Bench {
        maps: Vec<String>,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        #[arg(long, default_value_t = 20)]
        goals: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Exit nonzero when any map misses the oracle tolerances.
        #[arg(long)]
        strict: bool,
        #[arg(short, long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1.0, hide = true)]
        fault_scale: f64,
        #[command(flatten)]
        planner: PlannerArgs,
        #[command(flatten)]
        raster: RasterArgs,
    },
    /// Render a dissection snapshot or plan report as SVG.
    Render {
        input: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Compare goal costs with the visibility-graph oracle.
    OracleCheck {
        map: PathBuf,
        #[arg(long, default_value_t = 1)]
        inits: usize,
        #[arg(long, default_value_t = 20)]
        goals: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        planner: PlannerArgs,
        #[command(flatten)]
        raster: RasterArgs,
    },
}

fn point(s: &str) -> Result<Point, String> {
    parse_point(s).map_err(|e| e.to_string())
}

fn run(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Dissect { map, out, svg, raster } => {
            let out = out.unwrap_or_else(|| map.with_extension("cdt.json"));
            commands::cmd_dissect(&map, &out, svg.as_deref(), raster.options())
        }
        Command::Plan { snapshot, init, goals, out, svg, planner } => {
            commands::cmd_plan(&snapshot, init, &goals, planner.config(), out.as_deref(), svg.as_deref())
        }
        Command::Bench { maps, trials, goals, seed, strict, out, fault_scale, planner, raster } => {
            let opts = BenchOptions { trials, goals, seed, config: planner.config(), fault_scale };
            commands::cmd_bench(&maps, &opts, raster.options(), strict, out.as_deref())
        }
        Command::Render { input, out } => commands::cmd_render(&input, &out),
        Command::OracleCheck { map, inits, goals, seed, planner, raster } => {
            commands::cmd_oracle_check(&map, inits, goals, seed, planner.config(), raster.options())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("CDT_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
