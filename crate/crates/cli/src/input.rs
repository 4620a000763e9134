//! Map files, map specs and point arguments.

use std::fs;
use std::path::Path;

use cdt_core::dissection::ConvexDissection;
use cdt_core::env_model::{grid_to_environment, load_occupancy_grid, Environment, GridFormat, GridLoadOptions};
use cdt_core::geometry::Point;
use cdt_core::maps;

use crate::error::CliError;

/// How raster maps become polygons.
#[derive(Debug, Clone, Copy)]
pub struct RasterOptions {
    pub grid: GridLoadOptions,
    pub simplify_tol: f64,
}

impl Default for RasterOptions {
    fn default() -> Self {
        RasterOptions { grid: GridLoadOptions::default(), simplify_tol: cdt_core::env_model::DEFAULT_SIMPLIFY_TOL }
    }
}

pub fn read_to_string(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

pub fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

/// Loads a JSON polygon environment or a PGM/PNG occupancy image.
pub fn load_environment(path: &Path, raster: RasterOptions) -> Result<Environment, CliError> {
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
    if ext.eq_ignore_ascii_case("json") {
        return Ok(Environment::from_json(&read_to_string(path)?)?);
    }
    let format = GridFormat::from_extension(ext).ok_or_else(|| CliError::UnknownFormat(path.to_owned()))?;
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    let grid = load_occupancy_grid(&bytes, format, raster.grid)?;
    Ok(grid_to_environment(&grid, raster.simplify_tol)?)
}

pub fn load_dissection(path: &Path) -> Result<ConvexDissection, CliError> {
    Ok(ConvexDissection::from_json(&read_to_string(path)?)?)
}

pub fn parse_point(s: &str) -> Result<Point, CliError> {
    let bad = || CliError::BadPoint(s.to_owned());
    let (x, y) = s.split_once(',').ok_or_else(bad)?;
    let x: f64 = x.trim().parse().map_err(|_| bad())?;
    let y: f64 = y.trim().parse().map_err(|_| bad())?;
    if !(x.is_finite() && y.is_finite()) {
        return Err(bad());
    }
    Ok(Point::new(x, y))
}

/// A named benchmark environment.
#[derive(Debug, Clone)]
pub struct NamedMap {
    pub id: String,
    pub env: Environment,
}

/// Expands map specs: `random[:N]` (N seeded rectangle maps starting at
/// `seed`), `maze`, `cluttered`, or a map file path.
pub fn expand_map_specs(specs: &[String], seed: u64, raster: RasterOptions) -> Result<Vec<NamedMap>, CliError> {
    let mut out = Vec::new();
    for spec in specs {
        let (name, count) = match spec.split_once(':') {
            Some((n, c)) => (n, Some(c.parse::<u64>().map_err(|_| CliError::BadMapSpec(spec.clone()))?)),
            None => (spec.as_str(), None),
        };
        match name {
            "random" => {
                for s in seed..seed + count.unwrap_or(1) {
                    out.push(NamedMap { id: format!("random-{s}"), env: maps::random_rect_map(s) });
                }
            }
            "maze" if count.is_none() => out.push(NamedMap { id: "maze".into(), env: maps::maze_map() }),
            "cluttered" if count.is_none() => {
                out.push(NamedMap { id: format!("cluttered-{seed}"), env: maps::cluttered_map(seed) })
            }
            _ if count.is_none() => {
                let path = Path::new(spec);
                let id = path.file_stem().and_then(|s| s.to_str()).unwrap_or(spec).to_owned();
                out.push(NamedMap { id, env: load_environment(path, raster)? });
            }
            _ => return Err(CliError::BadMapSpec(spec.clone())),
        }
    }
    Ok(out)
}
