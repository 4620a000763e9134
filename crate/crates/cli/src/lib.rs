//! Command-line front end for the CDT-Dijkstra planner: dissection
//! snapshots, batch planning, benchmarks against the visibility oracle and
//! SVG output.

pub mod bench;
pub mod commands;
pub mod error;
pub mod input;
pub mod svg;

pub use error::CliError;
