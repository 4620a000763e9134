//! Single-source, all-goals optimal path planning in bounded 2D environments.
//!
//! Free space is split into convex polygons joined by cutlines. For a fixed
//! start point the planner computes, per cutline, the set of homotopy-class
//! encodings whose optimal paths reach points on that cutline. Goal queries
//! then only compress a handful of candidate encodings.

pub mod dissection;
pub mod encoding;
pub mod env_model;
pub mod geometry;
pub mod maps;
pub mod oracle;
pub mod planner;
pub mod shortest_path;
