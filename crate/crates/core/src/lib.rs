//! Multilevel sampling-based motion planning over fiber bundles.

pub mod bundles;
pub mod environments;
pub mod graph;
pub mod heuristics;
pub mod nn;
pub mod samplers;
pub mod spaces;
pub mod planners;
pub mod bench;
pub mod svg;
