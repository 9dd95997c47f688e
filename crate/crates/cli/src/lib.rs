//! Experiment harness: run the estimation pipeline over many seeded trials
//! and aggregate per-criterion success statistics.

pub mod experiment;
pub mod table;
