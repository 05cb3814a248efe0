//! Directed closure in temporal directed networks.
//!
//! An edge `A -> C` exhibits closure when it arrives after some two-step path
//! `A -> B -> C`. This crate detects such edges, summarizes them per node,
//! compares observed closure against a random-ordering baseline, grows
//! preferential-attachment style graphs, and estimates closure ratios with a
//! closed-form approximation.

pub mod baseline;
pub mod closure;
pub mod error;
pub mod graph;
pub mod heuristic;
pub mod io;
pub mod models;
pub mod report;
pub mod rng;
pub mod sampler;
pub mod stats;

pub use error::{Error, Result};
pub use graph::{EdgeRecord, NodeId, OrderInfo, TemporalDigraph};
