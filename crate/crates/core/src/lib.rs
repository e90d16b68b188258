//! Multi-robot coverage on metric graphs.
//!
//! The crate turns continuous obstacle environments into weighted metric
//! graphs, solves the resulting k-median coverage problem centrally and with
//! a distributed neighbour-to-neighbour swap protocol, and checks the
//! protocol's locality and approximation guarantees against exhaustive
//! oracles.

pub mod acceptance;
pub mod environment;
pub mod error;
pub mod experiments;
pub mod gadget;
pub mod graph;
pub mod partition;
pub mod protocol;
pub mod sensing;
pub mod solvers;

pub use error::{Error, Result};
pub use graph::{Edge, MetricGraph};
pub use partition::{Configuration, NeighborRule, PartitionAssignment};
pub use sensing::SensingFunction;
