//! Centralized solvers: the brute-force k-median oracle, single/double swap
//! local search and the two within-partition descent baselines.

mod brute;
mod descent;
pub(crate) mod local_search;

use serde::{Deserialize, Serialize};

pub use brute::{brute_force_optimum, BRUTE_FORCE_LIMIT};
pub use descent::{best_descent_move, descent_baseline, DescentMode};
pub use local_search::{centralized_local_search, swap_gain, SwapEvaluator};

use crate::graph::MetricGraph;
use crate::partition::Configuration;

/// Default accuracy parameter in the ε₀ schedule.
pub const DEFAULT_EPSILON: f64 = 0.01;

/// Lower clamp on ε₀ relative to `total_weight * max_cost`, so that
/// accepted moves stay above floating-point noise in `D`.
pub const EPSILON0_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub config: Configuration,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub config: Configuration,
    pub cost: f64,
    /// Accepted moves (or enumerated sets for the brute-force oracle).
    pub iterations: usize,
    pub history: Vec<HistoryEntry>,
}

/// `ε₀ = ε · w₀ · c_min / (|V| · m)` where `w₀` is the smallest positive
/// vertex weight and `c_min` the smallest positive pairwise cost, clamped
/// from below by [`EPSILON0_FLOOR`].
pub fn default_epsilon0(graph: &MetricGraph, robots: usize, epsilon: f64) -> f64 {
    let w0 = graph.min_positive_weight().unwrap_or(1.0);
    let c_min = graph.min_positive_cost().unwrap_or(1.0);
    let denom = (graph.len() * robots.max(1)) as f64;
    let scheduled = epsilon * w0 * c_min / denom;
    let floor = EPSILON0_FLOOR * graph.total_weight() * graph.max_cost();
    if floor > 0.0 {
        scheduled.max(floor)
    } else {
        scheduled
    }
}
