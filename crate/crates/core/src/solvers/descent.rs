use serde::{Deserialize, Serialize};

use super::local_search::SwapEvaluator;
use super::{HistoryEntry, SolveResult};
use crate::error::{Error, Result};
use crate::graph::MetricGraph;
use crate::partition::{assign_unchecked, coverage_cost_unchecked, Configuration};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DescentMode {
    /// Move to the vertex minimizing the cost of the robot's own cell.
    OwnPartition,
    /// Move inside the own cell when the total cost over all cells drops.
    NeighborAware,
}

/// Best relocation of `robot` within its current cell: `(vertex, gain)`
/// with the most negative gain, ties to the smaller vertex id. Gains are the
/// own-cell change or the global change depending on `mode`.
pub fn best_descent_move(
    graph: &MetricGraph,
    config: &Configuration,
    robot: usize,
    mode: DescentMode,
) -> Option<(usize, f64)> {
    let positions = config.positions();
    let partition = assign_unchecked(graph, positions);
    let cell: Vec<usize> = partition.owned_by(robot).collect();
    let here = positions[robot];
    let eval = match mode {
        DescentMode::NeighborAware => Some(SwapEvaluator::new(graph, positions)),
        DescentMode::OwnPartition => None,
    };
    let own_cost = |at: usize| -> f64 {
        let row = graph.costs_from(at);
        cell.iter().map(|&u| graph.weight(u) * row[u]).sum()
    };
    let base = own_cost(here);
    let mut best: Option<(usize, f64)> = None;
    for &v in &cell {
        if v == here {
            continue;
        }
        let gain = match &eval {
            Some(e) => e.gain(robot, v),
            None => own_cost(v) - base,
        };
        if best.is_none_or(|(_, g)| gain < g) {
            best = Some((v, gain));
        }
    }
    best
}

/// Within-partition descent: robots take turns (by UID) moving to their best
/// in-cell vertex while that improves by at least `epsilon0`.
pub fn descent_baseline(
    graph: &MetricGraph,
    init: &Configuration,
    epsilon0: f64,
    mode: DescentMode,
) -> Result<SolveResult> {
    init.check(graph)?;
    if !(epsilon0 > 0.0) {
        return Err(Error::InvalidArgument(format!("epsilon0 must be positive, got {epsilon0}")));
    }
    let mut config = init.clone();
    let mut cost = coverage_cost_unchecked(graph, config.positions());
    let mut history = Vec::new();
    loop {
        let mut moved = false;
        for robot in 0..config.len() {
            if let Some((v, gain)) = best_descent_move(graph, &config, robot, mode) {
                if gain <= -epsilon0 {
                    config.set(robot, v);
                    cost = coverage_cost_unchecked(graph, config.positions());
                    history.push(HistoryEntry {
                        config: config.clone(),
                        cost,
                    });
                    moved = true;
                }
            }
        }
        if !moved {
            break;
        }
    }
    Ok(SolveResult {
        iterations: history.len(),
        config,
        cost,
        history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gadget::city_gadget;
    use crate::graph::Edge;

    #[test]
    fn single_robot_walks_to_middle() {
        let g = MetricGraph::metric_closure(3, &[Edge::new(0, 1, 1.0), Edge::new(1, 2, 1.0)], vec![1.0; 3])
            .unwrap();
        for mode in [DescentMode::OwnPartition, DescentMode::NeighborAware] {
            let r = descent_baseline(&g, &Configuration::new(vec![0]), 1e-6, mode).unwrap();
            assert_eq!(r.config.positions(), &[1]);
            assert_eq!(r.cost, 2.0);
            assert_eq!(r.iterations, 1);
        }
    }

    #[test]
    fn gadget_bad_config_is_stuck() {
        let gadget = city_gadget(4, 0.5, 10.0).unwrap();
        for mode in [DescentMode::OwnPartition, DescentMode::NeighborAware] {
            let r = descent_baseline(&gadget.graph, &gadget.bad, 1e-6, mode).unwrap();
            assert_eq!(r.iterations, 0);
            assert_eq!(r.cost, 10.0);
        }
    }
}
