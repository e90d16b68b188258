use serde::{Deserialize, Serialize};

use super::{ProtocolTrace, TraceEvent};
use crate::error::{Error, Result};
use crate::graph::MetricGraph;
use crate::partition::{assign_partitions, neighbor_sets, Configuration, NeighborRule};
use crate::solvers::local_search::exact_delta;
use crate::solvers::SwapEvaluator;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwapCheck {
    pub ok: bool,
    /// Most improving `(robot, vertex, gain)`, ties to the smaller robot
    /// then vertex.
    pub witness: Option<(usize, usize, f64)>,
}

/// Exhaustive scan of single swaps for one that improves `D` by `ε₀`.
pub fn verify_no_improving_swap(graph: &MetricGraph, config: &Configuration, epsilon0: f64) -> Result<SwapCheck> {
    config.check(graph)?;
    let eval = SwapEvaluator::new(graph, config.positions());
    let mut witness: Option<(usize, usize, f64)> = None;
    for r in 0..config.len() {
        for v in 0..graph.len() {
            if v == config.position(r) {
                continue;
            }
            let gain = eval.gain(r, v);
            if gain <= -epsilon0 && witness.is_none_or(|(_, _, g)| gain < g) {
                witness = Some((r, v, gain));
            }
        }
    }
    Ok(SwapCheck {
        ok: witness.is_none(),
        witness,
    })
}

/// Vertices owned by robots outside `N(i) ∪ {i}` whose service cost changes
/// when robot `i` moves to `v ∈ W_i`.
pub fn non_neighbor_cost_changes(
    graph: &MetricGraph,
    config: &Configuration,
    rule: NeighborRule,
    i: usize,
    v: usize,
) -> Result<Vec<usize>> {
    let part = assign_partitions(graph, config)?;
    graph.check_vertex(v)?;
    if part.owner[v] != i {
        return Err(Error::NotInPartition { robot: i, vertex: v });
    }
    let nb = neighbor_sets(graph, config, &part, rule);
    let mut moved = config.clone();
    moved.set(i, v);
    let service = |c: &Configuration, u: usize| {
        c.positions()
            .iter()
            .map(|&q| graph.cost(u, q))
            .fold(f64::INFINITY, f64::min)
    };
    Ok((0..graph.len())
        .filter(|&u| {
            let k = part.owner[u];
            k != i && !nb[i].contains(&k) && service(config, u) != service(&moved, u)
        })
        .collect())
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TraceCheck {
    pub moves: usize,
    /// Largest `|realized - predicted| / max(|realized|, |predicted|)`.
    pub max_relative_error: f64,
    /// Largest recomputed global change over all accepted moves.
    pub worst_improvement: Option<f64>,
    pub violations: Vec<String>,
}

impl TraceCheck {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Replays a trace from `init`, recomputing `D` globally after every move.
/// Flags moves that improve by less than `ε₀`, predictions off by more than
/// `rel_tol`, cost-curve drift, and waves over the `m²` message budget.
pub fn verify_trace(
    graph: &MetricGraph,
    init: &Configuration,
    trace: &ProtocolTrace,
    rel_tol: f64,
) -> Result<TraceCheck> {
    init.check(graph)?;
    let m = init.len();
    let eps0 = trace.epsilon0;
    let mut check = TraceCheck::default();
    let mut positions = init.positions().to_vec();
    for rec in &trace.events {
        let (predicted, after) = match &rec.event {
            TraceEvent::Type1Move { robot, from, to, predicted, .. } => {
                if positions[*robot] != *from {
                    check
                        .violations
                        .push(format!("step {}: robot {robot} is not at {from}", rec.step));
                }
                let mut after = positions.clone();
                after[*robot] = *to;
                (*predicted, after)
            }
            TraceEvent::Type2SingleHop(mv) | TraceEvent::Type2MultiHop(mv) => {
                let mut after = positions.clone();
                for (k, (&r, &t)) in mv.chain.iter().zip(&mv.targets).enumerate() {
                    if k > 0 && t != positions[mv.chain[k - 1]] {
                        check
                            .violations
                            .push(format!("wave {}: robot {r} does not backfill its parent", mv.wave_id));
                    }
                    after[r] = t;
                }
                (mv.predicted, after)
            }
            TraceEvent::ProtocolError { detail, .. } => {
                check.violations.push(format!("step {}: protocol error: {detail}", rec.step));
                continue;
            }
            _ => continue,
        };
        let realized = exact_delta(graph, &positions, &after);
        positions = after;
        if realized > -eps0 {
            check.violations.push(format!(
                "step {}: accepted move changes D by {realized}, above -epsilon0 = {}",
                rec.step, -eps0
            ));
        }
        let scale = realized.abs().max(predicted.abs());
        let rel = if scale > 0.0 { (realized - predicted).abs() / scale } else { 0.0 };
        check.max_relative_error = check.max_relative_error.max(rel);
        if rel > rel_tol {
            check.violations.push(format!(
                "step {}: predicted change {predicted} but realized {realized}",
                rec.step
            ));
        }
        check.worst_improvement = Some(check.worst_improvement.map_or(realized, |w: f64| w.max(realized)));
        if let Some(&curve) = trace.cost_curve.get(check.moves) {
            let cost = crate::partition::coverage_cost_unchecked(graph, &positions);
            if (curve - cost).abs() > rel_tol * cost.abs().max(curve.abs()) {
                check
                    .violations
                    .push(format!("move {}: cost curve says {curve}, recomputed {cost}", check.moves));
            }
        }
        check.moves += 1;
    }
    if check.moves != trace.cost_curve.len() {
        check.violations.push(format!(
            "trace has {} moves but {} cost-curve entries",
            check.moves,
            trace.cost_curve.len()
        ));
    }
    for w in &trace.waves {
        if w.proposals > m * m || w.responses > m * m {
            check.violations.push(format!(
                "wave {}: {} proposals and {} responses exceed m^2 = {}",
                w.wave_id,
                w.proposals,
                w.responses,
                m * m
            ));
        }
    }
    Ok(check)
}
