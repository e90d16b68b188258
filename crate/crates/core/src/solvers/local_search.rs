use super::{HistoryEntry, SolveResult};
use crate::error::{Error, Result};
use crate::graph::MetricGraph;
use crate::partition::{coverage_cost_unchecked, Configuration};

/// Nearest and second-nearest robot costs per vertex, for O(|V|) evaluation
/// of single swaps.
#[derive(Debug, Clone)]
pub struct SwapEvaluator<'a> {
    graph: &'a MetricGraph,
    nearest: Vec<f64>,
    nearest_uid: Vec<usize>,
    second: Vec<f64>,
}

impl<'a> SwapEvaluator<'a> {
    pub fn new(graph: &'a MetricGraph, positions: &[usize]) -> Self {
        let n = graph.len();
        let mut nearest = vec![f64::INFINITY; n];
        let mut nearest_uid = vec![0; n];
        let mut second = vec![f64::INFINITY; n];
        for u in 0..n {
            let row = graph.costs_from(u);
            for (uid, &q) in positions.iter().enumerate() {
                let c = row[q];
                if c < nearest[u] {
                    second[u] = nearest[u];
                    nearest[u] = c;
                    nearest_uid[u] = uid;
                } else if c < second[u] {
                    second[u] = c;
                }
            }
        }
        SwapEvaluator {
            graph,
            nearest,
            nearest_uid,
            second,
        }
    }

    /// `D(Q') - D(Q)` when robot `uid` relocates to `vertex`.
    pub fn gain(&self, uid: usize, vertex: usize) -> f64 {
        let row = self.graph.costs_from(vertex);
        let mut delta = 0.0;
        for u in 0..self.graph.len() {
            let w = self.graph.weight(u);
            if w == 0.0 {
                continue;
            }
            let kept = if self.nearest_uid[u] == uid {
                self.second[u]
            } else {
                self.nearest[u]
            };
            let after = kept.min(row[u]);
            if after != self.nearest[u] {
                delta += w * (after - self.nearest[u]);
            }
        }
        delta
    }
}

/// `D(Q') - D(Q)` after moving robots `out_robots[k]` to `in_vertices[k]`.
pub fn swap_gain(
    graph: &MetricGraph,
    config: &Configuration,
    out_robots: &[usize],
    in_vertices: &[usize],
) -> Result<f64> {
    config.check(graph)?;
    if out_robots.len() != in_vertices.len() || out_robots.is_empty() {
        return Err(Error::SwapSizeMismatch {
            robots: out_robots.len(),
            vertices: in_vertices.len(),
        });
    }
    let mut seen = vec![false; config.len()];
    for &r in out_robots {
        if r >= config.len() || std::mem::replace(&mut seen[r], true) {
            return Err(Error::InvalidArgument(format!("bad or repeated robot {r} in swap")));
        }
    }
    for &v in in_vertices {
        graph.check_vertex(v)?;
    }
    let mut swapped = config.clone();
    for (&r, &v) in out_robots.iter().zip(in_vertices) {
        swapped.set(r, v);
    }
    Ok(exact_delta(graph, config.positions(), swapped.positions()))
}

/// Global change summed vertex by vertex, so unaffected vertices contribute
/// exactly zero.
pub(crate) fn exact_delta(graph: &MetricGraph, before: &[usize], after: &[usize]) -> f64 {
    (0..graph.len())
        .map(|u| {
            let row = graph.costs_from(u);
            let old = before.iter().map(|&q| row[q]).fold(f64::INFINITY, f64::min);
            let new = after.iter().map(|&q| row[q]).fold(f64::INFINITY, f64::min);
            if old == new {
                0.0
            } else {
                graph.weight(u) * (new - old)
            }
        })
        .sum()
}

/// First-improvement local search over swaps of up to `p` robots.
/// Robots are scanned by UID and candidate vertices by id; a swap is taken
/// as soon as it improves `D` by at least `epsilon0`.
pub fn centralized_local_search(
    graph: &MetricGraph,
    init: &Configuration,
    p: usize,
    epsilon0: f64,
) -> Result<SolveResult> {
    init.check(graph)?;
    if !(1..=2).contains(&p) {
        return Err(Error::InvalidArgument(format!("swap size p must be 1 or 2, got {p}")));
    }
    if !(epsilon0 > 0.0) {
        return Err(Error::InvalidArgument(format!("epsilon0 must be positive, got {epsilon0}")));
    }
    let mut config = init.clone();
    let mut cost = coverage_cost_unchecked(graph, config.positions());
    let mut history = Vec::new();
    loop {
        let next = single_swap(graph, &config, epsilon0).or_else(|| {
            if p == 2 {
                double_swap(graph, &config, epsilon0)
            } else {
                None
            }
        });
        let Some(moves) = next else { break };
        for (r, v) in moves {
            config.set(r, v);
        }
        cost = coverage_cost_unchecked(graph, config.positions());
        history.push(HistoryEntry {
            config: config.clone(),
            cost,
        });
    }
    Ok(SolveResult {
        iterations: history.len(),
        config,
        cost,
        history,
    })
}

fn single_swap(graph: &MetricGraph, config: &Configuration, epsilon0: f64) -> Option<Vec<(usize, usize)>> {
    let eval = SwapEvaluator::new(graph, config.positions());
    for r in 0..config.len() {
        for v in 0..graph.len() {
            if v == config.position(r) {
                continue;
            }
            if eval.gain(r, v) <= -epsilon0 {
                return Some(vec![(r, v)]);
            }
        }
    }
    None
}

fn double_swap(graph: &MetricGraph, config: &Configuration, epsilon0: f64) -> Option<Vec<(usize, usize)>> {
    let m = config.len();
    let n = graph.len();
    let before = config.positions();
    let mut after = before.to_vec();
    for r1 in 0..m {
        for r2 in (r1 + 1)..m {
            for v1 in 0..n {
                for v2 in (v1 + 1)..n {
                    after[r1] = v1;
                    after[r2] = v2;
                    if exact_delta(graph, before, &after) <= -epsilon0 {
                        return Some(vec![(r1, v1), (r2, v2)]);
                    }
                }
            }
            after[r1] = before[r1];
            after[r2] = before[r2];
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gadget::city_gadget;
    use crate::graph::Edge;
    use crate::partition::coverage_cost;

    fn path3() -> MetricGraph {
        MetricGraph::metric_closure(3, &[Edge::new(0, 1, 1.0), Edge::new(1, 2, 1.0)], vec![1.0; 3])
            .unwrap()
    }

    #[test]
    fn identity_swap_is_zero() {
        let g = path3();
        let c = Configuration::new(vec![0, 2]);
        assert_eq!(swap_gain(&g, &c, &[1], &[2]).unwrap(), 0.0);
    }

    #[test]
    fn path_swap_to_middle() {
        let g = path3();
        let c = Configuration::new(vec![0]);
        assert_eq!(swap_gain(&g, &c, &[0], &[1]).unwrap(), -1.0);
        assert_eq!(SwapEvaluator::new(&g, c.positions()).gain(0, 1), -1.0);
    }

    #[test]
    fn size_mismatch_rejected() {
        let g = path3();
        let c = Configuration::new(vec![0, 2]);
        assert!(matches!(
            swap_gain(&g, &c, &[0, 1], &[1]),
            Err(Error::SwapSizeMismatch { .. })
        ));
        assert!(swap_gain(&g, &c, &[], &[]).is_err());
    }

    #[test]
    fn gadget_swap_b_to_last_city() {
        let gadget = city_gadget(4, 0.5, 10.0).unwrap();
        let b_robot = gadget.robot_at(&gadget.bad, gadget.b).unwrap();
        let last = *gadget.cities.last().unwrap();
        let gain = swap_gain(&gadget.graph, &gadget.bad, &[b_robot], &[last]).unwrap();
        assert_eq!(gain, -9.0);
    }

    #[test]
    fn evaluator_matches_direct_swaps() {
        let gadget = city_gadget(3, 0.5, 7.0).unwrap();
        let g = &gadget.graph;
        let c = &gadget.bad;
        let eval = SwapEvaluator::new(g, c.positions());
        for r in 0..c.len() {
            for v in 0..g.len() {
                let direct = swap_gain(g, c, &[r], &[v]).unwrap();
                assert!((eval.gain(r, v) - direct).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn optimal_init_takes_no_moves() {
        let g = path3();
        let r = centralized_local_search(&g, &Configuration::new(vec![1]), 1, 1e-6).unwrap();
        assert_eq!(r.iterations, 0);
        assert_eq!(r.cost, 2.0);
    }

    #[test]
    fn gadget_escapes_to_optimum() {
        let gadget = city_gadget(4, 0.5, 10.0).unwrap();
        for p in [1, 2] {
            let r = centralized_local_search(&gadget.graph, &gadget.bad, p, 1e-6).unwrap();
            assert_eq!(r.cost, 1.0);
            assert_eq!(r.cost, coverage_cost(&gadget.graph, &r.config).unwrap());
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        let g = path3();
        let c = Configuration::new(vec![0]);
        assert!(centralized_local_search(&g, &c, 3, 1e-6).is_err());
        assert!(centralized_local_search(&g, &c, 1, 0.0).is_err());
    }
}
