use super::{HistoryEntry, SolveResult};
use crate::error::{Error, Result};
use crate::graph::MetricGraph;
use crate::partition::Configuration;

/// Largest number of vertex subsets the oracle agrees to enumerate.
pub const BRUTE_FORCE_LIMIT: f64 = 1e6;

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n.saturating_sub(k));
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Exhaustive k-median: the cheapest set of `m` distinct vertices, ties
/// broken towards the lexicographically smallest set. Repeated positions
/// never beat distinct ones, so only subsets are enumerated.
pub fn brute_force_optimum(graph: &MetricGraph, m: usize) -> Result<SolveResult> {
    if m == 0 {
        return Err(Error::EmptyConfiguration);
    }
    let n = graph.len();
    if m >= n {
        let mut positions: Vec<usize> = (0..n).collect();
        positions.resize(m, 0);
        let config = Configuration::new(positions);
        return Ok(SolveResult {
            history: vec![HistoryEntry {
                config: config.clone(),
                cost: 0.0,
            }],
            config,
            cost: 0.0,
            iterations: 1,
        });
    }
    let count = binomial(n, m);
    if count > BRUTE_FORCE_LIMIT {
        return Err(Error::GuardExceeded {
            n,
            m,
            count,
            limit: BRUTE_FORCE_LIMIT,
        });
    }

    let mut search = Search {
        graph,
        m,
        mins: vec![vec![f64::INFINITY; n]; m + 1],
        chosen: Vec::with_capacity(m),
        best: None,
        visited: 0,
    };
    search.descend(0, 0);
    let (positions, cost) = search.best.expect("at least one subset exists");
    let config = Configuration::new(positions);
    Ok(SolveResult {
        history: vec![HistoryEntry {
            config: config.clone(),
            cost,
        }],
        config,
        cost,
        iterations: search.visited,
    })
}

struct Search<'a> {
    graph: &'a MetricGraph,
    m: usize,
    /// `mins[d][u]`: cost from `u` to the nearest of the first `d` chosen.
    mins: Vec<Vec<f64>>,
    chosen: Vec<usize>,
    best: Option<(Vec<usize>, f64)>,
    visited: usize,
}

impl Search<'_> {
    fn descend(&mut self, start: usize, depth: usize) {
        let n = self.graph.len();
        if depth == self.m {
            self.visited += 1;
            let cost: f64 = self.mins[depth]
                .iter()
                .zip(self.graph.weights())
                .map(|(c, w)| c * w)
                .sum();
            let better = match &self.best {
                None => true,
                Some((_, b)) => cost < b - 1e-12 * b.abs().max(1e-300),
            };
            if better {
                self.best = Some((self.chosen.clone(), cost));
            }
            return;
        }
        let remaining = self.m - depth;
        for v in start..=(n - remaining) {
            let row = self.graph.costs_from(v);
            let (head, tail) = self.mins.split_at_mut(depth + 1);
            for (dst, (&prev, &c)) in tail[0].iter_mut().zip(head[depth].iter().zip(row)) {
                *dst = prev.min(c);
            }
            self.chosen.push(v);
            self.descend(v + 1, depth + 1);
            self.chosen.pop();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gadget::city_gadget;
    use crate::graph::Edge;

    fn path3() -> MetricGraph {
        MetricGraph::metric_closure(3, &[Edge::new(0, 1, 1.0), Edge::new(1, 2, 1.0)], vec![1.0; 3])
            .unwrap()
    }

    #[test]
    fn path_one_robot() {
        let r = brute_force_optimum(&path3(), 1).unwrap();
        assert_eq!(r.config.positions(), &[1]);
        assert_eq!(r.cost, 2.0);
    }

    #[test]
    fn path_three_robots() {
        let r = brute_force_optimum(&path3(), 3).unwrap();
        assert_eq!(r.cost, 0.0);
    }

    #[test]
    fn gadget_n2() {
        let gadget = city_gadget(2, 0.5, 4.0).unwrap();
        let r = brute_force_optimum(&gadget.graph, 3).unwrap();
        assert_eq!(r.cost, 1.0);
        // Lexicographically first optimum: a plus both remote cities.
        assert_eq!(r.config.positions(), &[0, 2, 3]);
    }

    #[test]
    fn guard() {
        let n = 40;
        let edges: Vec<Edge> = (1..n).map(|v| Edge::new(v - 1, v, 1.0)).collect();
        let g = MetricGraph::metric_closure(n, &edges, vec![1.0; n]).unwrap();
        assert!(matches!(
            brute_force_optimum(&g, 10),
            Err(Error::GuardExceeded { .. })
        ));
        assert_eq!(binomial(5, 2), 10.0);
        assert_eq!(binomial(6, 6), 1.0);
    }
}
