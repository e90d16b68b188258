//! Graph Voronoi partitions, the discrete coverage cost and the neighbour
//! relation between robots.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::MetricGraph;

/// Robot positions indexed by UID. Co-location is allowed.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Configuration(Vec<usize>);

impl Configuration {
    pub fn new(positions: Vec<usize>) -> Self {
        Configuration(positions)
    }

    pub fn positions(&self) -> &[usize] {
        &self.0
    }

    pub fn position(&self, uid: usize) -> usize {
        self.0[uid]
    }

    pub fn set(&mut self, uid: usize, vertex: usize) {
        self.0[uid] = vertex;
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn check(&self, graph: &MetricGraph) -> Result<()> {
        if self.0.is_empty() {
            return Err(Error::EmptyConfiguration);
        }
        self.0.iter().try_for_each(|&v| graph.check_vertex(v))
    }
}

impl From<Vec<usize>> for Configuration {
    fn from(v: Vec<usize>) -> Self {
        Configuration(v)
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

/// Which communication range defines neighbouring robots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum NeighborRule {
    /// Twice the partition radius: robots whose cells can touch.
    #[serde(rename = "2")]
    Conventional,
    /// Four times the partition radius; needed for moves to stay local.
    #[default]
    #[serde(rename = "4")]
    Extended,
}

impl NeighborRule {
    pub fn factor(self) -> f64 {
        match self {
            NeighborRule::Conventional => 2.0,
            NeighborRule::Extended => 4.0,
        }
    }

    pub fn from_factor(factor: u32) -> Result<Self> {
        match factor {
            2 => Ok(NeighborRule::Conventional),
            4 => Ok(NeighborRule::Extended),
            other => Err(Error::InvalidArgument(format!(
                "radius factor must be 2 or 4, got {other}"
            ))),
        }
    }
}

impl fmt::Display for NeighborRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.factor() as u32)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionAssignment {
    /// Owning robot UID per vertex.
    pub owner: Vec<usize>,
    /// Largest cost from each robot to a vertex it owns; 0 for empty cells.
    pub radius: Vec<f64>,
}

impl PartitionAssignment {
    pub fn owned_by(&self, uid: usize) -> impl Iterator<Item = usize> + '_ {
        self.owner
            .iter()
            .enumerate()
            .filter(move |(_, &o)| o == uid)
            .map(|(v, _)| v)
    }

    /// Vertex lists per robot, each in increasing vertex order.
    pub fn cells(&self, robots: usize) -> Vec<Vec<usize>> {
        let mut cells = vec![Vec::new(); robots];
        for (v, &o) in self.owner.iter().enumerate() {
            cells[o].push(v);
        }
        cells
    }
}

/// Assigns every vertex to its closest robot, ties going to the smaller UID.
pub fn assign_partitions(graph: &MetricGraph, config: &Configuration) -> Result<PartitionAssignment> {
    config.check(graph)?;
    Ok(assign_unchecked(graph, config.positions()))
}

pub(crate) fn assign_unchecked(graph: &MetricGraph, positions: &[usize]) -> PartitionAssignment {
    let n = graph.len();
    let mut owner = vec![0usize; n];
    let mut radius = vec![0.0f64; positions.len()];
    for v in 0..n {
        let row = graph.costs_from(v);
        let mut best = 0;
        let mut best_cost = row[positions[0]];
        for (uid, &q) in positions.iter().enumerate().skip(1) {
            if row[q] < best_cost {
                best = uid;
                best_cost = row[q];
            }
        }
        owner[v] = best;
        if best_cost > radius[best] {
            radius[best] = best_cost;
        }
    }
    PartitionAssignment { owner, radius }
}

/// `D(Q)`: weighted sum of each vertex's cost to its nearest robot.
pub fn coverage_cost(graph: &MetricGraph, config: &Configuration) -> Result<f64> {
    config.check(graph)?;
    Ok(coverage_cost_unchecked(graph, config.positions()))
}

pub(crate) fn coverage_cost_unchecked(graph: &MetricGraph, positions: &[usize]) -> f64 {
    (0..graph.len())
        .map(|v| {
            let row = graph.costs_from(v);
            let nearest = positions.iter().map(|&q| row[q]).fold(f64::INFINITY, f64::min);
            graph.weight(v) * nearest
        })
        .sum()
}

/// Robots `i != j` are neighbours when
/// `c(q_i, q_j) <= factor * max(radius_i, radius_j)`.
pub fn neighbor_sets(
    graph: &MetricGraph,
    config: &Configuration,
    partition: &PartitionAssignment,
    rule: NeighborRule,
) -> Vec<Vec<usize>> {
    neighbors_unchecked(graph, config.positions(), &partition.radius, rule.factor())
}

pub(crate) fn neighbors_unchecked(
    graph: &MetricGraph,
    positions: &[usize],
    radius: &[f64],
    factor: f64,
) -> Vec<Vec<usize>> {
    let m = positions.len();
    let mut out = vec![Vec::new(); m];
    for i in 0..m {
        for j in (i + 1)..m {
            let reach = factor * radius[i].max(radius[j]);
            if graph.cost(positions[i], positions[j]) <= reach {
                out[i].push(j);
                out[j].push(i);
            }
        }
    }
    for list in &mut out {
        list.sort_unstable();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Edge;

    fn path3() -> MetricGraph {
        MetricGraph::metric_closure(3, &[Edge::new(0, 1, 1.0), Edge::new(1, 2, 1.0)], vec![1.0; 3])
            .unwrap()
    }

    #[test]
    fn equidistant_vertex_goes_to_smaller_uid() {
        let g = path3();
        let p = assign_partitions(&g, &Configuration::new(vec![0, 2])).unwrap();
        assert_eq!(p.owner, vec![0, 0, 1]);
        assert_eq!(p.radius, vec![1.0, 0.0]);
        // Reversing the UIDs hands the middle vertex to the robot at 2.
        let p = assign_partitions(&g, &Configuration::new(vec![2, 0])).unwrap();
        assert_eq!(p.owner, vec![1, 0, 0]);
    }

    #[test]
    fn single_robot_owns_everything() {
        let g = path3();
        let p = assign_partitions(&g, &Configuration::new(vec![1])).unwrap();
        assert_eq!(p.owner, vec![0, 0, 0]);
    }

    #[test]
    fn colocated_robots() {
        let g = path3();
        let p = assign_partitions(&g, &Configuration::new(vec![1, 1])).unwrap();
        assert_eq!(p.owner, vec![0, 0, 0]);
        assert_eq!(p.owned_by(1).count(), 0);
        assert_eq!(p.radius[1], 0.0);
        let nb = neighbor_sets(&g, &Configuration::new(vec![1, 1]), &p, NeighborRule::Extended);
        assert_eq!(nb, vec![vec![1], vec![0]]);
    }

    #[test]
    fn invalid_vertex_rejected() {
        let g = path3();
        assert!(matches!(
            assign_partitions(&g, &Configuration::new(vec![7])),
            Err(Error::VertexOutOfRange { vertex: 7, .. })
        ));
        assert!(matches!(
            coverage_cost(&g, &Configuration::new(vec![])),
            Err(Error::EmptyConfiguration)
        ));
    }

    #[test]
    fn coverage_cost_examples() {
        let g = path3();
        assert_eq!(coverage_cost(&g, &Configuration::new(vec![0, 1, 2])).unwrap(), 0.0);
        assert_eq!(coverage_cost(&g, &Configuration::new(vec![1])).unwrap(), 2.0);
    }

    #[test]
    fn neighbor_examples() {
        let g = path3();
        let c = Configuration::new(vec![1]);
        let p = assign_partitions(&g, &c).unwrap();
        assert!(neighbor_sets(&g, &c, &p, NeighborRule::Extended)[0].is_empty());

        let c = Configuration::new(vec![0, 2]);
        let p = assign_partitions(&g, &c).unwrap();
        assert_eq!(neighbor_sets(&g, &c, &p, NeighborRule::Extended), vec![vec![1], vec![0]]);
        // 2 <= 2 * 1 still holds at the conventional range.
        assert_eq!(
            neighbor_sets(&g, &c, &p, NeighborRule::Conventional),
            vec![vec![1], vec![0]]
        );
    }

    #[test]
    fn distant_singletons_are_not_neighbors() {
        // Two clusters {0, 1} and {2, 3}; intra-cluster cost 1, inter 100.
        let edges = [Edge::new(0, 1, 1.0), Edge::new(2, 3, 1.0), Edge::new(1, 2, 98.0)];
        let g = MetricGraph::metric_closure(4, &edges, vec![1.0; 4]).unwrap();
        let c = Configuration::new(vec![0, 3]);
        let p = assign_partitions(&g, &c).unwrap();
        assert_eq!(p.radius, vec![1.0, 1.0]);
        assert_eq!(g.cost(0, 3), 100.0);
        let nb = neighbor_sets(&g, &c, &p, NeighborRule::Extended);
        assert!(nb[0].is_empty() && nb[1].is_empty());
    }

    #[test]
    fn rule_parsing() {
        assert_eq!(NeighborRule::from_factor(2).unwrap(), NeighborRule::Conventional);
        assert_eq!(NeighborRule::from_factor(4).unwrap(), NeighborRule::Extended);
        assert!(NeighborRule::from_factor(3).is_err());
    }
}
