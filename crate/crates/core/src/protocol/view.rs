use crate::error::{Error, Result};
use crate::graph::MetricGraph;
use crate::partition::{Configuration, PartitionAssignment};

#[derive(Debug, Clone, Copy)]
pub struct NeighborInfo<'a> {
    pub uid: usize,
    pub position: usize,
    pub cell: &'a [usize],
}

/// Everything a robot may read: its own state and partition, its neighbours'
/// positions and partitions, and the metric. All local quantities are
/// computed from a view, never from the global configuration.
#[derive(Debug, Clone)]
pub struct LocalView<'a> {
    graph: &'a MetricGraph,
    pub uid: usize,
    pub position: usize,
    pub cell: &'a [usize],
    pub neighbors: Vec<NeighborInfo<'a>>,
}

impl<'a> LocalView<'a> {
    pub fn new(
        graph: &'a MetricGraph,
        positions: &[usize],
        cells: &'a [Vec<usize>],
        neighbors: &[Vec<usize>],
        uid: usize,
    ) -> Self {
        LocalView {
            graph,
            uid,
            position: positions[uid],
            cell: &cells[uid],
            neighbors: neighbors[uid]
                .iter()
                .map(|&j| NeighborInfo {
                    uid: j,
                    position: positions[j],
                    cell: &cells[j],
                })
                .collect(),
        }
    }

    pub fn owns(&self, v: usize) -> bool {
        self.cell.binary_search(&v).is_ok()
    }

    pub fn is_neighbor(&self, uid: usize) -> bool {
        self.neighbors.iter().any(|n| n.uid == uid)
    }

    fn nearest_neighbor_cost(&self, u: usize) -> f64 {
        let row = self.graph.costs_from(u);
        self.neighbors
            .iter()
            .map(|n| row[n.position])
            .fold(f64::INFINITY, f64::min)
    }

    /// Change in the cost of the local vertex pool when this robot moves to
    /// `v` and everyone else stays.
    pub fn delta(&self, v: usize) -> f64 {
        if v == self.position {
            return 0.0;
        }
        let pool = std::iter::once(self.cell).chain(self.neighbors.iter().map(|n| n.cell));
        let mut total = 0.0;
        for cell in pool {
            for &u in cell {
                let w = self.graph.weight(u);
                if w == 0.0 {
                    continue;
                }
                let row = self.graph.costs_from(u);
                let others = self.nearest_neighbor_cost(u);
                let before = others.min(row[self.position]);
                let after = others.min(row[v]);
                if before != after {
                    total += w * (after - before);
                }
            }
        }
        total
    }

    /// Gain from a new robot appearing at `v`, summed over the neighbours'
    /// partitions and, when `include_own`, this robot's partition.
    pub fn rho(&self, v: usize, include_own: bool) -> f64 {
        let own = include_own.then_some((self.position, self.cell));
        let cells = own
            .into_iter()
            .chain(self.neighbors.iter().map(|n| (n.position, n.cell)));
        let mut total = 0.0;
        for (q, cell) in cells {
            for &u in cell {
                let row = self.graph.costs_from(u);
                let d = row[v] - row[q];
                if d < 0.0 {
                    total += self.graph.weight(u) * d;
                }
            }
        }
        total
    }

    /// Cost of re-serving this robot's partition, minus the vertices that
    /// `v` already takes over, from the neighbours' positions and `v`.
    pub fn ell_v(&self, v: usize) -> f64 {
        let mut total = 0.0;
        for &u in self.cell {
            let w = self.graph.weight(u);
            if w == 0.0 {
                continue;
            }
            let row = self.graph.costs_from(u);
            let own = row[self.position];
            if row[v] < own {
                continue;
            }
            let best = self.nearest_neighbor_cost(u).min(row[v]);
            total += w * (best - own);
        }
        total
    }

    /// Cost of re-serving this robot's whole partition from the neighbours'
    /// current positions.
    pub fn ell(&self) -> Result<f64> {
        if self.neighbors.is_empty() {
            return Err(Error::Isolated(self.uid));
        }
        let mut total = 0.0;
        for &u in self.cell {
            let w = self.graph.weight(u);
            if w == 0.0 {
                continue;
            }
            let own = self.graph.cost(u, self.position);
            total += w * (self.nearest_neighbor_cost(u) - own);
        }
        Ok(total)
    }

    /// `Σ_{u ∈ W_i} c(u, q_i)`; robots with nothing to improve skip their turn.
    pub fn cell_cost(&self) -> f64 {
        self.cell.iter().map(|&u| self.graph.cost(u, self.position)).sum()
    }
}

fn view_for<'a>(
    graph: &'a MetricGraph,
    config: &Configuration,
    cells: &'a [Vec<usize>],
    neighbors: &[Vec<usize>],
    uid: usize,
) -> Result<LocalView<'a>> {
    config.check(graph)?;
    if uid >= config.len() || neighbors.len() != config.len() {
        return Err(Error::InvalidArgument(format!(
            "robot {uid} out of range for {} robots",
            config.len()
        )));
    }
    Ok(LocalView::new(graph, config.positions(), cells, neighbors, uid))
}

/// `δ_v` for robot `i` moving to `v ∈ W_i`.
pub fn compute_delta(
    graph: &MetricGraph,
    config: &Configuration,
    partition: &PartitionAssignment,
    neighbors: &[Vec<usize>],
    i: usize,
    v: usize,
) -> Result<f64> {
    let cells = partition.cells(config.len());
    let view = view_for(graph, config, &cells, neighbors, i)?;
    graph.check_vertex(v)?;
    if !view.owns(v) {
        return Err(Error::NotInPartition { robot: i, vertex: v });
    }
    Ok(view.delta(v))
}

/// `ρ_v` for origin `i` proposing `v ∈ W_i`.
pub fn compute_rho(
    graph: &MetricGraph,
    config: &Configuration,
    partition: &PartitionAssignment,
    neighbors: &[Vec<usize>],
    i: usize,
    v: usize,
    include_own: bool,
) -> Result<f64> {
    let cells = partition.cells(config.len());
    let view = view_for(graph, config, &cells, neighbors, i)?;
    graph.check_vertex(v)?;
    if !view.owns(v) {
        return Err(Error::NotInPartition { robot: i, vertex: v });
    }
    Ok(view.rho(v, include_own))
}

/// `ℓ_v` for robot `k` taking over the position of its neighbour `i`
/// while `i` moves to `v`.
pub fn compute_ell_v(
    graph: &MetricGraph,
    config: &Configuration,
    partition: &PartitionAssignment,
    neighbors: &[Vec<usize>],
    k: usize,
    i: usize,
    v: usize,
) -> Result<f64> {
    let cells = partition.cells(config.len());
    let view = view_for(graph, config, &cells, neighbors, k)?;
    graph.check_vertex(v)?;
    if !view.is_neighbor(i) {
        return Err(Error::NotNeighbor { robot: i, other: k });
    }
    Ok(view.ell_v(v))
}

/// `ℓ` for robot `k` leaving its position to the neighbours.
pub fn compute_ell(
    graph: &MetricGraph,
    config: &Configuration,
    partition: &PartitionAssignment,
    neighbors: &[Vec<usize>],
    k: usize,
) -> Result<f64> {
    let cells = partition.cells(config.len());
    view_for(graph, config, &cells, neighbors, k)?.ell()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gadget::city_gadget;
    use crate::graph::Edge;
    use crate::partition::{assign_partitions, coverage_cost, neighbor_sets, NeighborRule};

    fn setup(graph: &MetricGraph, positions: Vec<usize>) -> (Configuration, PartitionAssignment, Vec<Vec<usize>>) {
        let config = Configuration::new(positions);
        let part = assign_partitions(graph, &config).unwrap();
        let nb = neighbor_sets(graph, &config, &part, NeighborRule::Extended);
        (config, part, nb)
    }

    fn path3() -> MetricGraph {
        MetricGraph::metric_closure(3, &[Edge::new(0, 1, 1.0), Edge::new(1, 2, 1.0)], vec![1.0; 3]).unwrap()
    }

    #[test]
    fn delta_on_path() {
        let g = path3();
        let (c, p, nb) = setup(&g, vec![0]);
        assert_eq!(compute_delta(&g, &c, &p, &nb, 0, 0).unwrap(), 0.0);
        assert_eq!(compute_delta(&g, &c, &p, &nb, 0, 1).unwrap(), -1.0);
        assert_eq!(compute_delta(&g, &c, &p, &nb, 0, 2).unwrap(), 0.0);
    }

    #[test]
    fn delta_outside_partition_rejected() {
        let g = path3();
        let (c, p, nb) = setup(&g, vec![0, 2]);
        assert!(matches!(
            compute_delta(&g, &c, &p, &nb, 1, 0),
            Err(Error::NotInPartition { robot: 1, vertex: 0 })
        ));
    }

    #[test]
    fn ell_on_path() {
        let g = path3();
        let (c, p, nb) = setup(&g, vec![0, 2]);
        assert_eq!(compute_ell(&g, &c, &p, &nb, 1).unwrap(), 2.0);
        // Co-located neighbour re-serves everything at no cost.
        let (c, p, nb) = setup(&g, vec![1, 1]);
        assert_eq!(compute_ell(&g, &c, &p, &nb, 0).unwrap(), 0.0);
    }

    #[test]
    fn isolated_robot_ell_rejected() {
        let g = path3();
        let (c, p, nb) = setup(&g, vec![1]);
        assert!(matches!(compute_ell(&g, &c, &p, &nb, 0), Err(Error::Isolated(0))));
    }

    #[test]
    fn gadget_quantities() {
        let gad = city_gadget(4, 0.5, 10.0).unwrap();
        let g = &gad.graph;
        let (c, p, nb) = setup(g, gad.bad.positions().to_vec());
        let origin = gad.robot_at(&c, gad.cities[0]).unwrap();
        let at_b = gad.robot_at(&c, gad.b).unwrap();
        let city_n = *gad.cities.last().unwrap();
        assert_eq!(p.owner[city_n], origin);
        assert_eq!(compute_rho(g, &c, &p, &nb, origin, city_n, true).unwrap(), -10.0);
        // Without the origin's own partition the proposal looks worthless.
        assert_eq!(compute_rho(g, &c, &p, &nb, origin, city_n, false).unwrap(), 0.0);
        assert_eq!(compute_ell_v(g, &c, &p, &nb, at_b, origin, city_n).unwrap(), 1.0);
        let total = -10.0 + 1.0;
        let mut after = c.clone();
        after.set(origin, city_n);
        after.set(at_b, gad.cities[0]);
        assert_eq!(coverage_cost(g, &after).unwrap() - coverage_cost(g, &c).unwrap(), total);
    }

    #[test]
    fn trivial_cases_vanish() {
        let gad = city_gadget(3, 0.5, 7.0).unwrap();
        let g = &gad.graph;
        let (c, p, nb) = setup(g, gad.bad.positions().to_vec());
        for i in 0..c.len() {
            let q = c.position(i);
            assert_eq!(compute_rho(g, &c, &p, &nb, i, q, true).unwrap(), 0.0);
            for &k in &nb[i] {
                assert_eq!(compute_ell_v(g, &c, &p, &nb, i, k, q).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn ell_v_needs_neighbor() {
        let edges = [Edge::new(0, 1, 1.0), Edge::new(2, 3, 1.0), Edge::new(1, 2, 98.0)];
        let g = MetricGraph::metric_closure(4, &edges, vec![1.0; 4]).unwrap();
        let (c, p, nb) = setup(&g, vec![0, 3]);
        assert!(matches!(
            compute_ell_v(&g, &c, &p, &nb, 0, 1, 2),
            Err(Error::NotNeighbor { .. })
        ));
    }
}
