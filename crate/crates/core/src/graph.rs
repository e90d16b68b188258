//! Weighted metric graphs: the discrete coverage instance.
//!
//! A [`MetricGraph`] stores per-vertex weights and the full pairwise cost
//! matrix. Instances built from an edge list keep that list around so the
//! edges can later be subdivided with zero-weight midpoints.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative slack allowed when checking the triangle inequality.
pub const TRIANGLE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub cost: f64,
}

impl Edge {
    pub fn new(u: usize, v: usize, cost: f64) -> Self {
        Edge { u, v, cost }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricGraph {
    weights: Vec<f64>,
    cost: Vec<f64>,
    edges: Option<Vec<Edge>>,
}

impl MetricGraph {
    /// Builds the shortest-path metric of a connected, positively weighted
    /// undirected graph.
    pub fn metric_closure(vertex_count: usize, edges: &[Edge], weights: Vec<f64>) -> Result<Self> {
        if vertex_count == 0 {
            return Err(Error::InvalidArgument("graph needs at least one vertex".into()));
        }
        if weights.len() != vertex_count {
            return Err(Error::InvalidArgument(format!(
                "{} weights given for {} vertices",
                weights.len(),
                vertex_count
            )));
        }
        let n = vertex_count;
        let mut cost = vec![f64::INFINITY; n * n];
        for v in 0..n {
            cost[v * n + v] = 0.0;
        }
        let mut kept = Vec::with_capacity(edges.len());
        for e in edges {
            for x in [e.u, e.v] {
                if x >= n {
                    return Err(Error::VertexOutOfRange { vertex: x, len: n });
                }
            }
            if !(e.cost.is_finite() && e.cost > 0.0) {
                return Err(Error::BadEdgeCost {
                    u: e.u,
                    v: e.v,
                    cost: e.cost,
                });
            }
            if e.u == e.v {
                return Err(Error::InvalidArgument(format!("self-loop at vertex {}", e.u)));
            }
            let (a, b) = (e.u, e.v);
            if e.cost < cost[a * n + b] {
                cost[a * n + b] = e.cost;
                cost[b * n + a] = e.cost;
            }
            kept.push(*e);
        }
        floyd_warshall(n, &mut cost);
        for u in 0..n {
            for v in (u + 1)..n {
                if !cost[u * n + v].is_finite() {
                    return Err(Error::Disconnected(u, v));
                }
            }
        }
        let graph = MetricGraph {
            weights,
            cost,
            edges: Some(kept),
        };
        graph.validate_weights()?;
        Ok(graph)
    }

    /// Wraps an explicit cost matrix (row-major, `n * n`) after checking
    /// every metric invariant.
    pub fn from_cost_matrix(weights: Vec<f64>, cost: Vec<f64>) -> Result<Self> {
        let n = weights.len();
        if n == 0 {
            return Err(Error::InvalidArgument("graph needs at least one vertex".into()));
        }
        if cost.len() != n * n {
            return Err(Error::InvalidArgument(format!(
                "cost matrix has {} entries, expected {}",
                cost.len(),
                n * n
            )));
        }
        let graph = MetricGraph {
            weights,
            cost,
            edges: None,
        };
        graph.validate()?;
        Ok(graph)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    #[inline]
    pub fn cost(&self, u: usize, v: usize) -> f64 {
        self.cost[u * self.weights.len() + v]
    }

    /// Row `u` of the cost matrix.
    #[inline]
    pub fn costs_from(&self, u: usize) -> &[f64] {
        let n = self.weights.len();
        &self.cost[u * n..(u + 1) * n]
    }

    #[inline]
    pub fn weight(&self, v: usize) -> f64 {
        self.weights[v]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn edges(&self) -> Option<&[Edge]> {
        self.edges.as_deref()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn max_cost(&self) -> f64 {
        self.cost.iter().copied().fold(0.0, f64::max)
    }

    /// Smallest strictly positive pairwise cost, if any pair is distinct.
    pub fn min_positive_cost(&self) -> Option<f64> {
        self.cost
            .iter()
            .copied()
            .filter(|c| *c > 0.0)
            .min_by(f64::total_cmp)
    }

    pub fn min_positive_weight(&self) -> Option<f64> {
        self.weights
            .iter()
            .copied()
            .filter(|w| *w > 0.0)
            .min_by(f64::total_cmp)
    }

    pub fn check_vertex(&self, v: usize) -> Result<()> {
        if v < self.len() {
            Ok(())
        } else {
            Err(Error::VertexOutOfRange {
                vertex: v,
                len: self.len(),
            })
        }
    }

    fn validate_weights(&self) -> Result<()> {
        for (v, w) in self.weights.iter().enumerate() {
            if !(w.is_finite() && *w >= 0.0) {
                return Err(Error::InvalidMetric(format!("vertex {v} has weight {w}")));
            }
        }
        Ok(())
    }

    /// Checks zero diagonal, symmetry, nonnegativity, weights and the
    /// triangle inequality over all vertex triples.
    pub fn validate(&self) -> Result<()> {
        self.validate_weights()?;
        let n = self.len();
        for u in 0..n {
            if self.cost(u, u) != 0.0 {
                return Err(Error::InvalidMetric(format!("cost({u}, {u}) = {}", self.cost(u, u))));
            }
            for v in (u + 1)..n {
                let c = self.cost(u, v);
                if !(c.is_finite() && c >= 0.0) {
                    return Err(Error::InvalidMetric(format!("cost({u}, {v}) = {c}")));
                }
                if c != self.cost(v, u) {
                    return Err(Error::InvalidMetric(format!(
                        "asymmetric cost between {u} and {v}: {c} vs {}",
                        self.cost(v, u)
                    )));
                }
            }
        }
        self.check_triangle()
    }

    pub fn check_triangle(&self) -> Result<()> {
        let n = self.len();
        for z in 0..n {
            let row_z = self.costs_from(z);
            for u in 0..n {
                let uz = row_z[u];
                let row_u = self.costs_from(u);
                for v in (u + 1)..n {
                    let through = uz + row_z[v];
                    let direct = row_u[v];
                    if direct > through + TRIANGLE_TOLERANCE * direct.max(through) {
                        return Err(Error::InvalidMetric(format!(
                            "triangle inequality fails: cost({u}, {v}) = {direct} > {through} via {z}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Replaces every edge `(u, v)` by `(u, z)` and `(z, v)` with a fresh
    /// zero-weight vertex `z` at half the cost, then recomputes the closure.
    /// Original vertices keep their ids; midpoints are appended in edge order.
    pub fn subdivide_edges(&self) -> Result<MetricGraph> {
        let edges = self.edges.as_ref().ok_or_else(|| {
            Error::InvalidArgument("subdivision needs a graph built from an edge list".into())
        })?;
        let n = self.len();
        let mut weights = self.weights.clone();
        let mut split = Vec::with_capacity(edges.len() * 2);
        for (k, e) in edges.iter().enumerate() {
            let z = n + k;
            weights.push(0.0);
            split.push(Edge::new(e.u, z, e.cost / 2.0));
            split.push(Edge::new(z, e.v, e.cost / 2.0));
        }
        MetricGraph::metric_closure(weights.len(), &split, weights)
    }

    pub fn to_document(&self) -> GraphDocument {
        let vertices = self
            .weights
            .iter()
            .enumerate()
            .map(|(id, &weight)| VertexRecord { id, weight })
            .collect();
        let edges = match &self.edges {
            Some(list) => list
                .iter()
                .map(|e| EdgeRecord {
                    u: e.u,
                    v: e.v,
                    cost: e.cost,
                })
                .collect(),
            None => {
                let n = self.len();
                let mut out = Vec::with_capacity(n * n.saturating_sub(1) / 2);
                for u in 0..n {
                    for v in (u + 1)..n {
                        let cost = self.cost(u, v);
                        if cost > 0.0 {
                            out.push(EdgeRecord { u, v, cost });
                        }
                    }
                }
                out
            }
        };
        GraphDocument {
            vertices,
            edges,
            metric: "closure".to_string(),
        }
    }

    /// Rebuilds a graph from its document form. The stored costs are only
    /// used as edges; the metric is always recomputed.
    pub fn from_document(doc: &GraphDocument) -> Result<Self> {
        if doc.metric != "closure" {
            return Err(Error::InvalidArgument(format!(
                "unsupported metric kind {:?}",
                doc.metric
            )));
        }
        let n = doc.vertices.len();
        let mut weights = vec![f64::NAN; n];
        for rec in &doc.vertices {
            if rec.id >= n {
                return Err(Error::VertexOutOfRange { vertex: rec.id, len: n });
            }
            if !weights[rec.id].is_nan() {
                return Err(Error::InvalidArgument(format!("duplicate vertex id {}", rec.id)));
            }
            weights[rec.id] = rec.weight;
        }
        let edges: Vec<Edge> = doc.edges.iter().map(|e| Edge::new(e.u, e.v, e.cost)).collect();
        MetricGraph::metric_closure(n, &edges, weights)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_document())?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: GraphDocument = serde_json::from_str(text)?;
        MetricGraph::from_document(&doc)
    }
}

fn floyd_warshall(n: usize, cost: &mut [f64]) {
    for k in 0..n {
        for i in 0..n {
            let ik = cost[i * n + k];
            if !ik.is_finite() {
                continue;
            }
            for j in 0..n {
                let through = ik + cost[k * n + j];
                if through < cost[i * n + j] {
                    cost[i * n + j] = through;
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexRecord {
    pub id: usize,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub u: usize,
    pub v: usize,
    pub cost: f64,
}

/// On-disk graph format. `metric` must be `"closure"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphDocument {
    pub vertices: Vec<VertexRecord>,
    pub edges: Vec<EdgeRecord>,
    pub metric: String,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn floyd_oracle(n: usize, edges: &[(usize, usize, f64)]) -> Vec<f64> {
        // Plain Bellman-Ford style relaxation, independent of the closure code.
        let mut d = vec![f64::INFINITY; n * n];
        for s in 0..n {
            d[s * n + s] = 0.0;
            for _ in 0..n {
                for &(u, v, c) in edges {
                    if d[s * n + u] + c < d[s * n + v] {
                        d[s * n + v] = d[s * n + u] + c;
                    }
                    if d[s * n + v] + c < d[s * n + u] {
                        d[s * n + u] = d[s * n + v] + c;
                    }
                }
            }
        }
        d
    }

    #[test]
    fn path_closure_sums_edges() {
        let g = MetricGraph::metric_closure(
            3,
            &[Edge::new(0, 1, 1.0), Edge::new(1, 2, 1.0)],
            vec![1.0; 3],
        )
        .unwrap();
        assert_eq!(g.cost(0, 2), 2.0);
        assert_eq!(g.cost(2, 0), 2.0);
    }

    #[test]
    fn triangle_long_edge_is_shortcut() {
        let edges = [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 3.0)];
        let oracle = floyd_oracle(3, &edges);
        let list: Vec<Edge> = edges.iter().map(|&(u, v, c)| Edge::new(u, v, c)).collect();
        let g = MetricGraph::metric_closure(3, &list, vec![1.0; 3]).unwrap();
        assert_eq!(g.cost(0, 2), oracle[2]);
        assert_eq!(g.cost(0, 2), 2.0);
        assert_eq!(g.cost(0, 1), 1.0);
        assert_eq!(g.cost(1, 2), 1.0);
    }

    #[test]
    fn single_vertex_is_zero_matrix() {
        let g = MetricGraph::metric_closure(1, &[], vec![0.5]).unwrap();
        assert_eq!(g.len(), 1);
        assert_eq!(g.cost(0, 0), 0.0);
    }

    #[test]
    fn disconnected_names_pair() {
        let err = MetricGraph::metric_closure(3, &[Edge::new(0, 1, 1.0)], vec![1.0; 3]).unwrap_err();
        assert!(matches!(err, Error::Disconnected(0, 2)), "{err}");
    }

    #[test]
    fn nonpositive_edge_rejected() {
        let err = MetricGraph::metric_closure(2, &[Edge::new(0, 1, 0.0)], vec![1.0; 2]).unwrap_err();
        assert!(matches!(err, Error::BadEdgeCost { .. }));
        let err = MetricGraph::metric_closure(2, &[Edge::new(0, 1, -2.0)], vec![1.0; 2]).unwrap_err();
        assert!(matches!(err, Error::BadEdgeCost { .. }));
    }

    #[test]
    fn subdivide_single_edge() {
        let g = MetricGraph::metric_closure(2, &[Edge::new(0, 1, 2.0)], vec![1.0, 1.0]).unwrap();
        let s = g.subdivide_edges().unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s.weight(2), 0.0);
        assert_eq!(s.cost(0, 2), 1.0);
        assert_eq!(s.cost(2, 1), 1.0);
        assert_eq!(s.cost(0, 1), 2.0);
        assert_eq!(s.edges().unwrap().len(), 2);
    }

    #[test]
    fn subdivide_edgeless_is_unchanged() {
        let g = MetricGraph::metric_closure(1, &[], vec![1.0]).unwrap();
        let s = g.subdivide_edges().unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.cost(0, 0), 0.0);
    }

    #[test]
    fn subdivide_unit_triangle() {
        let g = MetricGraph::metric_closure(
            3,
            &[Edge::new(0, 1, 1.0), Edge::new(1, 2, 1.0), Edge::new(0, 2, 1.0)],
            vec![1.0; 3],
        )
        .unwrap();
        let s = g.subdivide_edges().unwrap();
        assert_eq!(s.len(), 6);
        for u in 0..3 {
            for v in 0..3 {
                assert_eq!(s.cost(u, v), g.cost(u, v));
            }
        }
        // Midpoints of two different edges sharing vertex 0 are 1 apart.
        assert_eq!(s.cost(3, 5), 1.0);
    }

    #[test]
    fn subdivide_requires_edge_list() {
        let g = MetricGraph::from_cost_matrix(vec![1.0, 1.0], vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        assert!(g.subdivide_edges().is_err());
    }

    #[test]
    fn cost_matrix_validation() {
        assert!(MetricGraph::from_cost_matrix(vec![1.0; 2], vec![0.0, 1.0, 2.0, 0.0]).is_err());
        assert!(MetricGraph::from_cost_matrix(vec![1.0; 2], vec![1.0, 1.0, 1.0, 0.0]).is_err());
        assert!(MetricGraph::from_cost_matrix(vec![-1.0, 1.0], vec![0.0, 1.0, 1.0, 0.0]).is_err());
        // 0-1: 1, 1-2: 1, 0-2: 3 violates the triangle inequality.
        let bad = vec![0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0];
        assert!(matches!(
            MetricGraph::from_cost_matrix(vec![1.0; 3], bad),
            Err(Error::InvalidMetric(_))
        ));
    }

    #[test]
    fn document_round_trip_recomputes_closure() {
        let doc = GraphDocument {
            vertices: (0..3).map(|id| VertexRecord { id, weight: 1.0 }).collect(),
            edges: vec![
                EdgeRecord { u: 0, v: 1, cost: 1.0 },
                EdgeRecord { u: 1, v: 2, cost: 1.0 },
                EdgeRecord { u: 0, v: 2, cost: 5.0 },
            ],
            metric: "closure".into(),
        };
        let g = MetricGraph::from_document(&doc).unwrap();
        assert_eq!(g.cost(0, 2), 2.0);
        let back = MetricGraph::from_json(&g.to_json().unwrap()).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn document_rejects_unknown_metric() {
        let text = r#"{"vertices":[{"id":0,"weight":1.0}],"edges":[],"metric":"raw"}"#;
        assert!(MetricGraph::from_json(text).is_err());
    }
}
