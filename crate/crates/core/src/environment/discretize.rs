use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::FineGrid;
use super::{Environment, Point};
use crate::error::{Error, Result};
use crate::graph::{GraphDocument, MetricGraph};
use crate::sensing::SensingFunction;

/// Fine-grid cells per sample cell along each axis. Odd, so that every
/// sample center is itself a fine-grid node.
pub const DEFAULT_FINE_FACTOR: usize = 5;

/// Grid samples of an environment together with the fine grid that links
/// the discrete instance back to the continuous one.
///
/// Distances are measured in one consistent metric: a point is attached to
/// its nearest free fine node (its anchor) by a straight segment, and anchors
/// are joined by 8-connected grid paths.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub samples: Vec<Point>,
    /// Sample cell size `[dx, dy]`.
    pub cell: [f64; 2],
    pub fine_factor: usize,
    pub fine: FineGrid,
    /// Largest distance from a free fine node to its nearest sample.
    pub dispersion: f64,
    pub weights: Vec<f64>,
    anchors: Vec<(usize, f64)>,
    sigma: Vec<usize>,
    sigma_dist: Vec<f64>,
    geodesic: Vec<f64>,
}

/// Metadata written next to the graph document when exporting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscretizationSidecar {
    pub dispersion: f64,
    pub sample_coords: Vec<Point>,
    pub cell_size: [f64; 2],
    pub fine_factor: usize,
}

pub fn grid_sample(env: &Environment, cell_size: f64) -> Result<Discretization> {
    grid_sample_with(env, cell_size, DEFAULT_FINE_FACTOR)
}

fn coarse_grid(env: &Environment, cell_size: f64) -> (usize, usize, [f64; 2]) {
    let nx = ((env.bounds[0] / cell_size).round() as usize).max(1);
    let ny = ((env.bounds[1] / cell_size).round() as usize).max(1);
    (nx, ny, [env.bounds[0] / nx as f64, env.bounds[1] / ny as f64])
}

fn free_centers(env: &Environment, cell_size: f64) -> Vec<(Point, (usize, usize))> {
    let (nx, ny, cell) = coarse_grid(env, cell_size);
    let mut out = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            let c = [(i as f64 + 0.5) * cell[0], (j as f64 + 0.5) * cell[1]];
            if env.is_free(c) {
                out.push((c, (i, j)));
            }
        }
    }
    out
}

/// Number of cell centres in free space, without building the graph.
pub fn sample_count(env: &Environment, cell_size: f64) -> usize {
    free_centers(env, cell_size).len()
}

/// Samples the centers of a regular grid of cells whose center is free.
pub fn grid_sample_with(env: &Environment, cell_size: f64, fine_factor: usize) -> Result<Discretization> {
    env.validate()?;
    if !(cell_size > 0.0 && cell_size.is_finite()) {
        return Err(Error::InvalidArgument(format!("cell size must be positive, got {cell_size}")));
    }
    if fine_factor == 0 {
        return Err(Error::InvalidArgument("fine factor must be at least 1".into()));
    }
    let (nx, ny, cell) = coarse_grid(env, cell_size);
    let (samples, sample_cells): (Vec<Point>, Vec<(usize, usize)>) = free_centers(env, cell_size).into_iter().unzip();
    if samples.is_empty() {
        return Err(Error::DisconnectedDiscretization(
            "no sample cell center lies in free space".into(),
        ));
    }

    let fine = FineGrid::new(env, nx * fine_factor, ny * fine_factor);
    let components = fine.free_components();
    if components != 1 {
        return Err(Error::DisconnectedDiscretization(format!(
            "the fine grid splits the free space into {components} components"
        )));
    }

    let anchors: Vec<(usize, f64)> = samples
        .iter()
        .zip(&sample_cells)
        .map(|(&p, &(i, j))| {
            if fine_factor % 2 == 1 {
                let half = (fine_factor - 1) / 2;
                let idx = fine.index(i * fine_factor + half, j * fine_factor + half);
                if fine.is_free(idx) {
                    let c = fine.center(idx);
                    let off = ((c[0] - p[0]).powi(2) + (c[1] - p[1]).powi(2)).sqrt();
                    return (idx, off);
                }
            }
            fine.nearest_free_node(p).expect("grid has free nodes")
        })
        .collect();

    let sources: Vec<(usize, f64, usize)> = anchors
        .iter()
        .enumerate()
        .map(|(s, &(node, off))| (node, off, s))
        .collect();
    let (sigma_dist, sigma) = fine.dijkstra(&sources);
    let mut dispersion: f64 = 0.0;
    for idx in 0..fine.len() {
        if fine.is_free(idx) {
            if sigma[idx] == usize::MAX {
                return Err(Error::DisconnectedDiscretization(format!(
                    "fine node {idx} is unreachable from every sample"
                )));
            }
            dispersion = dispersion.max(sigma_dist[idx]);
        }
    }

    let s = samples.len();
    let rows: Vec<Vec<f64>> = (0..s)
        .into_par_iter()
        .map(|a| {
            let (node, off) = anchors[a];
            let (dist, _) = fine.dijkstra(&[(node, off, 0)]);
            (0..s)
                .map(|b| {
                    if a == b {
                        0.0
                    } else {
                        dist[anchors[b].0] + anchors[b].1
                    }
                })
                .collect()
        })
        .collect();
    let mut geodesic = vec![0.0; s * s];
    for a in 0..s {
        for b in 0..s {
            // Symmetrize against rounding differences between the two runs.
            geodesic[a * s + b] = rows[a][b].min(rows[b][a]);
        }
    }

    let mut disc = Discretization {
        samples,
        cell,
        fine_factor,
        fine,
        dispersion,
        weights: Vec::new(),
        anchors,
        sigma,
        sigma_dist,
        geodesic,
    };
    disc.weights = vertex_weights(&disc, env);
    Ok(disc)
}

/// Density mass of each sample's cell of nearest fine points.
pub fn vertex_weights(disc: &Discretization, env: &Environment) -> Vec<f64> {
    let fine = FineGrid::new(env, disc.fine.nx, disc.fine.ny);
    let mut weights = vec![0.0; disc.samples.len()];
    for idx in 0..fine.len() {
        let s = disc.sigma[idx];
        if s != usize::MAX {
            weights[s] += fine.mass(idx);
        }
    }
    let total: f64 = weights.iter().sum();
    if total > 0.0 {
        for w in &mut weights {
            *w /= total;
        }
    }
    weights
}

/// Metric graph over the samples with `cost(u, v) = f(d(u, v))`.
pub fn build_coverage_graph(disc: &Discretization, f: SensingFunction) -> Result<MetricGraph> {
    let cost: Vec<f64> = disc.geodesic.iter().map(|&d| f.eval(d)).collect();
    MetricGraph::from_cost_matrix(disc.weights.clone(), cost).map_err(|e| match e {
        Error::InvalidMetric(msg) => Error::InvalidMetric(format!("coverage graph: {msg}")),
        other => other,
    })
}

impl Discretization {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Grid distance between two samples.
    pub fn geodesic(&self, a: usize, b: usize) -> f64 {
        self.geodesic[a * self.samples.len() + b]
    }

    /// Nearest sample of a fine node and the distance to it.
    pub fn nearest_sample(&self, fine_node: usize) -> Option<(usize, f64)> {
        let s = self.sigma[fine_node];
        (s != usize::MAX).then(|| (s, self.sigma_dist[fine_node]))
    }

    /// Half the diagonal of a sample cell: the dispersion of cell centers in
    /// an obstacle-free rectangle under straight-line distance.
    pub fn cell_dispersion(&self) -> f64 {
        0.5 * (self.cell[0].powi(2) + self.cell[1].powi(2)).sqrt()
    }

    /// `H(Q)` by midpoint quadrature over the fine grid, with robots placed
    /// on the given samples.
    pub fn continuous_cost(&self, sample_positions: &[usize], f: SensingFunction) -> Result<f64> {
        if sample_positions.is_empty() {
            return Err(Error::EmptyConfiguration);
        }
        let sources: Vec<(usize, f64, usize)> = sample_positions
            .iter()
            .enumerate()
            .map(|(r, &s)| {
                let (node, off) = self.anchors[s];
                (node, off, r)
            })
            .collect();
        quadrature(&self.fine, &sources, f)
    }

    /// The sample nearest to each fine point, used to recover `σ`-cells.
    pub fn sigma(&self) -> &[usize] {
        &self.sigma
    }

    pub fn export(&self, f: SensingFunction) -> Result<(GraphDocument, DiscretizationSidecar)> {
        let graph = build_coverage_graph(self, f)?;
        Ok((
            graph.to_document(),
            DiscretizationSidecar {
                dispersion: self.dispersion,
                sample_coords: self.samples.clone(),
                cell_size: self.cell,
                fine_factor: self.fine_factor,
            },
        ))
    }
}

fn quadrature(fine: &FineGrid, sources: &[(usize, f64, usize)], f: SensingFunction) -> Result<f64> {
    let (dist, _) = fine.dijkstra(sources);
    let mut total = 0.0;
    for idx in 0..fine.len() {
        let mass = fine.mass(idx);
        if mass == 0.0 {
            continue;
        }
        let d = dist[idx];
        if !d.is_finite() {
            let c = fine.center(idx);
            return Err(Error::DisconnectedDiscretization(format!(
                "fine point ({}, {}) cannot reach any robot",
                c[0], c[1]
            )));
        }
        total += mass * f.eval(d);
    }
    Ok(total)
}

fn anchor(env: &Environment, fine: &FineGrid, p: Point) -> Result<(usize, f64)> {
    if !env.is_free(p) {
        return Err(Error::NotInFreeSpace { x: p[0], y: p[1] });
    }
    fine.nearest_free_node(p)
        .ok_or(Error::NotInFreeSpace { x: p[0], y: p[1] })
}

/// `H(Q)` for arbitrary free robot points on a fresh fine grid of the given
/// resolution.
pub fn continuous_cost(
    env: &Environment,
    robot_points: &[Point],
    f: SensingFunction,
    fine_resolution: f64,
) -> Result<f64> {
    if robot_points.is_empty() {
        return Err(Error::EmptyConfiguration);
    }
    let fine = FineGrid::with_resolution(env, fine_resolution);
    let mut sources = Vec::with_capacity(robot_points.len());
    for (r, &p) in robot_points.iter().enumerate() {
        let (node, off) = anchor(env, &fine, p)?;
        sources.push((node, off, r));
    }
    quadrature(&fine, &sources, f)
}

/// Shortest free path length between two points on an 8-connected grid of
/// the given resolution.
pub fn geodesic_distance(env: &Environment, p: Point, q: Point, fine_resolution: f64) -> Result<f64> {
    let fine = FineGrid::with_resolution(env, fine_resolution);
    let (np, op) = anchor(env, &fine, p)?;
    let (nq, oq) = anchor(env, &fine, q)?;
    if p == q {
        return Ok(0.0);
    }
    let (dist, _) = fine.dijkstra(&[(np, op, 0)]);
    let d = dist[nq];
    if d.is_finite() {
        Ok(d + oq)
    } else {
        Err(Error::Unreachable(p[0], p[1], q[0], q[1]))
    }
}
