use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};

use super::{Environment, Point};

/// Dense grid of cell centers used for geodesics and quadrature.
///
/// Nodes are 8-connected; a diagonal step is only allowed when both
/// orthogonal neighbours are free, so paths never clip obstacle corners.
#[derive(Debug, Clone)]
pub struct FineGrid {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
    free: Vec<bool>,
    mass: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Entry {
    dist: f64,
    label: usize,
    node: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        // Reversed for a min-heap.
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.label.cmp(&self.label))
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl FineGrid {
    pub fn new(env: &Environment, nx: usize, ny: usize) -> Self {
        let nx = nx.max(1);
        let ny = ny.max(1);
        let dx = env.bounds[0] / nx as f64;
        let dy = env.bounds[1] / ny as f64;
        let mut grid = FineGrid {
            nx,
            ny,
            dx,
            dy,
            free: Vec::with_capacity(nx * ny),
            mass: vec![0.0; nx * ny],
        };
        for idx in 0..nx * ny {
            let c = grid.center(idx);
            grid.free.push(env.is_free(c));
        }
        let logs: Vec<f64> = (0..nx * ny)
            .map(|idx| {
                if grid.free[idx] {
                    env.density.log_density(grid.center(idx))
                } else {
                    f64::NEG_INFINITY
                }
            })
            .collect();
        let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if top.is_finite() {
            let mut total = 0.0;
            for (m, l) in grid.mass.iter_mut().zip(&logs) {
                if l.is_finite() {
                    *m = (l - top).exp();
                    total += *m;
                }
            }
            for m in &mut grid.mass {
                *m /= total;
            }
        }
        grid
    }

    /// Grid whose cells are as close to `resolution` on a side as the bounds
    /// allow; a dimension shorter than one cell gets a single row.
    pub fn with_resolution(env: &Environment, resolution: f64) -> Self {
        let nx = (env.bounds[0] / resolution).round() as usize;
        let ny = (env.bounds[1] / resolution).round() as usize;
        FineGrid::new(env, nx, ny)
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn center(&self, idx: usize) -> Point {
        let (i, j) = (idx % self.nx, idx / self.nx);
        [(i as f64 + 0.5) * self.dx, (j as f64 + 0.5) * self.dy]
    }

    pub fn is_free(&self, idx: usize) -> bool {
        self.free[idx]
    }

    /// Normalized density mass of the node's cell (0 when blocked).
    pub fn mass(&self, idx: usize) -> f64 {
        self.mass[idx]
    }

    pub fn free_count(&self) -> usize {
        self.free.iter().filter(|f| **f).count()
    }

    /// Nearest free node by straight-line distance, ties to the smaller index.
    pub fn nearest_free_node(&self, p: Point) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for idx in 0..self.len() {
            if !self.free[idx] {
                continue;
            }
            let c = self.center(idx);
            let d = ((c[0] - p[0]).powi(2) + (c[1] - p[1]).powi(2)).sqrt();
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((idx, d));
            }
        }
        best
    }

    fn for_each_neighbor(&self, idx: usize, mut visit: impl FnMut(usize, f64)) {
        let (i, j) = ((idx % self.nx) as isize, (idx / self.nx) as isize);
        let diag = (self.dx * self.dx + self.dy * self.dy).sqrt();
        let free_at = |a: isize, b: isize| -> bool {
            a >= 0
                && b >= 0
                && (a as usize) < self.nx
                && (b as usize) < self.ny
                && self.free[b as usize * self.nx + a as usize]
        };
        for (di, dj) in [(-1isize, 0isize), (1, 0), (0, -1), (0, 1)] {
            if free_at(i + di, j + dj) {
                let cost = if di != 0 { self.dx } else { self.dy };
                visit(((j + dj) as usize) * self.nx + (i + di) as usize, cost);
            }
        }
        for (di, dj) in [(-1isize, -1isize), (1, -1), (-1, 1), (1, 1)] {
            if free_at(i + di, j + dj) && free_at(i + di, j) && free_at(i, j + dj) {
                visit(((j + dj) as usize) * self.nx + (i + di) as usize, diag);
            }
        }
    }

    /// Multi-source Dijkstra. Each source is `(node, initial distance,
    /// label)`; the result holds per-node distance and the label of the
    /// source reaching it first (ties to the smaller label). Unreachable or
    /// blocked nodes get `INFINITY` and `usize::MAX`.
    pub fn dijkstra(&self, sources: &[(usize, f64, usize)]) -> (Vec<f64>, Vec<usize>) {
        let n = self.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut label = vec![usize::MAX; n];
        let mut done = vec![false; n];
        let mut heap = BinaryHeap::new();
        for &(node, d, l) in sources {
            if d < dist[node] || (d == dist[node] && l < label[node]) {
                dist[node] = d;
                label[node] = l;
                heap.push(Entry { dist: d, label: l, node });
            }
        }
        while let Some(Entry { dist: d, label: l, node }) = heap.pop() {
            if done[node] || d != dist[node] || l != label[node] {
                continue;
            }
            done[node] = true;
            self.for_each_neighbor(node, |next, step| {
                let nd = d + step;
                if !done[next] && (nd < dist[next] || (nd == dist[next] && l < label[next])) {
                    dist[next] = nd;
                    label[next] = l;
                    heap.push(Entry {
                        dist: nd,
                        label: l,
                        node: next,
                    });
                }
            });
        }
        (dist, label)
    }

    /// Number of 8-connected components among free nodes.
    pub fn free_components(&self) -> usize {
        let mut seen = vec![false; self.len()];
        let mut count = 0;
        for start in 0..self.len() {
            if !self.free[start] || seen[start] {
                continue;
            }
            count += 1;
            seen[start] = true;
            let mut queue = VecDeque::from([start]);
            while let Some(u) = queue.pop_front() {
                self.for_each_neighbor(u, |v, _| {
                    if !seen[v] {
                        seen[v] = true;
                        queue.push_back(v);
                    }
                });
            }
        }
        count
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::{rectangle, Density};

    #[test]
    fn octile_distance_on_open_grid() {
        let env = Environment::new([1.0, 1.0], vec![], Density::Uniform).unwrap();
        let g = FineGrid::new(&env, 10, 10);
        let (d, _) = g.dijkstra(&[(g.index(0, 0), 0.0, 0)]);
        let far = d[g.index(9, 4)];
        let expected = 0.1 * (5.0 + 4.0 * 2f64.sqrt());
        assert!((far - expected).abs() < 1e-12, "{far} vs {expected}");
    }

    #[test]
    fn uniform_mass_is_even() {
        let env = Environment::new([1.0, 1.0], vec![rectangle(0.5, 0.0, 1.0, 1.0)], Density::Uniform).unwrap();
        let g = FineGrid::new(&env, 4, 4);
        assert_eq!(g.free_count(), 8);
        let total: f64 = (0..g.len()).map(|i| g.mass(i)).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert_eq!(g.mass(g.index(0, 0)), 0.125);
        assert_eq!(g.mass(g.index(3, 0)), 0.0);
    }

    #[test]
    fn wall_splits_components() {
        let env = Environment::new([1.0, 1.0], vec![rectangle(0.4, 0.0, 0.6, 1.0)], Density::Uniform).unwrap();
        assert_eq!(FineGrid::new(&env, 10, 10).free_components(), 2);
        let env = Environment::new([1.0, 1.0], vec![rectangle(0.4, 0.0, 0.6, 0.8)], Density::Uniform).unwrap();
        assert_eq!(FineGrid::new(&env, 10, 10).free_components(), 1);
    }

    #[test]
    fn diagonal_does_not_clip_corners() {
        // Two blocked cells touching at a corner leave no diagonal shortcut.
        let env = Environment::new(
            [2.0, 2.0],
            vec![rectangle(1.0, 0.0, 2.0, 1.0), rectangle(0.0, 1.0, 1.0, 2.0)],
            Density::Uniform,
        )
        .unwrap();
        let g = FineGrid::new(&env, 2, 2);
        assert_eq!(g.free_components(), 2);
    }
}
