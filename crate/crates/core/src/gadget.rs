//! Adversarial "city" instances on which within-cell descent gets stuck
//! arbitrarily far from the optimum.
//!
//! `n + 1` unit-weight cities sit pairwise `L` apart. City 0 consists of two
//! vertices `a` and `b` at distance 1, joined through a zero-weight midpoint
//! `z`. The bad configuration puts two robots in city 0 (on `a` and `b`) and
//! one on each of `city_1 .. city_{n-1}`, so `city_n` is served from distance
//! `L`. The robot on `city_1` has the smallest UID and therefore owns
//! `city_n`; no robot can improve by moving inside its own cell.

use crate::error::{Error, Result};
use crate::graph::{Edge, MetricGraph};
use crate::partition::{coverage_cost_unchecked, Configuration};
use crate::solvers::{best_descent_move, DescentMode};

#[derive(Debug, Clone)]
pub struct GadgetInstance {
    pub graph: MetricGraph,
    pub bad: Configuration,
    pub good: Configuration,
    pub a: usize,
    pub b: usize,
    /// Midpoint between `a` and `b`.
    pub midpoint: usize,
    /// `city_1 .. city_n` in order.
    pub cities: Vec<usize>,
    /// Weight parameter carried for reporting; costs do not depend on it.
    pub eps: f64,
    pub distance: f64,
}

impl GadgetInstance {
    pub fn robot_at(&self, config: &Configuration, vertex: usize) -> Option<usize> {
        config.positions().iter().position(|&q| q == vertex)
    }
}

/// Generates the city gadget and certifies that the bad configuration is a
/// local optimum of both descent baselines.
pub fn city_gadget(n: usize, eps: f64, distance: f64) -> Result<GadgetInstance> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("gadget needs n >= 2, got {n}")));
    }
    if !(distance > 2.0 && distance.is_finite()) {
        return Err(Error::InvalidArgument(format!("gadget needs L > 2, got {distance}")));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidArgument(format!("gadget needs eps in (0, 1), got {eps}")));
    }
    let a = 0;
    let b = 1;
    let cities: Vec<usize> = (2..n + 2).collect();
    let midpoint = n + 2;
    let vertex_count = n + 3;

    let mut weights = vec![1.0; vertex_count];
    weights[midpoint] = 0.0;

    let mut edges = vec![Edge::new(a, midpoint, 0.5), Edge::new(midpoint, b, 0.5)];
    let mut hubs = vec![a, b];
    hubs.extend(&cities);
    for (i, &u) in hubs.iter().enumerate() {
        for &v in &hubs[i + 1..] {
            if (u, v) != (a, b) {
                edges.push(Edge::new(u, v, distance));
            }
        }
    }
    let graph = MetricGraph::metric_closure(vertex_count, &edges, weights)?;

    let mut bad: Vec<usize> = cities[..n - 1].to_vec();
    bad.extend([a, b]);
    let mut good = vec![a];
    good.extend(&cities);

    let instance = GadgetInstance {
        graph,
        bad: Configuration::new(bad),
        good: Configuration::new(good),
        a,
        b,
        midpoint,
        cities,
        eps,
        distance,
    };
    certify(&instance)?;
    Ok(instance)
}

fn certify(g: &GadgetInstance) -> Result<()> {
    let bad_cost = coverage_cost_unchecked(&g.graph, g.bad.positions());
    let good_cost = coverage_cost_unchecked(&g.graph, g.good.positions());
    if bad_cost != g.distance || good_cost != 1.0 {
        return Err(Error::InvalidMetric(format!(
            "gadget costs {bad_cost} / {good_cost} do not match the construction"
        )));
    }
    for mode in [DescentMode::OwnPartition, DescentMode::NeighborAware] {
        for robot in 0..g.bad.len() {
            if let Some((v, gain)) = best_descent_move(&g.graph, &g.bad, robot, mode) {
                if gain < 0.0 {
                    return Err(Error::InvalidMetric(format!(
                        "gadget is not a descent local optimum: robot {robot} -> {v} gains {gain}"
                    )));
                }
            }
        }
    }
    Ok(())
}
