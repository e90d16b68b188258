//! Library results checked against oracles written independently here.

use coverage_core::acceptance::oracle_instance;
use coverage_core::environment::{build_coverage_graph, grid_sample, Density, Environment};
use coverage_core::gadget::city_gadget;
use coverage_core::protocol::run_distributed;
use coverage_core::solvers::{brute_force_optimum, default_epsilon0, descent_baseline, DescentMode};
use coverage_core::{Configuration, MetricGraph, NeighborRule, SensingFunction};

fn cost(g: &MetricGraph, positions: &[usize]) -> f64 {
    (0..g.len())
        .map(|u| g.weight(u) * positions.iter().map(|&q| g.cost(u, q)).fold(f64::INFINITY, f64::min))
        .sum()
}

/// Recursive enumeration of all `m`-subsets.
fn optimum(g: &MetricGraph, m: usize) -> f64 {
    fn go(g: &MetricGraph, m: usize, start: usize, chosen: &mut Vec<usize>, best: &mut f64) {
        if chosen.len() == m {
            *best = best.min(cost(g, chosen));
            return;
        }
        for v in start..g.len() {
            chosen.push(v);
            go(g, m, v + 1, chosen, best);
            chosen.pop();
        }
    }
    let mut best = f64::INFINITY;
    go(g, m, 0, &mut Vec::new(), &mut best);
    best
}

#[test]
fn brute_force_matches_enumeration() {
    for seed in 0..60 {
        let (g, init) = oracle_instance(seed).unwrap();
        let lib = brute_force_optimum(&g, init.len()).unwrap();
        let ours = optimum(&g, init.len());
        assert!((lib.cost - ours).abs() <= 1e-12 * ours.max(1.0), "seed {seed}: {} vs {ours}", lib.cost);
        assert!((cost(&g, lib.config.positions()) - lib.cost).abs() <= 1e-12 * ours.max(1.0));
    }
}

#[test]
fn distributed_within_five_times_optimum() {
    for seed in 0..60 {
        let (g, init) = oracle_instance(seed).unwrap();
        let m = init.len();
        let eps0 = default_epsilon0(&g, m, 0.01);
        let (res, _) = run_distributed(&g, &init, eps0, NeighborRule::Extended, seed).unwrap();
        assert!(res.cost <= 5.0 * optimum(&g, m) + eps0 * (g.len() * m) as f64, "seed {seed}");
    }
}

#[test]
fn gadget_costs_from_first_principles() {
    // n = 4 cities at L = 10 plus the split city {a, b}: in the bad
    // configuration only city_4 is uncovered, at distance L; at the optimum
    // every city holds a robot and b is served from a at distance 1.
    let gad = city_gadget(4, 0.5, 10.0).unwrap();
    assert_eq!(cost(&gad.graph, gad.bad.positions()), 10.0);
    assert_eq!(cost(&gad.graph, gad.good.positions()), 1.0);
    assert_eq!(optimum(&gad.graph, gad.bad.len()), 1.0);
    let eps0 = default_epsilon0(&gad.graph, gad.bad.len(), 0.01);
    for mode in [DescentMode::OwnPartition, DescentMode::NeighborAware] {
        assert_eq!(descent_baseline(&gad.graph, &gad.bad, eps0, mode).unwrap().cost, 10.0);
    }
    let (res, _) = run_distributed(&gad.graph, &gad.bad, eps0, NeighborRule::Extended, 0).unwrap();
    assert_eq!(res.cost, 1.0);
}

#[test]
fn segment_optimum_matches_closed_form() {
    // N equal cells of width 1/N with mass 1/N; one robot on centre j costs
    // sum_k |k - j| / N^2, minimized at the middle cell.
    let env = Environment::segment(1.0, Density::Uniform).unwrap();
    for n in [8usize, 16, 32] {
        let disc = grid_sample(&env, 1.0 / n as f64).unwrap();
        let g = build_coverage_graph(&disc, SensingFunction::Identity).unwrap();
        let closed = (0..n)
            .map(|j| (0..n).map(|k| k.abs_diff(j) as f64).sum::<f64>() / (n * n) as f64)
            .fold(f64::INFINITY, f64::min);
        assert!((closed - 0.25).abs() < 1e-12);
        let eps0 = default_epsilon0(&g, 1, 0.01);
        let (res, _) = run_distributed(&g, &Configuration::new(vec![0]), eps0, NeighborRule::Extended, 0).unwrap();
        assert!((res.cost - closed).abs() < 1e-9, "n {n}: {}", res.cost);
    }
}
