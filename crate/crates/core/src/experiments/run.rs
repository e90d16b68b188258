use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{random_init, Epsilon0, InitPolicy, Scenario, SolverKind};
use crate::environment::{build_coverage_graph, grid_sample, Discretization, Environment, Point};
use crate::error::{Error, Result};
use crate::graph::MetricGraph;
use crate::partition::{coverage_cost_unchecked, Configuration, NeighborRule};
use crate::protocol::{run_distributed_with, MoveShares, ProtocolOptions};
use crate::solvers::{
    brute_force_optimum, centralized_local_search, default_epsilon0, descent_baseline, DescentMode, SolveResult,
};

/// A scenario turned into a concrete instance.
#[derive(Debug, Clone)]
pub struct ResolvedScenario {
    pub graph: MetricGraph,
    pub init: Configuration,
    pub epsilon0: f64,
    pub discretization: Option<Discretization>,
}

pub fn resolve_scenario(s: &Scenario) -> Result<ResolvedScenario> {
    s.validate()?;
    let (graph, discretization) = match (&s.environment, &s.graph) {
        (Some(env), _) => {
            let disc = grid_sample(env, s.h)?;
            (build_coverage_graph(&disc, s.sensing)?, Some(disc))
        }
        (None, Some(doc)) => (
            MetricGraph::from_document(doc).map_err(|e| Error::scenario("graph", e.to_string()))?,
            None,
        ),
        (None, None) => unreachable!("validated"),
    };
    let n = graph.len();
    let positions = match &s.init {
        InitPolicy::Corner => {
            if s.m > n {
                return Err(Error::scenario("m", format!("{} robots but only {n} vertices", s.m)));
            }
            let key: Vec<f64> = match &discretization {
                Some(d) => d.samples.iter().map(|p| p[0].hypot(p[1])).collect(),
                None => graph.costs_from(0).to_vec(),
            };
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| key[a].total_cmp(&key[b]).then(a.cmp(&b)));
            order.truncate(s.m);
            order
        }
        InitPolicy::Random(seed) => random_init(n, s.m, *seed)?,
        InitPolicy::Explicit(list) => {
            for &v in list {
                graph.check_vertex(v).map_err(|e| Error::scenario("init", e.to_string()))?;
            }
            list.clone()
        }
    };
    let epsilon0 = match s.epsilon0 {
        Epsilon0::Auto => default_epsilon0(&graph, s.m, s.epsilon),
        Epsilon0::Value(v) => v,
    };
    Ok(ResolvedScenario {
        graph,
        init: Configuration::new(positions),
        epsilon0,
        discretization,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverRow {
    pub solver: SolverKind,
    pub cost: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// `100 (cost - cost_centralized) / cost_centralized`.
    pub pct_vs_centralized: Option<f64>,
    pub iterations: usize,
    pub moves: MoveShares,
    pub messages: usize,
    /// Largest proposal or response count of any single wave.
    pub max_wave_messages: usize,
    /// Quadrature estimate of the continuous cost at the final positions.
    pub continuous_cost: Option<f64>,
    pub final_config: Vec<usize>,
    pub cost_curve: Vec<f64>,
    /// Configurations from the initial one through every accepted move.
    pub trajectory: Vec<Vec<usize>>,
    #[serde(skip)]
    pub wall_clock: Duration,
}

impl SolverRow {
    fn failed(solver: SolverKind, err: &Error) -> Self {
        SolverRow {
            solver,
            cost: None,
            error: Some(err.to_string()),
            pct_vs_centralized: None,
            iterations: 0,
            moves: MoveShares::default(),
            messages: 0,
            max_wave_messages: 0,
            continuous_cost: None,
            final_config: Vec::new(),
            cost_curve: Vec::new(),
            trajectory: Vec::new(),
            wall_clock: Duration::ZERO,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub id: String,
    pub vertices: usize,
    pub m: usize,
    pub epsilon0: f64,
    pub initial_cost: Option<f64>,
    pub init: Vec<usize>,
    pub dispersion: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub environment: Option<Environment>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_coords: Option<Vec<Point>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub rows: Vec<SolverRow>,
}

impl ScenarioReport {
    pub fn row(&self, solver: SolverKind) -> Option<&SolverRow> {
        self.rows.iter().find(|r| r.solver == solver)
    }

    pub fn cost(&self, solver: SolverKind) -> Option<f64> {
        self.row(solver).and_then(|r| r.cost)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverSummary {
    pub solver: SolverKind,
    pub scenarios: usize,
    pub mean_cost: Option<f64>,
    pub mean_pct_vs_centralized: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub scenarios: Vec<ScenarioReport>,
    pub summary: Vec<SolverSummary>,
}

fn solver_list(s: &Scenario) -> Vec<SolverKind> {
    let mut out: Vec<SolverKind> = Vec::new();
    for &k in s.solvers.iter().chain([SolverKind::Centralized1].iter()) {
        if !out.contains(&k) {
            out.push(k);
        }
    }
    out
}

fn run_solver(s: &Scenario, inst: &ResolvedScenario, kind: SolverKind) -> Result<SolverRow> {
    let started = Instant::now();
    let g = &inst.graph;
    let eps0 = inst.epsilon0;
    let mut moves = MoveShares::default();
    let mut messages = 0;
    let mut max_wave_messages = 0;
    let mut curve = Vec::new();
    let result: SolveResult = match kind {
        SolverKind::Distributed | SolverKind::Distributed4 | SolverKind::Distributed2 => {
            let factor = match kind {
                SolverKind::Distributed4 => 4,
                SolverKind::Distributed2 => 2,
                _ => s.radius_factor,
            };
            let opts = ProtocolOptions::new(eps0, NeighborRule::from_factor(factor)?);
            let (res, trace) = run_distributed_with(g, &inst.init, opts, s.seed)?;
            moves = trace.move_shares();
            messages = trace.total_messages();
            max_wave_messages = trace.waves.iter().map(|w| w.proposals.max(w.responses)).max().unwrap_or(0);
            curve = trace.cost_curve;
            res
        }
        SolverKind::DescentOwn | SolverKind::DescentNeighbor => {
            let mode = if kind == SolverKind::DescentOwn {
                DescentMode::OwnPartition
            } else {
                DescentMode::NeighborAware
            };
            let res = descent_baseline(g, &inst.init, eps0, mode)?;
            moves.type1 = res.iterations;
            res
        }
        SolverKind::Centralized1 => centralized_local_search(g, &inst.init, 1, eps0)?,
        SolverKind::Centralized2 => centralized_local_search(g, &inst.init, 2, eps0)?,
        SolverKind::BruteForce => brute_force_optimum(g, inst.init.len())?,
    };
    if curve.is_empty() && kind != SolverKind::BruteForce {
        curve = result.history.iter().map(|h| h.cost).collect();
    }
    let mut trajectory = vec![inst.init.positions().to_vec()];
    if kind != SolverKind::BruteForce {
        trajectory.extend(result.history.iter().map(|h| h.config.positions().to_vec()));
    } else {
        trajectory = vec![result.config.positions().to_vec()];
    }
    let continuous_cost = match &inst.discretization {
        Some(d) => Some(d.continuous_cost(result.config.positions(), s.sensing)?),
        None => None,
    };
    Ok(SolverRow {
        solver: kind,
        cost: Some(result.cost),
        error: None,
        pct_vs_centralized: None,
        iterations: result.iterations,
        moves,
        messages,
        max_wave_messages,
        continuous_cost,
        final_config: result.config.positions().to_vec(),
        cost_curve: curve,
        trajectory,
        wall_clock: started.elapsed(),
    })
}

pub(crate) fn pct_difference(cost: f64, anchor: f64) -> Option<f64> {
    if anchor > 0.0 {
        Some(100.0 * (cost - anchor) / anchor)
    } else if cost == anchor {
        Some(0.0)
    } else {
        None
    }
}

/// Runs every selected solver (plus the centralized single-swap anchor)
/// from the same initial configuration. Solver failures are recorded in
/// their row.
pub fn run_scenario(s: &Scenario) -> ScenarioReport {
    let mut report = ScenarioReport {
        id: s.id.clone(),
        vertices: 0,
        m: s.m,
        epsilon0: 0.0,
        initial_cost: None,
        init: Vec::new(),
        dispersion: None,
        environment: s.environment.clone(),
        sample_coords: None,
        error: None,
        rows: Vec::new(),
    };
    let inst = match resolve_scenario(s) {
        Ok(inst) => inst,
        Err(e) => {
            report.error = Some(e.to_string());
            report.rows = solver_list(s).into_iter().map(|k| SolverRow::failed(k, &e)).collect();
            return report;
        }
    };
    report.vertices = inst.graph.len();
    report.epsilon0 = inst.epsilon0;
    report.initial_cost = Some(coverage_cost_unchecked(&inst.graph, inst.init.positions()));
    report.init = inst.init.positions().to_vec();
    if let Some(d) = &inst.discretization {
        report.dispersion = Some(d.dispersion);
        report.sample_coords = Some(d.samples.clone());
    }
    report.rows = solver_list(s)
        .into_iter()
        .map(|k| run_solver(s, &inst, k).unwrap_or_else(|e| SolverRow::failed(k, &e)))
        .collect();
    let anchor = report.cost(SolverKind::Centralized1);
    for row in &mut report.rows {
        row.pct_vs_centralized = match (row.cost, anchor) {
            (Some(c), Some(a)) => pct_difference(c, a),
            _ => None,
        };
    }
    report
}

/// Runs a batch in parallel; rows come back ordered by scenario id, so the
/// report does not depend on scheduling.
pub fn run_experiment(batch: &[Scenario]) -> Report {
    let mut scenarios: Vec<ScenarioReport> = batch.par_iter().map(run_scenario).collect();
    scenarios.sort_by(|a, b| a.id.cmp(&b.id));
    let mut acc: BTreeMap<SolverKind, (usize, f64, usize, f64)> = BTreeMap::new();
    for sr in &scenarios {
        for row in &sr.rows {
            let e = acc.entry(row.solver).or_default();
            if let Some(c) = row.cost {
                e.0 += 1;
                e.1 += c;
            }
            if let Some(p) = row.pct_vs_centralized {
                e.2 += 1;
                e.3 += p;
            }
        }
    }
    let summary = acc
        .into_iter()
        .map(|(solver, (n, sum, np, psum))| SolverSummary {
            solver,
            scenarios: n,
            mean_cost: (n > 0).then(|| sum / n as f64),
            mean_pct_vs_centralized: (np > 0).then(|| psum / np as f64),
        })
        .collect();
    Report { scenarios, summary }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gadget::city_gadget;
    use crate::graph::Edge;

    fn graph_scenario(id: &str, graph: &MetricGraph, init: Vec<usize>, solvers: Vec<SolverKind>) -> Scenario {
        Scenario {
            id: id.into(),
            environment: None,
            graph: Some(graph.to_document()),
            h: 1.0,
            m: init.len(),
            init: InitPolicy::Explicit(init),
            solvers,
            epsilon: 0.01,
            epsilon0: Epsilon0::Auto,
            radius_factor: 4,
            sensing: Default::default(),
            seed: 0,
        }
    }

    fn all_solvers() -> Vec<SolverKind> {
        vec![
            SolverKind::Distributed4,
            SolverKind::Distributed2,
            SolverKind::DescentOwn,
            SolverKind::DescentNeighbor,
            SolverKind::Centralized1,
            SolverKind::Centralized2,
            SolverKind::BruteForce,
        ]
    }

    #[test]
    fn full_cover_batch_costs_zero() {
        let g = MetricGraph::metric_closure(3, &[Edge::new(0, 1, 1.0), Edge::new(1, 2, 1.0)], vec![1.0; 3]).unwrap();
        let report = run_experiment(&[graph_scenario("t", &g, vec![0, 1, 2], all_solvers())]);
        for row in &report.scenarios[0].rows {
            assert_eq!(row.cost, Some(0.0), "{:?}", row.solver);
            assert_eq!(row.pct_vs_centralized, Some(0.0));
        }
    }

    #[test]
    fn gadget_batch_separates_solvers() {
        let gad = city_gadget(4, 0.5, 10.0).unwrap();
        let s = graph_scenario("gadget", &gad.graph, gad.bad.positions().to_vec(), all_solvers());
        let report = run_experiment(&[s]);
        let sr = &report.scenarios[0];
        assert_eq!(sr.cost(SolverKind::DescentOwn), Some(10.0));
        assert_eq!(sr.cost(SolverKind::DescentNeighbor), Some(10.0));
        assert_eq!(sr.cost(SolverKind::Distributed4), Some(1.0));
        assert_eq!(sr.cost(SolverKind::Centralized1), Some(1.0));
        assert_eq!(sr.cost(SolverKind::BruteForce), Some(1.0));
        assert_eq!(sr.row(SolverKind::DescentOwn).unwrap().pct_vs_centralized, Some(900.0));
    }

    #[test]
    fn percentages_recompute_from_costs() {
        let gad = city_gadget(3, 0.5, 6.0).unwrap();
        let s = graph_scenario("g", &gad.graph, gad.bad.positions().to_vec(), all_solvers());
        let sr = run_scenario(&s);
        let anchor = sr.cost(SolverKind::Centralized1).unwrap();
        for row in &sr.rows {
            let expected = 100.0 * (row.cost.unwrap() - anchor) / anchor;
            assert!((row.pct_vs_centralized.unwrap() - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn failures_stay_in_their_row() {
        let g = MetricGraph::metric_closure(3, &[Edge::new(0, 1, 1.0), Edge::new(1, 2, 1.0)], vec![1.0; 3]).unwrap();
        let mut s = graph_scenario("bad", &g, vec![0], vec![SolverKind::Distributed4]);
        s.init = InitPolicy::Explicit(vec![9]);
        let report = run_experiment(&[s, graph_scenario("ok", &g, vec![0], vec![SolverKind::Distributed4])]);
        assert!(report.scenarios[0].error.is_some());
        assert!(report.scenarios[0].rows.iter().all(|r| r.error.is_some()));
        assert_eq!(report.scenarios[1].cost(SolverKind::Distributed4), Some(2.0));
    }

    #[test]
    fn corner_init_on_environment() {
        let env = Environment::new([1.0, 1.0], vec![], crate::environment::Density::Uniform).unwrap();
        let s = Scenario {
            id: "sq".into(),
            environment: Some(env),
            graph: None,
            h: 0.25,
            m: 3,
            init: InitPolicy::Corner,
            solvers: vec![SolverKind::Distributed4],
            epsilon: 0.01,
            epsilon0: Epsilon0::Auto,
            radius_factor: 4,
            sensing: Default::default(),
            seed: 1,
        };
        let inst = resolve_scenario(&s).unwrap();
        // (0.125, 0.125) first, then its two equidistant neighbours by index.
        assert_eq!(inst.init.positions(), &[0, 1, 4]);
    }
}
