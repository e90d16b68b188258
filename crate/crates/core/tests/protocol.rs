use coverage_core::acceptance::oracle_instance;
use coverage_core::experiments::{generate_random_scenario, resolve_scenario, ScenarioTemplate};
use coverage_core::partition::coverage_cost;
use coverage_core::protocol::{
    run_distributed_with, verify_no_improving_swap, verify_trace, MoveShares, MultiHopCost, ProtocolOptions,
};
use coverage_core::solvers::default_epsilon0;
use coverage_core::{Configuration, MetricGraph, NeighborRule};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Oracle-style instances with more robots, so relays of several hops occur.
fn crowded(seed: u64) -> (MetricGraph, Configuration) {
    let (g, _) = oracle_instance(seed).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xC0FFEE);
    let m = (g.len() / 2).clamp(2, 6);
    (g.clone(), Configuration::new(sample(&mut rng, g.len(), m).into_vec()))
}

fn tally(into: &mut MoveShares, s: MoveShares) {
    into.type1 += s.type1;
    into.type2_single += s.type2_single;
    into.type2_multi += s.type2_multi;
}

#[test]
fn crowded_runs_account_exactly() {
    let mut shares = MoveShares::default();
    for seed in 0..300 {
        let (g, init) = crowded(seed);
        let eps0 = default_epsilon0(&g, init.len(), 0.01);
        let opts = ProtocolOptions::new(eps0, NeighborRule::Extended);
        let (res, trace) = run_distributed_with(&g, &init, opts, seed).unwrap();
        let check = verify_trace(&g, &init, &trace, 1e-9).unwrap();
        assert!(check.ok(), "seed {seed}: {:?}", check.violations);
        assert!(verify_no_improving_swap(&g, &res.config, eps0).unwrap().ok, "seed {seed}");
        tally(&mut shares, trace.move_shares());
    }
    assert!(shares.type2_single > 0);
}

#[test]
fn desk_run_traces_verify() {
    let s = generate_random_scenario(&ScenarioTemplate::desk(6), 3).unwrap();
    let inst = resolve_scenario(&s).unwrap();
    let opts = ProtocolOptions::new(inst.epsilon0, NeighborRule::Extended);
    let (res, trace) = run_distributed_with(&inst.graph, &inst.init, opts, 3).unwrap();
    let check = verify_trace(&inst.graph, &inst.init, &trace, 1e-9).unwrap();
    assert!(check.ok(), "{:?}", check.violations);
    assert!(res.cost <= coverage_cost(&inst.graph, &inst.init).unwrap());
    assert_eq!(trace.protocol_errors(), 0);
}

/// Compares relay pricing variants on crowded and desk instances; run with
/// `--ignored --nocapture`.
#[test]
#[ignore]
fn compare_multi_hop_pricing() {
    for mode in [MultiHopCost::VertexAware, MultiHopCost::AsWritten] {
        let mut shares = MoveShares::default();
        let mut mispredicted = 0;
        let mut not_swap_optimal = 0;
        let mut total_cost = 0.0;
        let mut failures = 0;
        let mut instances: Vec<(MetricGraph, Configuration, f64)> = (0..300)
            .map(|seed| {
                let (g, c) = crowded(seed);
                let e = default_epsilon0(&g, c.len(), 0.01);
                (g, c, e)
            })
            .collect();
        for seed in 0..10 {
            let s = generate_random_scenario(&ScenarioTemplate::desk(10), 100 + seed).unwrap();
            let inst = resolve_scenario(&s).unwrap();
            instances.push((inst.graph, inst.init, inst.epsilon0));
        }
        for (k, (g, init, eps0)) in instances.iter().enumerate() {
            let opts = ProtocolOptions {
                multi_hop: mode,
                ..ProtocolOptions::new(*eps0, NeighborRule::Extended)
            };
            match run_distributed_with(g, init, opts, k as u64) {
                Ok((res, trace)) => {
                    tally(&mut shares, trace.move_shares());
                    let check = verify_trace(g, init, &trace, 1e-9).unwrap();
                    if !check.ok() {
                        mispredicted += 1;
                    }
                    if !verify_no_improving_swap(g, &res.config, *eps0).unwrap().ok {
                        not_swap_optimal += 1;
                    }
                    total_cost += res.cost;
                }
                Err(_) => failures += 1,
            }
        }
        println!(
            "{mode:?}: moves {shares:?}, traces with violations {mispredicted}, not swap-optimal {not_swap_optimal}, errors {failures}, total cost {total_cost:.3}"
        );
    }
}
