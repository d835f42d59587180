use skyrelay_core::demand::DemandProfile;
use skyrelay_core::formulation::{build_model, SolverConfig};
use skyrelay_core::netgraph::{build_wifi_graph, relay_matrix, DistributionGraph};
use skyrelay_core::plan::{Hops, Plan, Variant};
use skyrelay_core::scenario::{Household, Scenario};
use skyrelay_core::solver::bnb::solve_mip;
use skyrelay_core::solver::exact::plan_exact;
use skyrelay_core::solver::greedy::{greedy_one_hop, greedy_two_hop, GreedyConfig};
use skyrelay_core::validator::validate_plan;

fn scenario(points: &[(f64, f64)]) -> Scenario {
    let homes = points.iter().enumerate().map(|(i, &(x, y))| Household::new(format!("n{i}"), x, y)).collect();
    Scenario::with_households(homes)
}

fn chain(n: usize, step: f64) -> Scenario {
    scenario(&(0..n).map(|i| (i as f64 * step, 0.0)).collect::<Vec<_>>())
}

/// Hub at the origin with four leaves 30 m away. Leaf-to-leaf links exist
/// but are too slow for 30 Mbps.
fn star() -> Scenario {
    scenario(&[(0.0, 0.0), (30.0, 0.0), (0.0, 30.0), (-30.0, 0.0), (0.0, -30.0)])
}

fn roles(graph: &DistributionGraph, plan: &Plan) -> (Vec<usize>, Vec<usize>, Vec<usize>) {
    let layer = &plan.layers[0];
    let sources: Vec<usize> = plan.sources.iter().copied().collect();
    let relays: Vec<usize> = layer.relays.iter().copied().collect();
    let terminals = graph
        .real_nodes()
        .filter(|n| !plan.sources.contains(n) && !layer.relays.contains(n))
        .collect();
    (sources, relays, terminals)
}

fn assert_valid(s: &Scenario, graph: &DistributionGraph, plan: &Plan, demands: &[f64]) {
    let profile = DemandProfile::fixed(demands.to_vec());
    let report = validate_plan(plan, graph, &profile, plan.variant, s).unwrap();
    assert!(report.feasible(), "{}", report.to_text());
}

#[test]
fn greedy_line_chooses_the_middle_node() {
    let s = chain(3, 50.0);
    let g = build_wifi_graph(&s);
    let d = vec![5.0; 3];
    let (plan, _) = greedy_one_hop(&g, &relay_matrix(&g, &d), &d, GreedyConfig::new(5));
    assert_eq!(roles(&g, &plan).0, vec![1]);
    assert_valid(&s, &g, &plan, &d);
}

#[test]
fn greedy_star_with_two_slots_needs_three_antennas() {
    let s = star();
    let g = build_wifi_graph(&s);
    let d = vec![30.0; 5];
    let m = relay_matrix(&g, &d);
    assert_eq!(m.bin(0).len(), 4);
    assert!((1..5).all(|leaf| m.bin(leaf) == [0]));
    let (plan, trace) = greedy_one_hop(&g, &m, &d, GreedyConfig::new(2));
    assert_eq!(plan.antenna_count(), 3);
    assert!(plan.sources.contains(&0));
    assert_eq!(trace.steps[0].receivers.len(), 2);
    assert_valid(&s, &g, &plan, &d);
}

#[test]
fn greedy_chain_two_hop_uses_one_source_two_relays() {
    // 30 m hops carry 39 Mbps at one stream: room for two 15 Mbps demands.
    let s = chain(5, 30.0);
    let g = build_wifi_graph(&s);
    let d = vec![15.0; 5];
    let (plan, _) = greedy_two_hop(&g, &d, GreedyConfig::new(5));
    let (sources, relays, terminals) = roles(&g, &plan);
    assert_eq!(sources, vec![2]);
    assert_eq!(relays, vec![1, 3]);
    assert_eq!(terminals, vec![0, 4]);
    assert_valid(&s, &g, &plan, &d);
}

#[test]
fn greedy_chain_without_second_hop_room_adds_sources() {
    // 39 Mbps links carry one 25 Mbps demand but not two.
    let s = chain(5, 30.0);
    let g = build_wifi_graph(&s);
    let d = vec![25.0; 5];
    let (plan, _) = greedy_two_hop(&g, &d, GreedyConfig::new(5));
    assert!(plan.antenna_count() >= 2);
    assert!(plan.layers[0].relays.is_empty());
    assert_valid(&s, &g, &plan, &d);
}

#[test]
fn greedy_single_node_is_its_own_source() {
    let s = chain(1, 0.0);
    let g = build_wifi_graph(&s);
    let (plan, _) = greedy_two_hop(&g, &[5.0], GreedyConfig::new(5));
    assert_eq!(roles(&g, &plan).0, vec![0]);
}

#[test]
fn exact_chain_two_hop_needs_one_antenna() {
    let s = chain(5, 30.0);
    let profile = DemandProfile::fixed(vec![15.0; 5]);
    let out = plan_exact(&s, Variant::fixed(Hops::Two, false), &profile, &SolverConfig::default()).unwrap();
    assert!(out.proven_optimal());
    assert_eq!(out.antenna_count(), 1);
    assert_eq!(out.plans[0].sources.iter().copied().collect::<Vec<_>>(), vec![2]);
}

#[test]
fn exact_line_one_hop_uses_the_middle() {
    let s = chain(3, 50.0);
    let g = build_wifi_graph(&s);
    let profile = DemandProfile::fixed(vec![5.0; 3]);
    let models = build_model(&g, &profile, Variant::fixed(Hops::One, false), &s, &SolverConfig::default()).unwrap();
    let sol = solve_mip(&models[0], &SolverConfig::default());
    assert_eq!(sol.objective.unwrap().round() as usize, 1);
}

#[test]
fn exact_with_every_link_too_slow_needs_every_node() {
    // 60 m links carry 13 Mbps, below the 20 Mbps demand.
    let s = chain(4, 60.0);
    let profile = DemandProfile::fixed(vec![20.0; 4]);
    for hops in [Hops::One, Hops::Two] {
        let out = plan_exact(&s, Variant::fixed(hops, false), &profile, &SolverConfig::default()).unwrap();
        assert_eq!(out.antenna_count(), 4, "{hops}");
    }
}

#[test]
fn exact_edgeless_graph_needs_every_node() {
    let s = chain(4, 1000.0);
    let profile = DemandProfile::fixed(vec![5.0; 4]);
    let out = plan_exact(&s, Variant::fixed(Hops::One, false), &profile, &SolverConfig::default()).unwrap();
    assert_eq!(out.antenna_count(), 4);
}
