//! The validator and the MIP model must agree on every plan, and every
//! solver plan must validate.

use proptest::prelude::*;
use skyrelay_core::demand::DemandProfile;
use skyrelay_core::formulation::{assignment_from_plan, build_model, SolverConfig};
use skyrelay_core::netgraph::{DistributionGraph, LinkKind};
use skyrelay_core::plan::{Family, Hops, Plan, Variant};
use skyrelay_core::scenario::{generate_community, Scenario};
use skyrelay_core::solver::exact::{graph_for, plan_exact};
use skyrelay_core::solver::greedy::{greedy_plan, ReceiverRule};
use skyrelay_core::validator::validate_plan;

fn instance(n: usize, bs: usize, seed: u64, demand: &[u8]) -> (Scenario, DemandProfile) {
    let s = generate_community(n, 45.0, bs, seed).unwrap();
    let d = (0..n).map(|i| 5.0 * f64::from(demand[i % demand.len()])).collect();
    (s, DemandProfile::fixed(d))
}

fn model_accepts(s: &Scenario, g: &DistributionGraph, p: &DemandProfile, plan: &Plan) -> bool {
    let cfg = SolverConfig { strengthen: false, ..SolverConfig::default() };
    let models = build_model(g, p, plan.variant, s, &cfg).unwrap();
    let m = &models[0];
    assignment_from_plan(m, plan).is_some_and(|x| m.is_feasible(&x, cfg.eps))
}

#[derive(Debug, Clone, Copy)]
enum Mutation {
    None,
    ToggleSource(usize),
    ToggleLink(usize),
    ToggleRelay(usize),
    ScaleShare(usize, f64),
}

fn mutate(plan: &mut Plan, g: &DistributionGraph, m: Mutation) {
    let layer = &mut plan.layers[0];
    match m {
        Mutation::None => {}
        Mutation::ToggleSource(k) => {
            let v = k % g.real_nodes().count();
            if !plan.sources.remove(&v) {
                plan.sources.insert(v);
            }
        }
        Mutation::ToggleLink(k) => {
            let real: Vec<usize> = (0..g.links().len()).filter(|&l| g.link(l).kind != LinkKind::Virtual).collect();
            if let Some(&l) = real.get(k % real.len().max(1)) {
                if !layer.links.remove(&l) {
                    layer.links.insert(l);
                    if g.link(l).kind == LinkKind::Lte {
                        layer.lte_shares.insert(l, 0.1);
                    }
                } else {
                    layer.lte_shares.remove(&l);
                }
            }
        }
        Mutation::ToggleRelay(k) => {
            if plan.variant.hops == Hops::Two {
                let v = k % g.household_count();
                if !layer.relays.remove(&v) {
                    layer.relays.insert(v);
                }
            }
        }
        Mutation::ScaleShare(k, f) => {
            let keys: Vec<usize> = layer.lte_shares.keys().copied().collect();
            if let Some(&l) = keys.get(k % keys.len().max(1)) {
                *layer.lte_shares.get_mut(&l).unwrap() *= f;
            }
        }
    }
}

fn mutation() -> impl Strategy<Value = Mutation> {
    prop_oneof![
        Just(Mutation::None),
        (0usize..64).prop_map(Mutation::ToggleSource),
        (0usize..256).prop_map(Mutation::ToggleLink),
        (0usize..64).prop_map(Mutation::ToggleRelay),
        (0usize..64, prop_oneof![Just(0.0), Just(0.5), Just(3.0)]).prop_map(|(k, f)| Mutation::ScaleShare(k, f)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn validator_agrees_with_model_on_mutated_greedy_plans(
        n in 3usize..=7,
        bs in 0usize..=1,
        seed in 0u64..1000,
        demand in proptest::collection::vec(0u8..=4, 1..=7),
        two in any::<bool>(),
        lte in any::<bool>(),
        muts in proptest::collection::vec(mutation(), 1..=2),
    ) {
        let (s, p) = instance(n, bs, seed, &demand);
        let variant = Variant::fixed(if two { Hops::Two } else { Hops::One }, lte && bs > 0);
        let (g, mut plan, _) = greedy_plan(&s, variant, &p, ReceiverRule::SmallestBin).unwrap();
        prop_assert!(validate_plan(&plan, &g, &p, variant, &s).unwrap().feasible());
        for m in muts {
            mutate(&mut plan, &g, m);
        }
        let report = validate_plan(&plan, &g, &p, variant, &s).unwrap();
        prop_assert_eq!(report.feasible(), model_accepts(&s, &g, &p, &plan), "{}", report.to_text());
    }

    #[test]
    fn exact_plans_validate(
        n in 2usize..=6,
        bs in 0usize..=1,
        seed in 0u64..1000,
        demand in proptest::collection::vec(0u8..=4, 1..=6),
        hops in prop_oneof![Just(Hops::One), Just(Hops::Two), Just(Hops::Splittable)],
        lte in any::<bool>(),
    ) {
        let (s, p) = instance(n, bs, seed, &demand);
        let variant = Variant::fixed(hops, lte && bs > 0);
        let out = plan_exact(&s, variant, &p, &SolverConfig::default()).unwrap();
        for plan in &out.plans {
            let report = validate_plan(plan, &out.graph, &p, variant, &s).unwrap();
            prop_assert!(report.feasible(), "{}", report.to_text());
            prop_assert!(model_accepts(&s, &out.graph, &p, plan));
        }
    }
}

#[test]
fn conservation_gap_is_reported_once_at_the_node() {
    let (s, p) = instance(6, 0, 11, &[1, 2, 3]);
    let variant = Variant::fixed(Hops::Splittable, false);
    let out = plan_exact(&s, variant, &p, &SolverConfig::default()).unwrap();
    let g = graph_for(&s, variant, &p);
    let mut plan = out.plans[0].clone();
    let (&node, _) = plan.layers[0].source_flows.iter().find(|(_, &f)| f > 0.0).unwrap();
    *plan.layers[0].source_flows.get_mut(&node).unwrap() += 1.0;
    let report = validate_plan(&plan, &g, &p, variant, &s).unwrap();
    let gaps: Vec<_> = report.violations.iter().filter(|v| v.family == Family::FlowConservation).collect();
    assert_eq!(gaps.len(), 1, "{}", report.to_text());
    assert_eq!(gaps[0].location, g.node(node).id);
    assert!((gaps[0].slack().abs() - 1.0).abs() < 1e-9);
}
