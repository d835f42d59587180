//! Scenario to plan: graph, models, branch-and-bound, extraction.

use std::time::{Duration, Instant};

use rayon::prelude::*;

use super::bnb::{solve_by_placement, solve_mip_bounded, MipSolution, MipStatus};
use super::greedy::{greedy_one_hop, greedy_two_hop, GreedyConfig};
use crate::demand::DemandProfile;
use crate::error::{Error, Result};
use crate::formulation::{assignment_from_plan, build_model, extract_plan, strengthen, MipModel, SolverConfig};
use crate::netgraph::{
    augment_virtual_source, augment_with_lte, build_wifi_graph, relay_matrix, virtual_capacity, DistributionGraph,
};
use crate::plan::{Hops, Plan, RoutingLayer, Temporal, Variant};
use crate::scenario::Scenario;

/// Graph matching `variant`: WiFi links, plus LTE links and a virtual
/// source when the variant asks for them.
pub fn graph_for(scenario: &Scenario, variant: Variant, profile: &DemandProfile) -> DistributionGraph {
    let mut g = build_wifi_graph(scenario);
    if variant.lte {
        g = augment_with_lte(&g, scenario);
    }
    if variant.is_splittable() {
        g = augment_virtual_source(&g, virtual_capacity(&profile.peak_demands()));
    }
    g
}

#[derive(Debug, Clone)]
pub struct ExactOutcome {
    pub graph: DistributionGraph,
    /// One plan, or one per period in dynamic mode.
    pub plans: Vec<Plan>,
    pub solutions: Vec<MipSolution>,
    pub elapsed: Duration,
}

impl ExactOutcome {
    /// Antennas needed: the maximum over per-period plans.
    pub fn antenna_count(&self) -> usize {
        self.plans.iter().map(Plan::antenna_count).max().unwrap_or(0)
    }

    pub fn per_period_counts(&self) -> Vec<usize> {
        self.plans.iter().map(Plan::antenna_count).collect()
    }

    pub fn proven_optimal(&self) -> bool {
        self.solutions.iter().all(|s| s.status == MipStatus::Optimal)
    }
}

/// Start assignment supplied to branch-and-bound for one model.
pub type StartFn<'a> = dyn Fn(&MipModel) -> Option<Plan> + Sync + 'a;

pub fn plan_exact(scenario: &Scenario, variant: Variant, profile: &DemandProfile, cfg: &SolverConfig) -> Result<ExactOutcome> {
    plan_exact_with(scenario, variant, profile, cfg, None)
}

/// Copies a peak-demand plan onto every routing layer of `model`.
/// Households idle in a period drop their in-link unless they relay.
pub fn fit_to_model(plan: &Plan, model: &MipModel) -> Plan {
    let base = &plan.layers[0];
    let layers = model
        .layers
        .iter()
        .map(|info| {
            let mut layer = RoutingLayer { period: info.period, ..base.clone() };
            if info.activity_form {
                let idle: Vec<usize> = model
                    .link_ends
                    .iter()
                    .enumerate()
                    .filter(|(l, &(_, to))| {
                        layer.links.contains(l) && to < info.active.len() && !info.active[to] && !layer.relays.contains(&to)
                    })
                    .map(|(l, _)| l)
                    .collect();
                for l in idle {
                    layer.links.remove(&l);
                    layer.lte_shares.remove(&l);
                }
            }
            layer
        })
        .collect();
    Plan { variant: model.variant, period: model.period, sources: plan.sources.clone(), layers }
}

/// Semi-dynamic gaps are closed by trying every smaller antenna placement
/// when there are at most this many.
const PLACEMENT_LIMIT: usize = 5000;

/// As [`plan_exact`], with an optional source of starting plans.
pub fn plan_exact_with(
    scenario: &Scenario,
    variant: Variant,
    profile: &DemandProfile,
    cfg: &SolverConfig,
    start: Option<&StartFn<'_>>,
) -> Result<ExactOutcome> {
    let started = Instant::now();
    scenario.validate()?;
    let graph = graph_for(scenario, variant, profile);
    let mut models = build_model(&graph, profile, variant, scenario, cfg)?;
    if cfg.strengthen {
        for m in &mut models {
            strengthen(m, &graph, scenario);
        }
    }
    let automatic = cfg.greedy_start && start.is_none() && !variant.is_splittable();
    let greedy = automatic.then(|| {
        let peaks = profile.peak_demands();
        let gcfg = GreedyConfig::new(scenario.rho as usize);
        match variant.hops {
            Hops::One => greedy_one_hop(&graph, &relay_matrix(&graph, &peaks), &peaks, gcfg).0,
            _ => greedy_two_hop(&graph, &peaks, gcfg).0,
        }
    });
    // Every one-hop plan is also a two-hop plan, so the one-hop optimum
    // bounds the two-hop search from the start.
    let one_hop = (automatic && variant.hops == Hops::Two)
        .then(|| plan_exact_with(scenario, Variant { hops: Hops::One, ..variant }, profile, cfg, None).ok())
        .flatten();
    // Semi-dynamic planning sits between the two extremes: every static
    // plan is feasible for it, and no single period can do better than its
    // own dynamic optimum.
    let semi = automatic && variant.temporal == Temporal::SemiDynamic;
    let static_plan = semi
        .then(|| plan_exact_with(scenario, Variant { temporal: Temporal::Static, ..variant }, profile, cfg, None).ok())
        .flatten();
    let lower = (cfg.greedy_start && start.is_none() && variant.temporal == Temporal::SemiDynamic)
        .then(|| plan_exact_with(scenario, Variant { temporal: Temporal::Dynamic, ..variant }, profile, cfg, None).ok())
        .flatten()
        .filter(ExactOutcome::proven_optimal)
        .map_or(f64::NEG_INFINITY, |out| out.antenna_count() as f64);
    let candidates = |m: &MipModel| -> Vec<Plan> {
        let mut v = Vec::new();
        if let Some(f) = start {
            v.extend(f(m));
        }
        if let Some(p) = &greedy {
            v.push(fit_to_model(p, m));
        }
        if let Some(out) = &static_plan {
            v.extend(out.plans.iter().map(|p| fit_to_model(p, m)));
        }
        if let Some(out) = &one_hop {
            v.extend(out.plans.iter().filter(|p| p.period == m.period).map(|p| Plan { variant: m.variant, ..p.clone() }));
        }
        v
    };
    let solutions: Vec<MipSolution> = models
        .par_iter()
        .map(|m| {
            let seed = candidates(m)
                .iter()
                .filter_map(|p| assignment_from_plan(m, p))
                .filter(|x| m.is_feasible(x, cfg.eps))
                .min_by(|a, b| m.objective_value(a).total_cmp(&m.objective_value(b)));
            if let (Some(x), true) = (&seed, lower.is_finite()) {
                if let Some(sol) = solve_by_placement(m, cfg, x, lower, PLACEMENT_LIMIT) {
                    return sol;
                }
            }
            solve_mip_bounded(m, cfg, seed.as_deref(), lower)
        })
        .collect();
    let mut plans = Vec::with_capacity(models.len());
    for (m, sol) in models.iter().zip(&solutions) {
        let tag = m.period.map(|t| format!(" in period {t}")).unwrap_or_default();
        match (&sol.status, &sol.assignment) {
            (MipStatus::Infeasible, _) => {
                return Err(Error::Infeasible(format!("{variant} has no feasible plan{tag}")));
            }
            (status, None) => {
                return Err(Error::Solver(format!("{} without an incumbent{tag}", status.as_str())));
            }
            (_, Some(x)) => plans.push(extract_plan(m, x, cfg.eps)?),
        }
    }
    Ok(ExactOutcome { graph, plans, solutions, elapsed: started.elapsed() })
}
