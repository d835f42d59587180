//! Scenario loading and one planning run, shared by `plan` and `sweep`.

use std::fmt;
use std::path::Path;
use std::time::{Duration, Instant};

use skyrelay_core::demand::DemandProfile;
use skyrelay_core::fixtures::Community;
use skyrelay_core::formulation::SolverConfig;
use skyrelay_core::netgraph::DistributionGraph;
use skyrelay_core::plan::{Plan, Temporal, Variant};
use skyrelay_core::scenario::{load_scenario, Scenario};
use skyrelay_core::solver::exact::plan_exact;
use skyrelay_core::solver::greedy::{greedy_plan, GreedyTrace, ReceiverRule};
use skyrelay_core::validator::{compute_metrics, validate_plan, Metrics};

use crate::args::{DemandMode, LimitArgs, ScenarioSource, SolverKind};

/// Bad input from the command line: exit status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

pub fn load_file(path: &Path) -> anyhow::Result<Scenario> {
    let bytes = std::fs::read(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    load_scenario(&bytes).map_err(|e| usage(format!("{}: {e}", path.display())))
}

pub fn load_community(name: &str) -> anyhow::Result<Scenario> {
    let c = Community::from_name(name).ok_or_else(|| usage(format!("unknown community '{name}' (use i, ii, iii or iv)")))?;
    Ok(c.scenario()?)
}

/// Display name and scenario for `source`.
pub fn load_source(source: &ScenarioSource) -> anyhow::Result<(String, Scenario)> {
    match (&source.scenario, &source.community) {
        (Some(path), _) => Ok((stem(path), load_file(path)?)),
        (None, Some(name)) => Ok((name.clone(), load_community(name)?)),
        (None, None) => Err(usage("give --scenario or --community")),
    }
}

pub fn stem(path: &Path) -> String {
    path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned())
}

pub fn demand_profile(scenario: &Scenario, mode: DemandMode, seed: u64) -> DemandProfile {
    let profile = scenario.demand_model.sample(&scenario.households, seed);
    match mode {
        DemandMode::Peak => profile.peak_profile(),
        DemandMode::Profile => profile,
    }
}

pub fn solver_config(limits: &LimitArgs) -> SolverConfig {
    let mut cfg = SolverConfig::default();
    if let Some(n) = limits.node_limit {
        cfg.node_limit = n;
    }
    cfg.time_limit = limits.time_limit_s.map(Duration::from_secs_f64);
    cfg
}

/// The greedy heuristic routes on peak demand with one layer, which fits
/// the fixed and static modes only.
pub fn greedy_supports(variant: Variant) -> bool {
    !variant.is_splittable() && matches!(variant.temporal, Temporal::Fixed | Temporal::Static)
}

pub struct Solved {
    pub graph: DistributionGraph,
    pub plans: Vec<Plan>,
    pub profile: DemandProfile,
    /// `optimal`, a branch-and-bound stop reason, or `heuristic`.
    pub status: String,
    pub runtime: Duration,
    pub trace: Option<GreedyTrace>,
    pub metrics: Metrics,
    /// Validator output for every plan that is not feasible.
    pub violations: Vec<String>,
}

pub fn solve(
    scenario: &Scenario,
    variant: Variant,
    solver: SolverKind,
    profile: DemandProfile,
    cfg: &SolverConfig,
) -> skyrelay_core::error::Result<Solved> {
    let started = Instant::now();
    let (graph, plans, status, trace) = match solver {
        SolverKind::Exact => {
            let out = plan_exact(scenario, variant, &profile, cfg)?;
            let status = out
                .solutions
                .iter()
                .map(|s| s.status.as_str())
                .find(|&s| s != "optimal")
                .unwrap_or("optimal")
                .to_string();
            (out.graph, out.plans, status, None)
        }
        SolverKind::Greedy => {
            let (graph, plan, trace) = greedy_plan(scenario, variant, &profile, ReceiverRule::SmallestBin)?;
            (graph, vec![plan], "heuristic".to_string(), Some(trace))
        }
    };
    let runtime = started.elapsed();
    let mut violations = Vec::new();
    for plan in &plans {
        let report = validate_plan(plan, &graph, &profile, variant, scenario)?;
        violations.extend(report.violations.iter().map(ToString::to_string));
    }
    let metrics = compute_metrics(&plans, &graph, scenario);
    Ok(Solved { graph, plans, profile, status, runtime, trace, metrics, violations })
}
