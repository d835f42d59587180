//! Plan checker and metrics.
//!
//! Every condition is re-derived here from the graph, the demand profile
//! and the scenario; nothing is taken from the model builder, so the
//! checker can serve as an oracle for both solvers.

use std::collections::BTreeSet;
use std::fmt;

use crate::demand::DemandProfile;
use crate::error::{Error, Result};
use crate::netgraph::{DistributionGraph, LinkKind, NodeKind};
use crate::plan::{Family, Hops, Plan, RoutingLayer, Temporal, Variant};
use crate::scenario::Scenario;

pub const EPS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bound {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub family: Family,
    /// Node id or `from->to` link, with `@t` appended for a period.
    pub location: String,
    pub lhs: f64,
    pub bound: Bound,
    pub rhs: f64,
}

impl Violation {
    /// Signed slack: negative when the condition fails.
    pub fn slack(&self) -> f64 {
        match self.bound {
            Bound::Le => self.rhs - self.lhs,
            Bound::Ge => self.lhs - self.rhs,
            Bound::Eq => -(self.lhs - self.rhs).abs(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = match self.bound {
            Bound::Le => "<=",
            Bound::Ge => ">=",
            Bound::Eq => "==",
        };
        write!(
            f,
            "{} {} lhs={:.6} {op} rhs={:.6} slack={:.6}",
            self.family.as_str(),
            self.location,
            self.lhs,
            self.rhs,
            self.slack()
        )
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn feasible(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn count(&self, family: Family) -> usize {
        self.violations.iter().filter(|v| v.family == family).count()
    }

    /// One violation per line.
    pub fn to_text(&self) -> String {
        self.violations.iter().map(|v| format!("{v}\n")).collect()
    }
}

struct Checker<'a> {
    graph: &'a DistributionGraph,
    scenario: &'a Scenario,
    variant: Variant,
    sources: &'a BTreeSet<usize>,
    out: Vec<Violation>,
}

impl Checker<'_> {
    fn id(&self, v: usize) -> &str {
        &self.graph.node(v).id
    }

    fn link_loc(&self, l: usize, tag: &str) -> String {
        let link = self.graph.link(l);
        format!("{}->{}{tag}", self.id(link.from), self.id(link.to))
    }

    fn check(&mut self, family: Family, location: String, lhs: f64, bound: Bound, rhs: f64) {
        let bad = match bound {
            Bound::Le => lhs > rhs + EPS,
            Bound::Ge => lhs < rhs - EPS,
            Bound::Eq => (lhs - rhs).abs() > EPS,
        };
        if bad || !lhs.is_finite() {
            self.out.push(Violation { family, location, lhs, bound, rhs });
        }
    }

    fn is_source(&self, v: usize) -> f64 {
        if self.sources.contains(&v) {
            1.0
        } else {
            0.0
        }
    }

    fn households(&self) -> usize {
        self.graph.household_count()
    }

    fn base_stations(&self) -> Vec<usize> {
        self.graph.real_nodes().filter(|&v| self.graph.is_bs(v)).collect()
    }

    fn usable(&self, l: usize) -> bool {
        match self.graph.link(l).kind {
            LinkKind::Wifi => true,
            LinkKind::Lte => self.variant.lte,
            LinkKind::Virtual => false,
        }
    }

    fn plan_shape(&mut self, layer: &RoutingLayer, tag: &str) {
        for &s in self.sources {
            let ok = match self.graph.kind(s) {
                NodeKind::Household => true,
                NodeKind::LteBs => self.variant.lte,
                NodeKind::VirtualSource => false,
            };
            if !ok {
                self.check(Family::Structure, format!("source {}", self.id(s)), 1.0, Bound::Eq, 0.0);
            }
        }
        let links: Vec<usize> = layer.links.iter().chain(layer.flows.keys()).copied().collect();
        for l in links {
            if !self.usable(l) {
                let loc = self.link_loc(l, tag);
                self.check(Family::Structure, format!("link {loc}"), 1.0, Bound::Eq, 0.0);
            }
        }
        let shares: Vec<(usize, f64)> = layer.lte_shares.iter().map(|(&l, &s)| (l, s)).collect();
        for (l, s) in shares {
            let loc = self.link_loc(l, tag);
            if self.graph.link(l).kind != LinkKind::Lte || !self.variant.lte {
                self.check(Family::Structure, format!("share {loc}"), 1.0, Bound::Eq, 0.0);
            }
            self.check(Family::Structure, format!("share {loc}"), s, Bound::Ge, 0.0);
            self.check(Family::Structure, format!("share {loc}"), s, Bound::Le, 1.0);
        }
        let relays: Vec<usize> = layer.relays.iter().copied().collect();
        for r in relays {
            if r >= self.households() {
                let loc = format!("relay {}{tag}", self.id(r));
                self.check(Family::Structure, loc, 1.0, Bound::Eq, 0.0);
            }
        }
    }

    /// Airtime bound at each base station.
    fn shares(&mut self, layer: &RoutingLayer, tag: &str) {
        if !self.variant.lte {
            return;
        }
        for b in self.base_stations() {
            let used: f64 = self
                .graph
                .real_out_links(b)
                .filter_map(|l| layer.lte_shares.get(&l))
                .sum();
            let loc = format!("{}{tag}", self.id(b));
            self.check(Family::LteShare, loc, used, Bound::Le, self.graph.node(b).tau * self.is_source(b));
        }
    }

    fn all_or_nothing(&mut self, layer: &RoutingLayer, demands: &[Vec<f64>], activity: bool, tag: &str) {
        let g = self.graph;
        let two = self.variant.hops == Hops::Two;
        let rho = f64::from(self.scenario.rho);
        let selected = |l: usize| layer.links.contains(&l);
        let relay = |v: usize| if layer.relays.contains(&v) { 1.0 } else { 0.0 };
        if !two && !layer.relays.is_empty() {
            self.check(Family::Structure, format!("relays{tag}"), layer.relays.len() as f64, Bound::Eq, 0.0);
        }
        let peak: Vec<f64> = (0..self.households())
            .map(|j| demands.iter().map(|d| d[j]).fold(0.0, f64::max))
            .collect();
        for i in 0..self.households() {
            let fanout = g
                .real_out_links(i)
                .filter(|&l| g.link(l).kind == LinkKind::Wifi && selected(l))
                .count() as f64;
            let loc = format!("{}{tag}", self.id(i));
            self.check(Family::OutDegree, loc, fanout, Bound::Le, rho * (self.is_source(i) + relay(i)));
        }
        for j in 0..self.households() {
            let inbound = g.real_in_links(j).filter(|&l| self.usable(l) && selected(l)).count() as f64;
            let loc = format!("{}{tag}", self.id(j));
            if !activity || peak[j] > 0.0 {
                self.check(Family::InLink, loc, inbound + self.is_source(j), Bound::Eq, 1.0);
            } else {
                self.check(Family::InLink, loc, inbound, Bound::Eq, relay(j));
            }
        }
        if two {
            for i in 0..self.households() {
                let loc = format!("{}{tag}", self.id(i));
                self.check(Family::RoleExclusive, loc, self.is_source(i) + relay(i), Bound::Le, 1.0);
            }
            for &l in &layer.links {
                let link = g.link(l);
                if link.kind == LinkKind::Wifi {
                    let lhs = relay(link.from) + relay(link.to) + 1.0;
                    let loc = self.link_loc(l, tag);
                    self.check(Family::RelayChain, loc, lhs, Bound::Le, 2.0);
                }
            }
        }
        if self.variant.lte {
            for b in self.base_stations() {
                let outs: Vec<usize> = g.real_out_links(b).collect();
                let used = outs.iter().filter(|&&l| selected(l)).count() as f64;
                let loc = format!("{}{tag}", self.id(b));
                self.check(Family::LteGate, loc, used, Bound::Le, outs.len() as f64 * self.is_source(b));
            }
        }
        self.shares(layer, tag);
        for (k, delta) in demands.iter().enumerate() {
            let dtag = if demands.len() > 1 { format!("{tag}#{k}") } else { tag.to_string() };
            let share = |l: usize| layer.lte_shares.get(&l).copied().unwrap_or(0.0);
            if two {
                for &l in &layer.links {
                    let link = g.link(l);
                    let (i, j) = (link.from, link.to);
                    let onward: f64 = g
                        .real_out_links(j)
                        .filter(|&o| g.link(o).kind == LinkKind::Wifi && selected(o) && g.link(o).to != i)
                        .map(|o| delta[g.link(o).to])
                        .sum();
                    let need = delta[j] + onward;
                    let loc = self.link_loc(l, &dtag);
                    match link.kind {
                        LinkKind::Lte => self.check(Family::LteCapacity, loc, share(l) * link.capacity_mbps, Bound::Ge, need),
                        _ => self.check(Family::LinkCapacity, loc, link.capacity_mbps, Bound::Ge, need),
                    }
                }
            } else {
                for j in 0..self.households() {
                    let carried: f64 = g
                        .real_in_links(j)
                        .filter(|&l| self.usable(l) && selected(l))
                        .map(|l| g.link(l).capacity_mbps)
                        .sum();
                    let loc = format!("{}{dtag}", self.id(j));
                    let lhs = carried + delta[j] * self.is_source(j);
                    self.check(Family::LinkCapacity, loc, lhs, Bound::Ge, delta[j]);
                }
                for &l in &layer.links {
                    let link = g.link(l);
                    if link.kind == LinkKind::Lte {
                        let loc = self.link_loc(l, &dtag);
                        self.check(Family::LteCapacity, loc, share(l) * link.capacity_mbps, Bound::Ge, delta[link.to]);
                    }
                }
            }
        }
    }

    fn splittable(&mut self, layer: &RoutingLayer, delta: &[f64], tag: &str) {
        let g = self.graph;
        let flow = |l: usize| layer.flows.get(&l).copied().unwrap_or(0.0);
        let injected = |v: usize| layer.source_flows.get(&v).copied().unwrap_or(0.0);
        if !layer.links.is_empty() {
            self.check(Family::Structure, format!("links{tag}"), layer.links.len() as f64, Bound::Eq, 0.0);
        }
        for (&l, &f) in &layer.flows {
            let loc = self.link_loc(l, tag);
            self.check(Family::Structure, format!("flow {loc}"), f, Bound::Ge, 0.0);
        }
        let mut nodes: Vec<usize> = (0..self.households()).collect();
        if self.variant.lte {
            nodes.extend(self.base_stations());
        }
        for (&v, &f) in &layer.source_flows {
            if !nodes.contains(&v) {
                let loc = format!("injection {}{tag}", self.id(v));
                self.check(Family::Structure, loc, f, Bound::Eq, 0.0);
            }
        }
        for &i in &nodes {
            let inflow: f64 = g.real_in_links(i).map(flow).sum();
            let outflow: f64 = g.real_out_links(i).map(flow).sum();
            let need = if i < self.households() { delta[i] } else { 0.0 };
            let loc = format!("{}{tag}", self.id(i));
            self.check(Family::FlowConservation, loc, injected(i) + inflow - outflow, Bound::Eq, need);
        }
        let total: f64 = delta.iter().sum();
        let injected_total: f64 = nodes.iter().map(|&i| injected(i)).sum();
        self.check(Family::SourceTotal, format!("network{tag}"), injected_total, Bound::Eq, total);
        let links: Vec<usize> = g.links().iter().enumerate().filter(|(l, _)| self.usable(*l)).map(|(l, _)| l).collect();
        for &l in &links {
            let link = g.link(l);
            let loc = self.link_loc(l, tag);
            match link.kind {
                LinkKind::Lte => {
                    let s = layer.lte_shares.get(&l).copied().unwrap_or(0.0);
                    self.check(Family::LteCapacity, loc, flow(l), Bound::Le, s * link.capacity_mbps);
                }
                _ => self.check(Family::LinkCapacity, loc, flow(l), Bound::Le, link.capacity_mbps),
            }
        }
        let vs = g.virtual_source();
        for &i in &nodes {
            let cap = vs.and_then(|s| g.find_link(s, i)).map_or(total.max(1.0), |l| g.link(l).capacity_mbps);
            let loc = format!("{}{tag}", self.id(i));
            self.check(Family::VirtualCapacity, loc, injected(i), Bound::Le, cap * self.is_source(i));
        }
        let carried: f64 = links.iter().map(|&l| flow(l)).sum();
        let h = f64::from(self.scenario.hop_limit);
        self.check(Family::HopBudget, format!("network{tag}"), carried, Bound::Le, h * total);
        self.shares(layer, tag);
    }
}

/// Checks `plan` against every condition of `variant` with slack
/// [`EPS`]. Plans whose shape does not fit the variant or that name
/// nodes and links outside `graph` are errors.
pub fn validate_plan(
    plan: &Plan,
    graph: &DistributionGraph,
    profile: &DemandProfile,
    variant: Variant,
    scenario: &Scenario,
) -> Result<ValidationReport> {
    let n = scenario.households.len();
    if graph.household_count() != n || profile.households() != n {
        return Err(Error::Structural("graph, demand and scenario disagree on households".into()));
    }
    if plan.variant.hops != variant.hops || plan.variant.lte != variant.lte {
        return Err(Error::Structural(format!("plan is {}, expected {variant}", plan.variant)));
    }
    if variant.lte && graph.bs_count() != scenario.lte_bs.len() {
        return Err(Error::Structural("LTE variant on a graph without the base stations".into()));
    }
    let nodes = graph.node_count();
    let links = graph.links().len();
    if plan.sources.iter().any(|&s| s >= nodes) {
        return Err(Error::Structural("plan names a node outside the graph".into()));
    }
    for layer in &plan.layers {
        let bad_link = layer
            .links
            .iter()
            .chain(layer.flows.keys())
            .chain(layer.lte_shares.keys())
            .any(|&l| l >= links);
        let bad_node = layer.relays.iter().chain(layer.source_flows.keys()).any(|&v| v >= nodes);
        if bad_link || bad_node {
            return Err(Error::Structural("plan names a node or link outside the graph".into()));
        }
    }
    let periods = profile.periods();
    let expected: Vec<Option<usize>> = match variant.temporal {
        Temporal::Fixed | Temporal::Static => vec![None],
        Temporal::SemiDynamic => (0..periods).map(Some).collect(),
        Temporal::Dynamic => match plan.period {
            Some(t) if t < periods => vec![Some(t)],
            _ => return Err(Error::Structural("dynamic plan must name a period inside the horizon".into())),
        },
    };
    let got: Vec<Option<usize>> = plan.layers.iter().map(|l| l.period).collect();
    if got != expected {
        return Err(Error::Structural(format!("plan layers {got:?} do not fit {variant}")));
    }

    let mut c = Checker { graph, scenario, variant, sources: &plan.sources, out: Vec::new() };
    for layer in &plan.layers {
        let tag = layer.period.map(|t| format!("@{t}")).unwrap_or_default();
        c.plan_shape(layer, &tag);
        let demands: Vec<Vec<f64>> = match (layer.period, variant.temporal) {
            (Some(t), _) => vec![profile.column(t)],
            (None, Temporal::Static) if !variant.is_splittable() => (0..periods).map(|t| profile.column(t)).collect(),
            (None, _) => vec![profile.peak_demands()],
        };
        if variant.is_splittable() {
            c.splittable(layer, &demands[0], &tag);
        } else {
            c.all_or_nothing(layer, &demands, layer.period.is_some(), &tag);
        }
    }
    Ok(ValidationReport { violations: c.out })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Metrics {
    pub antenna_count: usize,
    /// Percent of the nodes in the planned network: households, plus base
    /// stations when LTE is in use.
    pub antenna_fraction: f64,
    /// Percent saved against one antenna per household.
    pub savings_pct: f64,
    pub max_relay_depth: Option<usize>,
    /// Antennas in use per period; a single entry for fixed demand.
    pub per_period_counts: Vec<usize>,
}

/// Metrics over the plans of one solve (several in dynamic mode).
pub fn compute_metrics(plans: &[Plan], graph: &DistributionGraph, scenario: &Scenario) -> Metrics {
    let antenna_count = plans.iter().map(Plan::antenna_count).max().unwrap_or(0);
    let households = scenario.households.len();
    let lte = plans.first().is_some_and(|p| p.variant.lte);
    let nodes = households + if lte { scenario.lte_bs.len() } else { 0 };
    let pct = |a: f64, b: f64| if b > 0.0 { 100.0 * a / b } else { 0.0 };
    let savings_pct = (100.0 - pct(antenna_count as f64, households as f64)).clamp(0.0, 100.0);
    let max_relay_depth = plans
        .iter()
        .map(|p| p.max_relay_depth(graph, EPS))
        .try_fold(0, |acc, d| d.map(|d| acc.max(d)));
    let temporal = plans.first().map(|p| p.variant.temporal);
    let per_period_counts = match temporal {
        Some(Temporal::Dynamic) => plans.iter().map(Plan::antenna_count).collect(),
        Some(Temporal::SemiDynamic) => vec![antenna_count; plans[0].layers.len()],
        Some(Temporal::Static) => vec![antenna_count; scenario.demand_model.periods],
        _ => vec![antenna_count],
    };
    Metrics {
        antenna_count,
        antenna_fraction: pct(antenna_count as f64, nodes as f64),
        savings_pct,
        max_relay_depth,
        per_period_counts,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netgraph::build_wifi_graph;
    use crate::scenario::Household;

    fn line3() -> (Scenario, DistributionGraph) {
        let s = Scenario::with_households(vec![
            Household::new("A", 0.0, 0.0),
            Household::new("B", 30.0, 0.0),
            Household::new("C", 90.0, 0.0),
        ]);
        let g = build_wifi_graph(&s);
        (s, g)
    }

    fn one_hop_plan(g: &DistributionGraph, links: &[(usize, usize)], sources: &[usize]) -> Plan {
        let layer = RoutingLayer {
            links: links.iter().map(|&(a, b)| g.find_link(a, b).unwrap()).collect(),
            ..RoutingLayer::default()
        };
        Plan {
            variant: Variant::fixed(Hops::One, false),
            period: None,
            sources: sources.iter().copied().collect(),
            layers: vec![layer],
        }
    }

    #[test]
    fn hand_built_plan_is_feasible() {
        let (s, g) = line3();
        let p = DemandProfile::fixed(vec![10.0; 3]);
        let plan = one_hop_plan(&g, &[(1, 0), (1, 2)], &[1]);
        let r = validate_plan(&plan, &g, &p, plan.variant, &s).unwrap();
        assert!(r.feasible(), "{}", r.to_text());
    }

    #[test]
    fn terminal_forwarding_is_an_out_degree_violation() {
        let (s, g) = line3();
        let p = DemandProfile::fixed(vec![10.0; 3]);
        // B is a terminal of A yet feeds C.
        let plan = one_hop_plan(&g, &[(0, 1), (1, 2)], &[0]);
        let r = validate_plan(&plan, &g, &p, plan.variant, &s).unwrap();
        assert_eq!(r.count(Family::OutDegree), 1);
        assert!(r.to_text().starts_with("out_degree B lhs=1.000000 <= rhs=0.000000 slack=-1.000000"));
    }

    #[test]
    fn metrics_follow_definitions() {
        let homes = (0..22).map(|i| Household::new(format!("h{i}"), 1000.0 * i as f64, 0.0)).collect();
        let s = Scenario::with_households(homes);
        let g = build_wifi_graph(&s);
        let plan = Plan {
            variant: Variant::fixed(Hops::One, false),
            period: None,
            sources: [0, 1, 2].into_iter().collect(),
            layers: vec![RoutingLayer::default()],
        };
        let m = compute_metrics(&[plan], &g, &s);
        assert_eq!(m.antenna_count, 3);
        assert!((m.savings_pct - (1.0 - 3.0 / 22.0) * 100.0).abs() < 1e-12);
        assert!((m.savings_pct - 86.4).abs() < 0.05);
        assert_eq!(m.max_relay_depth, Some(0));
    }

    #[test]
    fn unknown_link_is_a_structural_error() {
        let (s, g) = line3();
        let p = DemandProfile::fixed(vec![10.0; 3]);
        let mut plan = one_hop_plan(&g, &[(1, 0)], &[1]);
        plan.layers[0].links.insert(99);
        assert!(matches!(validate_plan(&plan, &g, &p, plan.variant, &s), Err(Error::Structural(_))));
    }
}
