//! Greedy heuristics: one-hop bin covering and two-hop tree growth.
//!
//! Both return the plan together with a trace; [`GreedyTrace::replay`]
//! rebuilds the plan from the trace alone.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::demand::DemandProfile;
use crate::error::{Error, Result};
use crate::netgraph::{relay_matrix, DistributionGraph, LinkKind, RelayMatrix};
use crate::plan::{Hops, Plan, RoutingLayer, Variant};
use crate::scenario::Scenario;

use super::exact::graph_for;

const SLACK: f64 = 1e-9;

/// Order in which a source fills its receiver slots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReceiverRule {
    /// Smallest own bin first, lowest index on ties.
    #[default]
    SmallestBin,
    /// Uniformly shuffled with a seeded generator.
    Seeded(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GreedyConfig {
    pub rho: usize,
    pub rule: ReceiverRule,
}

impl GreedyConfig {
    pub fn new(rho: usize) -> Self {
        Self { rho, rule: ReceiverRule::SmallestBin }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GreedyStep {
    pub source: usize,
    /// Former parent when a covered terminal was promoted to source.
    pub promoted_from: Option<usize>,
    pub receivers: Vec<usize>,
    /// `(relay, child)` pairs added on the second hop.
    pub second_hop: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GreedyTrace {
    pub hops: Hops,
    pub lte: bool,
    pub steps: Vec<GreedyStep>,
    /// Households left without a parent; each gets its own antenna.
    pub isolated: Vec<usize>,
}

impl GreedyTrace {
    /// Line-oriented dump, one line per step.
    pub fn to_text(&self, graph: &DistributionGraph) -> String {
        let id = |v: usize| graph.node(v).id.as_str();
        let list = |vs: &mut dyn Iterator<Item = String>| vs.collect::<Vec<_>>().join(", ");
        let mut s = String::new();
        for (k, step) in self.steps.iter().enumerate() {
            let _ = write!(
                s,
                "step {}: source={}, receivers=[{}]",
                k + 1,
                id(step.source),
                list(&mut step.receivers.iter().map(|&r| id(r).to_string()))
            );
            if let Some(p) = step.promoted_from {
                let _ = write!(s, ", promoted_from={}", id(p));
            }
            if !step.second_hop.is_empty() {
                let _ = write!(
                    s,
                    ", second_hop=[{}]",
                    list(&mut step.second_hop.iter().map(|&(j, k)| format!("{}->{}", id(j), id(k))))
                );
            }
            s.push('\n');
        }
        let _ = writeln!(s, "isolated=[{}]", list(&mut self.isolated.iter().map(|&v| id(v).to_string())));
        s
    }

    /// Rebuilds the plan recorded by the trace. LTE shares are the
    /// smallest that carry the routed demand.
    pub fn replay(&self, graph: &DistributionGraph, demands: &[f64]) -> Plan {
        let mut sources = BTreeSet::new();
        let mut layer = RoutingLayer::default();
        let link = |a: usize, b: usize| graph.find_link(a, b).expect("trace follows graph links");
        for step in &self.steps {
            sources.insert(step.source);
            if let Some(p) = step.promoted_from {
                layer.links.remove(&link(p, step.source));
            }
            for &r in &step.receivers {
                layer.links.insert(link(step.source, r));
            }
            for &(j, k) in &step.second_hop {
                layer.links.insert(link(j, k));
                layer.relays.insert(j);
            }
        }
        sources.extend(self.isolated.iter().copied());
        let load = |j: usize| {
            let own = demands.get(j).copied().unwrap_or(0.0);
            own + graph
                .real_out_links(j)
                .filter(|l| layer.links.contains(l))
                .map(|l| demands.get(graph.link(l).to).copied().unwrap_or(0.0))
                .sum::<f64>()
        };
        let shares: Vec<(usize, f64)> = layer
            .links
            .iter()
            .filter(|&&l| graph.link(l).kind == LinkKind::Lte)
            .map(|&l| (l, load(graph.link(l).to) / graph.link(l).capacity_mbps))
            .collect();
        layer.lte_shares.extend(shares);
        Plan { variant: Variant::fixed(self.hops, self.lte), period: None, sources, layers: vec![layer] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Role {
    Uncovered,
    Source,
    Relay,
    Terminal(usize),
}

struct State<'a> {
    graph: &'a DistributionGraph,
    matrix: &'a RelayMatrix,
    demands: &'a [f64],
    cfg: GreedyConfig,
    rng: Option<ChaCha8Rng>,
    role: Vec<Role>,
    lte: bool,
}

impl<'a> State<'a> {
    fn new(graph: &'a DistributionGraph, matrix: &'a RelayMatrix, demands: &'a [f64], cfg: GreedyConfig) -> Self {
        let rng = match cfg.rule {
            ReceiverRule::SmallestBin => None,
            ReceiverRule::Seeded(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
        };
        Self {
            graph,
            matrix,
            demands,
            cfg,
            rng,
            role: vec![Role::Uncovered; graph.household_count()],
            lte: graph.has_lte(),
        }
    }

    fn households(&self) -> usize {
        self.graph.household_count()
    }

    fn is_bs(&self, v: usize) -> bool {
        v >= self.households()
    }

    fn uncovered(&self, j: usize) -> bool {
        self.role[j] == Role::Uncovered
    }

    /// Candidate sources in index order: households, then base stations
    /// that do not yet have an antenna.
    fn candidates(&self, bs_used: &BTreeSet<usize>) -> Vec<usize> {
        let mut v: Vec<usize> = (0..self.households()).collect();
        if self.lte {
            v.extend(self.graph.real_nodes().filter(|&b| self.graph.is_bs(b) && !bs_used.contains(&b)));
        }
        v
    }

    /// Uncovered households `i` can serve on its own.
    fn open_bin(&self, i: usize) -> Vec<usize> {
        self.matrix.bin(i).iter().copied().filter(|&j| j < self.households() && j != i && self.uncovered(j)).collect()
    }

    fn order(&mut self, mut v: Vec<usize>) -> Vec<usize> {
        match self.rng.as_mut() {
            Some(rng) => v.shuffle(rng),
            None => v.sort_by_key(|&j| (self.matrix.bin(j).len(), j)),
        }
        v
    }

    /// Households a base station can serve one after another within its
    /// airtime budget, taken in `ordered` order.
    fn airtime_fit(&self, b: usize, ordered: &[usize]) -> Vec<usize> {
        let mut left = self.graph.node(b).tau;
        let mut out = Vec::new();
        for &j in ordered {
            let Some(l) = self.graph.find_link(b, j) else { continue };
            let need = self.demands[j] / self.graph.link(l).capacity_mbps;
            if need <= left + SLACK {
                left -= need;
                out.push(j);
            }
        }
        out
    }

    /// Receivers `i` would take now, in slot order.
    fn receivers(&mut self, i: usize) -> Vec<usize> {
        let open = self.open_bin(i);
        let ordered = self.order(open);
        if self.is_bs(i) {
            self.airtime_fit(i, &ordered)
        } else {
            ordered.into_iter().take(self.cfg.rho).collect()
        }
    }

    /// Receiver count used to rank candidates: the whole open bin for a
    /// household, the airtime-feasible part for a base station.
    fn score(&self, i: usize) -> usize {
        let open = self.open_bin(i);
        if self.is_bs(i) {
            let mut ordered = open;
            ordered.sort_by_key(|&j| (self.matrix.bin(j).len(), j));
            self.airtime_fit(i, &ordered).len()
        } else {
            open.len()
        }
    }

    fn leftovers(&self) -> Vec<usize> {
        (0..self.households()).filter(|&j| self.uncovered(j)).collect()
    }
}

/// Bin covering for one-hop routing: repeatedly open the node with the
/// largest bin of uncovered households (lowest index on ties), attach up to
/// `rho` of them, and give every household left over its own antenna. A
/// covered terminal may itself be picked; it then drops its in-link.
pub fn greedy_one_hop(
    graph: &DistributionGraph,
    matrix: &RelayMatrix,
    demands: &[f64],
    cfg: GreedyConfig,
) -> (Plan, GreedyTrace) {
    let mut st = State::new(graph, matrix, demands, cfg);
    let mut bs_used = BTreeSet::new();
    let mut steps = Vec::new();
    loop {
        let mut best: Option<(usize, usize)> = None;
        for i in st.candidates(&bs_used) {
            if !st.is_bs(i) && st.role[i] == Role::Source {
                continue;
            }
            let score = st.score(i);
            if score > 0 && best.is_none_or(|(_, s)| score > s) {
                best = Some((i, score));
            }
        }
        let Some((i, _)) = best else { break };
        let receivers = st.receivers(i);
        let promoted_from = if st.is_bs(i) {
            bs_used.insert(i);
            None
        } else {
            let prev = match st.role[i] {
                Role::Terminal(p) => Some(p),
                _ => None,
            };
            st.role[i] = Role::Source;
            prev
        };
        for &r in &receivers {
            st.role[r] = Role::Terminal(i);
        }
        steps.push(GreedyStep { source: i, promoted_from, receivers, second_hop: Vec::new() });
    }
    let trace = GreedyTrace { hops: Hops::One, lte: st.lte, steps, isolated: st.leftovers() };
    (trace.replay(graph, demands), trace)
}

/// Two-hop tree growth: open the uncovered node with the most one-hop
/// children (then the most two-hop reach, then lowest index), attach up to
/// `rho` children, and let the child with the most spare capacity adopt
/// further households until no spare capacity is left.
pub fn greedy_two_hop(graph: &DistributionGraph, demands: &[f64], cfg: GreedyConfig) -> (Plan, GreedyTrace) {
    let matrix = relay_matrix(graph, demands);
    let mut st = State::new(graph, &matrix, demands, cfg);
    let mut bs_used = BTreeSet::new();
    let mut steps = Vec::new();
    loop {
        let mut best: Option<(usize, (usize, usize))> = None;
        for i in st.candidates(&bs_used) {
            if !st.is_bs(i) && !st.uncovered(i) {
                continue;
            }
            let first = st.score(i);
            if first == 0 {
                continue;
            }
            let open = st.open_bin(i);
            let reach = (0..st.households())
                .filter(|&k| k != i && st.uncovered(k) && !open.contains(&k))
                .filter(|&k| open.iter().any(|&j| matrix.get(j, k)))
                .count();
            if best.is_none_or(|(_, s)| (first, reach) > s) {
                best = Some((i, (first, reach)));
            }
        }
        let Some((i, _)) = best else { break };
        let receivers = st.receivers(i);
        if st.is_bs(i) {
            bs_used.insert(i);
        } else {
            st.role[i] = Role::Source;
        }
        for &r in &receivers {
            st.role[r] = Role::Terminal(i);
        }
        let second_hop = grow_second_hop(&mut st, i, &receivers);
        steps.push(GreedyStep { source: i, promoted_from: None, receivers, second_hop });
    }
    let trace = GreedyTrace { hops: Hops::Two, lte: st.lte, steps, isolated: st.leftovers() };
    (trace.replay(graph, demands), trace)
}

fn grow_second_hop(st: &mut State<'_>, source: usize, children: &[usize]) -> Vec<(usize, usize)> {
    let graph = st.graph;
    let demands = st.demands;
    let cap = |j: usize| graph.link(graph.find_link(source, j).expect("child of source")).capacity_mbps;
    // Spare is tracked in Mbps per WiFi child, and as shared airtime when
    // the source is a base station.
    let bs = st.is_bs(source);
    let mut airtime = if bs {
        graph.node(source).tau - children.iter().map(|&j| demands[j] / cap(j)).sum::<f64>()
    } else {
        0.0
    };
    let mut spare: Vec<f64> = children.iter().map(|&j| cap(j) - demands[j]).collect();
    let mut exhausted = vec![false; children.len()];
    let mut fanout = vec![0usize; children.len()];
    let mut added = Vec::new();
    loop {
        let spare_of = |p: usize, spare: &[f64], airtime: f64| if bs { airtime * cap(children[p]) } else { spare[p] };
        let mut pick: Option<(usize, f64)> = None;
        for p in 0..children.len() {
            let s = spare_of(p, &spare, airtime);
            if exhausted[p] || fanout[p] >= st.cfg.rho || s <= SLACK {
                continue;
            }
            if pick.is_none_or(|(_, b)| s > b) {
                pick = Some((p, s));
            }
        }
        let Some((p, room)) = pick else { break };
        let j0 = children[p];
        let open: Vec<usize> = st
            .open_bin(j0)
            .into_iter()
            .filter(|&k| graph.find_link(j0, k).is_some_and(|l| graph.link(l).kind == LinkKind::Wifi))
            .filter(|&k| demands[k] <= room + SLACK)
            .collect();
        if open.is_empty() {
            exhausted[p] = true;
            continue;
        }
        let only_via = |k: usize| {
            !children
                .iter()
                .enumerate()
                .any(|(q, &j)| q != p && !exhausted[q] && j != k && st.matrix.get(j, k))
        };
        let k = match st.rng.as_mut() {
            Some(rng) => {
                let mut v = open.clone();
                v.shuffle(rng);
                v.sort_by_key(|&k| !only_via(k));
                v[0]
            }
            None => *open
                .iter()
                .min_by(|&&a, &&b| {
                    only_via(b)
                        .cmp(&only_via(a))
                        .then(demands[b].total_cmp(&demands[a]))
                        .then(a.cmp(&b))
                })
                .expect("non-empty"),
        };
        if bs {
            airtime -= demands[k] / cap(j0);
        } else {
            spare[p] -= demands[k];
        }
        fanout[p] += 1;
        st.role[j0] = Role::Relay;
        st.role[k] = Role::Terminal(j0);
        added.push((j0, k));
    }
    added
}

/// Greedy plan for a non-splittable variant on peak demand.
pub fn greedy_plan(
    scenario: &Scenario,
    variant: Variant,
    profile: &DemandProfile,
    rule: ReceiverRule,
) -> Result<(DistributionGraph, Plan, GreedyTrace)> {
    scenario.validate()?;
    if profile.households() != scenario.households.len() {
        return Err(Error::Formulation("demand profile does not match the scenario".into()));
    }
    let graph = graph_for(scenario, variant, profile);
    let peaks = profile.peak_demands();
    let cfg = GreedyConfig { rho: scenario.rho as usize, rule };
    let (plan, trace) = match variant.hops {
        Hops::One => greedy_one_hop(&graph, &relay_matrix(&graph, &peaks), &peaks, cfg),
        Hops::Two => greedy_two_hop(&graph, &peaks, cfg),
        Hops::Splittable => {
            return Err(Error::Formulation("the greedy solver covers one-hop and two-hop routing only".into()))
        }
    };
    Ok((graph, Plan { variant, ..plan }, trace))
}
