//! Capacitated distribution graph over households, LTE base stations and
//! the optional virtual source, plus the relay matrix used by the greedy
//! solvers.
//!
//! Node indices are stable: households first (index = household index in
//! the scenario), then base stations, then the virtual source if present.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::radio::{lte_link_capacity, shadowing_matrix, wifi_link_budget};
use crate::scenario::Scenario;

/// Distance used for co-located nodes so the propagation models stay
/// defined.
const MIN_DISTANCE_M: f64 = 0.01;

pub const VIRTUAL_SOURCE_ID: &str = "virtual_source";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Household,
    LteBs,
    VirtualSource,
}

/// A node by kind and index within that kind's collection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeRef {
    pub kind: NodeKind,
    pub index: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkKind {
    Wifi,
    Lte,
    Virtual,
}

impl LinkKind {
    pub fn as_str(self) -> &'static str {
        match self {
            LinkKind::Wifi => "wifi",
            LinkKind::Lte => "lte",
            LinkKind::Virtual => "virtual",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub node_ref: NodeRef,
    pub id: String,
    /// Available airtime fraction; only meaningful for base stations.
    pub tau: f64,
}

/// Directed link between two graph node indices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Link {
    pub from: usize,
    pub to: usize,
    pub capacity_mbps: f64,
    pub kind: LinkKind,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DistributionGraph {
    nodes: Vec<Node>,
    links: Vec<Link>,
    out_links: Vec<Vec<usize>>,
    in_links: Vec<Vec<usize>>,
}

impl DistributionGraph {
    fn push_node(&mut self, node: Node) -> usize {
        self.nodes.push(node);
        self.out_links.push(Vec::new());
        self.in_links.push(Vec::new());
        self.nodes.len() - 1
    }

    fn push_link(&mut self, link: Link) -> usize {
        debug_assert!(link.from != link.to);
        debug_assert!(link.capacity_mbps > 0.0);
        let idx = self.links.len();
        self.out_links[link.from].push(idx);
        self.in_links[link.to].push(idx);
        self.links.push(link);
        idx
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, idx: usize) -> &Node {
        &self.nodes[idx]
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn link(&self, idx: usize) -> &Link {
        &self.links[idx]
    }

    pub fn out_links(&self, node: usize) -> &[usize] {
        &self.out_links[node]
    }

    pub fn in_links(&self, node: usize) -> &[usize] {
        &self.in_links[node]
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn household_count(&self) -> usize {
        self.count_kind(NodeKind::Household)
    }

    pub fn bs_count(&self) -> usize {
        self.count_kind(NodeKind::LteBs)
    }

    fn count_kind(&self, kind: NodeKind) -> usize {
        self.nodes.iter().filter(|n| n.node_ref.kind == kind).count()
    }

    pub fn kind(&self, node: usize) -> NodeKind {
        self.nodes[node].node_ref.kind
    }

    pub fn is_household(&self, node: usize) -> bool {
        self.kind(node) == NodeKind::Household
    }

    pub fn is_bs(&self, node: usize) -> bool {
        self.kind(node) == NodeKind::LteBs
    }

    /// Households and base stations.
    pub fn real_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.nodes.len()).filter(|&i| self.kind(i) != NodeKind::VirtualSource)
    }

    pub fn virtual_source(&self) -> Option<usize> {
        self.nodes.iter().position(|n| n.node_ref.kind == NodeKind::VirtualSource)
    }

    pub fn has_lte(&self) -> bool {
        self.links.iter().any(|l| l.kind == LinkKind::Lte)
    }

    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.id == id)
    }

    pub fn find_link(&self, from: usize, to: usize) -> Option<usize> {
        self.out_links[from].iter().copied().find(|&l| self.links[l].to == to)
    }

    /// Real (non-virtual) links leaving `node`.
    pub fn real_out_links(&self, node: usize) -> impl Iterator<Item = usize> + '_ {
        self.out_links[node]
            .iter()
            .copied()
            .filter(|&l| self.links[l].kind != LinkKind::Virtual)
    }

    pub fn real_in_links(&self, node: usize) -> impl Iterator<Item = usize> + '_ {
        self.in_links[node]
            .iter()
            .copied()
            .filter(|&l| self.links[l].kind != LinkKind::Virtual)
    }

    pub fn max_real_capacity(&self) -> f64 {
        self.links
            .iter()
            .filter(|l| l.kind != LinkKind::Virtual)
            .map(|l| l.capacity_mbps)
            .fold(0.0, f64::max)
    }

    /// `from_id to_id capacity_mbps kind`, one link per line.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        for l in &self.links {
            let _ = writeln!(
                out,
                "{} {} {:.6} {}",
                self.nodes[l.from].id,
                self.nodes[l.to].id,
                l.capacity_mbps,
                l.kind.as_str()
            );
        }
        out
    }
}

/// Bidirectional WiFi links between every household pair whose received
/// signal clears the sensitivity threshold.
pub fn build_wifi_graph(scenario: &Scenario) -> DistributionGraph {
    let mut g = DistributionGraph::default();
    for (i, h) in scenario.households.iter().enumerate() {
        g.push_node(Node {
            node_ref: NodeRef { kind: NodeKind::Household, index: i },
            id: h.id.clone(),
            tau: 0.0,
        });
    }
    let n = scenario.households.len();
    let shadow = shadowing_matrix(n, &scenario.radio);
    let mut capacity = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let a = &scenario.households[i].position;
            let b = &scenario.households[j].position;
            let d = a.distance_to(b).max(MIN_DISTANCE_M);
            let c = wifi_link_budget(d, &scenario.radio, shadow[i][j])
                .map_or(0.0, |budget| budget.capacity_mbps);
            capacity[i][j] = c;
            capacity[j][i] = c;
        }
    }
    for (i, row) in capacity.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            if i != j && c > 0.0 {
                g.push_link(Link { from: i, to: j, capacity_mbps: c, kind: LinkKind::Wifi });
            }
        }
    }
    g
}

/// Adds base-station nodes and one outbound LTE link per LTE-capable
/// household whose full-airtime capacity exceeds one channel's rate.
pub fn augment_with_lte(graph: &DistributionGraph, scenario: &Scenario) -> DistributionGraph {
    let mut g = graph.clone();
    for (b, bs) in scenario.lte_bs.iter().enumerate() {
        let node = g.push_node(Node {
            node_ref: NodeRef { kind: NodeKind::LteBs, index: b },
            id: bs.id.clone(),
            tau: bs.tau,
        });
        for (j, h) in scenario.households.iter().enumerate() {
            if !h.lte_capable {
                continue;
            }
            let d = bs.position.distance_to(&h.position).max(MIN_DISTANCE_M);
            let c = lte_link_capacity(d, bs, &scenario.radio).unwrap_or(0.0);
            if c > scenario.channel_rate_mbps {
                g.push_link(Link { from: node, to: j, capacity_mbps: c, kind: LinkKind::Lte });
            }
        }
    }
    g
}

/// Adds a virtual source with a link of `capacity_mbps` to every
/// household and base station.
pub fn augment_virtual_source(graph: &DistributionGraph, capacity_mbps: f64) -> DistributionGraph {
    let mut g = graph.clone();
    let real: Vec<usize> = g.real_nodes().collect();
    let s = g.push_node(Node {
        node_ref: NodeRef { kind: NodeKind::VirtualSource, index: 0 },
        id: VIRTUAL_SOURCE_ID.to_string(),
        tau: 0.0,
    });
    for i in real {
        g.push_link(Link { from: s, to: i, capacity_mbps, kind: LinkKind::Virtual });
    }
    g
}

/// Total peak demand, floored at 1 Mbps so virtual links keep a positive
/// capacity.
pub fn virtual_capacity(peak_demands: &[f64]) -> f64 {
    peak_demands.iter().sum::<f64>().max(1.0)
}

/// `matrix[i][j]` is set iff a real link `i -> j` can carry `j`'s whole
/// demand on its own. Base-station links are judged on their
/// `tau`-scaled capacity.
#[derive(Debug, Clone, PartialEq)]
pub struct RelayMatrix {
    matrix: Vec<Vec<bool>>,
    bins: Vec<Vec<usize>>,
}

impl RelayMatrix {
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.matrix[i][j]
    }

    pub fn bin(&self, i: usize) -> &[usize] {
        &self.bins[i]
    }

    pub fn size(&self) -> usize {
        self.matrix.len()
    }
}

/// `demands` is indexed by household; base stations demand nothing.
pub fn relay_matrix(graph: &DistributionGraph, demands: &[f64]) -> RelayMatrix {
    let n = graph.real_nodes().count();
    let mut matrix = vec![vec![false; n]; n];
    for link in graph.links() {
        if link.kind == LinkKind::Virtual {
            continue;
        }
        let effective = match link.kind {
            LinkKind::Lte => link.capacity_mbps * graph.node(link.from).tau,
            _ => link.capacity_mbps,
        };
        let need = demands.get(link.to).copied().unwrap_or(0.0);
        if effective >= need {
            matrix[link.from][link.to] = true;
        }
    }
    let bins = matrix
        .iter()
        .map(|row| row.iter().enumerate().filter(|(_, &b)| b).map(|(j, _)| j).collect())
        .collect();
    RelayMatrix { matrix, bins }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{Household, LteBaseStation, Scenario};

    fn line(spacing: f64, n: usize) -> Scenario {
        Scenario::with_households(
            (0..n).map(|i| Household::new(format!("n{i}"), i as f64 * spacing, 0.0)).collect(),
        )
    }

    #[test]
    fn close_pair_links_both_ways() {
        let g = build_wifi_graph(&line(10.0, 2));
        assert_eq!(g.links().len(), 2);
        assert_eq!(g.links()[0].capacity_mbps, g.links()[1].capacity_mbps);
        assert_eq!((g.links()[0].from, g.links()[0].to), (0, 1));
    }

    #[test]
    fn far_pair_has_no_link() {
        let g = build_wifi_graph(&line(500.0, 2));
        assert!(g.links().is_empty());
    }

    #[test]
    fn lte_links_only_leave_base_stations() {
        let mut s = line(30.0, 5);
        let empty = augment_with_lte(&build_wifi_graph(&s), &s);
        assert_eq!(empty, build_wifi_graph(&s));
        s.lte_bs.push(LteBaseStation::new("bs", 60.0, 0.0, 0.0, 46.0));
        s.households[1].lte_capable = false;
        s.households[3].lte_capable = false;
        let base = build_wifi_graph(&s);
        let g = augment_with_lte(&base, &s);
        let lte: Vec<_> = g.links().iter().filter(|l| l.kind == LinkKind::Lte).collect();
        assert_eq!(lte.len(), 3);
        assert!(lte.iter().all(|l| l.from == 5));
        assert!(g.in_links(5).is_empty());
        assert_eq!(&g.links()[..base.links().len()], base.links());
    }

    #[test]
    fn virtual_source_counts() {
        let g = augment_virtual_source(&build_wifi_graph(&line(10.0, 3)), 30.0);
        assert_eq!(g.node_count(), 4);
        let vs = g.virtual_source().unwrap();
        assert_eq!(g.out_links(vs).len(), 3);
        assert!(g.in_links(vs).is_empty());
        let empty = augment_virtual_source(&DistributionGraph::default(), 1.0);
        assert_eq!(empty.node_count(), 1);
        assert!(empty.links().is_empty());
    }

    #[test]
    fn relay_matrix_bins() {
        let g = build_wifi_graph(&line(40.0, 3));
        let rm = relay_matrix(&g, &[5.0, 5.0, 5.0]);
        assert_eq!(rm.bin(1), &[0, 2]);
        assert_eq!(rm.bin(0), &[1]);
        assert_eq!(rm.bin(2), &[1]);
        let cap = g.links()[0].capacity_mbps;
        let rm = relay_matrix(&g, &[5.0, cap + 1.0, 0.0]);
        assert!(!rm.get(0, 1));
        assert!(rm.get(1, 2));
    }

    #[test]
    fn edge_list_format() {
        let g = build_wifi_graph(&line(10.0, 2));
        let text = g.to_edge_list();
        let first = text.lines().next().unwrap();
        let parts: Vec<_> = first.split_whitespace().collect();
        assert_eq!(parts[0], "n0");
        assert_eq!(parts[1], "n1");
        assert_eq!(parts[3], "wifi");
    }
}
