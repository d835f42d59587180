//! Routing plans produced by the solvers, the variant vocabulary and the
//! on-disk plan document.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netgraph::{DistributionGraph, LinkKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Hops {
    One,
    Two,
    Splittable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Temporal {
    Fixed,
    Dynamic,
    SemiDynamic,
    Static,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Variant {
    pub hops: Hops,
    pub lte: bool,
    pub temporal: Temporal,
}

impl Variant {
    pub const fn fixed(hops: Hops, lte: bool) -> Self {
        Self { hops, lte, temporal: Temporal::Fixed }
    }

    pub fn is_splittable(&self) -> bool {
        self.hops == Hops::Splittable
    }
}

impl Hops {
    pub fn as_str(self) -> &'static str {
        match self {
            Hops::One => "one-hop",
            Hops::Two => "two-hop",
            Hops::Splittable => "splittable",
        }
    }
}

impl Temporal {
    pub fn as_str(self) -> &'static str {
        match self {
            Temporal::Fixed => "fixed",
            Temporal::Dynamic => "dynamic",
            Temporal::SemiDynamic => "semi-dynamic",
            Temporal::Static => "static",
        }
    }
}

impl fmt::Display for Hops {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Display for Temporal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}/{}", self.hops, if self.lte { "+lte" } else { "" }, self.temporal)
    }
}

impl FromStr for Hops {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "one-hop" | "one" | "1" => Ok(Hops::One),
            "two-hop" | "two" | "2" => Ok(Hops::Two),
            "splittable" => Ok(Hops::Splittable),
            _ => Err(Error::Parse(format!("unknown hop variant '{s}'"))),
        }
    }
}

impl FromStr for Temporal {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fixed" => Ok(Temporal::Fixed),
            "dynamic" => Ok(Temporal::Dynamic),
            "semi-dynamic" | "semi_dynamic" => Ok(Temporal::SemiDynamic),
            "static" => Ok(Temporal::Static),
            _ => Err(Error::Parse(format!("unknown temporal mode '{s}'"))),
        }
    }
}

/// Constraint families shared by the model builder and the validator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// Out-degree bounded by rho at sources/relays, zero at terminals.
    OutDegree,
    /// Non-sources pull exactly one in-link, sources none.
    InLink,
    /// A node is at most one of source and relay.
    RoleExclusive,
    /// No relay feeds another relay.
    RelayChain,
    /// Selected link carries the demand routed over it.
    LinkCapacity,
    /// Base station without an antenna serves nobody.
    LteGate,
    /// Time shares bounded by the base station's free airtime.
    LteShare,
    /// Time share times capacity covers the routed demand.
    LteCapacity,
    FlowConservation,
    SourceTotal,
    VirtualCapacity,
    HopBudget,
    /// Valid inequalities implied by integrality, added to tighten the
    /// relaxation.
    Implied,
    /// Plan shape problems: unknown roles, negative flows, depth.
    Structure,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::OutDegree => "out_degree",
            Family::InLink => "in_link",
            Family::RoleExclusive => "role_exclusive",
            Family::RelayChain => "relay_chain",
            Family::LinkCapacity => "link_capacity",
            Family::LteGate => "lte_gate",
            Family::LteShare => "lte_share",
            Family::LteCapacity => "lte_capacity",
            Family::FlowConservation => "flow_conservation",
            Family::SourceTotal => "source_total",
            Family::VirtualCapacity => "virtual_capacity",
            Family::HopBudget => "hop_budget",
            Family::Implied => "implied",
            Family::Structure => "structure",
        }
    }
}

/// Routing for one period (or for every period when `period` is `None`).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RoutingLayer {
    pub period: Option<usize>,
    pub relays: BTreeSet<usize>,
    /// Selected link indices for all-or-nothing routing.
    pub links: BTreeSet<usize>,
    /// Traffic per real link for splittable routing.
    pub flows: BTreeMap<usize, f64>,
    /// Traffic entering each node from the virtual source.
    pub source_flows: BTreeMap<usize, f64>,
    /// LTE airtime share per LTE link.
    pub lte_shares: BTreeMap<usize, f64>,
}

/// Antenna placement and routing. Node and link indices refer to the
/// graph the plan was computed on.
#[derive(Debug, Clone, PartialEq)]
pub struct Plan {
    pub variant: Variant,
    /// Set for the per-period plans of the dynamic mode.
    pub period: Option<usize>,
    pub sources: BTreeSet<usize>,
    pub layers: Vec<RoutingLayer>,
}

impl Plan {
    pub fn antenna_count(&self) -> usize {
        self.sources.len()
    }

    /// Links that carry traffic in `layer`: selected links, or real links
    /// with positive flow.
    pub fn active_links(&self, layer: &RoutingLayer, eps: f64) -> Vec<usize> {
        if self.variant.is_splittable() {
            layer.flows.iter().filter(|(_, &f)| f > eps).map(|(&l, _)| l).collect()
        } else {
            layer.links.iter().copied().collect()
        }
    }

    /// Longest chain of relay hops from a source over the active links of
    /// any layer. `None` if the active links contain a cycle.
    pub fn max_relay_depth(&self, graph: &DistributionGraph, eps: f64) -> Option<usize> {
        let mut deepest = 0;
        for layer in &self.layers {
            let active = self.active_links(layer, eps);
            let n = graph.node_count();
            let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
            let mut indeg = vec![0usize; n];
            for &l in &active {
                let link = graph.link(l);
                out[link.from].push(link.to);
                indeg[link.to] += 1;
            }
            // Longest path in a DAG via Kahn's order.
            let mut depth = vec![0usize; n];
            let mut queue: Vec<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
            let mut seen = 0;
            while let Some(v) = queue.pop() {
                seen += 1;
                for &w in &out[v] {
                    depth[w] = depth[w].max(depth[v] + 1);
                    indeg[w] -= 1;
                    if indeg[w] == 0 {
                        queue.push(w);
                    }
                }
            }
            if seen != n {
                return None;
            }
            deepest = deepest.max(depth.into_iter().max().unwrap_or(0));
        }
        Some(deepest)
    }
}

// ---------------------------------------------------------------------------
// Plan document

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanFile {
    pub variant: Variant,
    pub streams: u32,
    pub solver: String,
    /// `peak` or `profile`.
    pub demand: String,
    pub seed: u64,
    pub antennas: usize,
    pub plans: Vec<PlanDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub period: Option<usize>,
    pub sources: Vec<String>,
    pub layers: Vec<LayerDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub period: Option<usize>,
    #[serde(default)]
    pub relays: Vec<String>,
    #[serde(default)]
    pub links: Vec<(String, String)>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub flows: Vec<(String, String, f64)>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub source_flows: Vec<(String, f64)>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub lte_shares: Vec<(String, String, f64)>,
}

impl Plan {
    pub fn to_doc(&self, graph: &DistributionGraph) -> PlanDoc {
        let id = |n: usize| graph.node(n).id.clone();
        let ends = |l: usize| {
            let link = graph.link(l);
            (id(link.from), id(link.to))
        };
        PlanDoc {
            period: self.period,
            sources: self.sources.iter().map(|&s| id(s)).collect(),
            layers: self
                .layers
                .iter()
                .map(|layer| LayerDoc {
                    period: layer.period,
                    relays: layer.relays.iter().map(|&r| id(r)).collect(),
                    links: layer.links.iter().map(|&l| ends(l)).collect(),
                    flows: layer
                        .flows
                        .iter()
                        .map(|(&l, &f)| {
                            let (a, b) = ends(l);
                            (a, b, f)
                        })
                        .collect(),
                    source_flows: layer.source_flows.iter().map(|(&n, &f)| (id(n), f)).collect(),
                    lte_shares: layer
                        .lte_shares
                        .iter()
                        .map(|(&l, &s)| {
                            let (a, b) = ends(l);
                            (a, b, s)
                        })
                        .collect(),
                })
                .collect(),
        }
    }

    /// Resolves ids against `graph`; unknown nodes or links are structural
    /// errors.
    pub fn from_doc(doc: &PlanDoc, variant: Variant, graph: &DistributionGraph) -> Result<Plan> {
        let node = |id: &str| {
            graph
                .node_index(id)
                .filter(|&n| graph.kind(n) != crate::netgraph::NodeKind::VirtualSource)
                .ok_or_else(|| Error::Structural(format!("unknown node '{id}'")))
        };
        let link = |a: &str, b: &str| -> Result<usize> {
            let (from, to) = (node(a)?, node(b)?);
            graph
                .find_link(from, to)
                .filter(|&l| graph.link(l).kind != LinkKind::Virtual)
                .ok_or_else(|| Error::Structural(format!("no link {a} -> {b} in the graph")))
        };
        let mut layers = Vec::with_capacity(doc.layers.len());
        for ld in &doc.layers {
            let mut layer = RoutingLayer { period: ld.period, ..RoutingLayer::default() };
            for r in &ld.relays {
                layer.relays.insert(node(r)?);
            }
            for (a, b) in &ld.links {
                layer.links.insert(link(a, b)?);
            }
            for (a, b, f) in &ld.flows {
                layer.flows.insert(link(a, b)?, *f);
            }
            for (n, f) in &ld.source_flows {
                layer.source_flows.insert(node(n)?, *f);
            }
            for (a, b, s) in &ld.lte_shares {
                let l = link(a, b)?;
                if graph.link(l).kind != LinkKind::Lte {
                    return Err(Error::Structural(format!("{a} -> {b} is not an LTE link")));
                }
                layer.lte_shares.insert(l, *s);
            }
            layers.push(layer);
        }
        let sources = doc.sources.iter().map(|s| node(s)).collect::<Result<_>>()?;
        Ok(Plan { variant, period: doc.period, sources, layers })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netgraph::build_wifi_graph;
    use crate::scenario::{Household, Scenario};

    fn three_line() -> DistributionGraph {
        build_wifi_graph(&Scenario::with_households(vec![
            Household::new("A", 0.0, 0.0),
            Household::new("B", 30.0, 0.0),
            Household::new("C", 60.0, 0.0),
        ]))
    }

    #[test]
    fn variant_strings() {
        assert_eq!("semi-dynamic".parse::<Temporal>().unwrap(), Temporal::SemiDynamic);
        assert_eq!("two-hop".parse::<Hops>().unwrap(), Hops::Two);
        assert!("three-hop".parse::<Hops>().is_err());
        let v = Variant { hops: Hops::Splittable, lte: true, temporal: Temporal::Static };
        assert_eq!(v.to_string(), "splittable+lte/static");
        let json = serde_json::to_string(&v).unwrap();
        assert_eq!(json, r#"{"hops":"splittable","lte":true,"temporal":"static"}"#);
    }

    #[test]
    fn doc_round_trip_and_unknown_ids() {
        let g = three_line();
        let ba = g.find_link(1, 0).unwrap();
        let bc = g.find_link(1, 2).unwrap();
        let plan = Plan {
            variant: Variant::fixed(Hops::One, false),
            period: None,
            sources: [1].into(),
            layers: vec![RoutingLayer { links: [ba, bc].into(), ..Default::default() }],
        };
        let doc = plan.to_doc(&g);
        assert_eq!(doc.sources, vec!["B".to_string()]);
        assert_eq!(Plan::from_doc(&doc, plan.variant, &g).unwrap(), plan);
        assert_eq!(plan.max_relay_depth(&g, 1e-9), Some(1));

        let mut bad = doc.clone();
        bad.sources = vec!["Z".into()];
        assert!(matches!(Plan::from_doc(&bad, plan.variant, &g), Err(Error::Structural(_))));
        let mut bad = doc;
        bad.layers[0].links.push(("A".into(), "A".into()));
        assert!(matches!(Plan::from_doc(&bad, plan.variant, &g), Err(Error::Structural(_))));
    }
}
