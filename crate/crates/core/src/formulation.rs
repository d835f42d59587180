//! Lowers a graph, a demand profile and a variant into mixed-integer
//! models.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt::Write as _;
use std::time::Duration;

use crate::demand::DemandProfile;
use crate::error::{Error, Result};
use crate::netgraph::{DistributionGraph, LinkKind};
use crate::plan::{Family, Hops, Plan, RoutingLayer, Temporal, Variant};
use crate::scenario::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarClass {
    /// Antenna at a node.
    X,
    /// Household relays for others.
    Y,
    /// Link carries the receiver's demand.
    U,
    /// Virtual link activated.
    L,
    /// Flow on a virtual link, indexed by receiving node.
    Fs,
    /// Flow on a real link.
    F,
    /// LTE airtime share.
    Lambda,
    /// Part of a link's selection fed directly by a source; auxiliary
    /// column added when tightening two-hop models.
    SourceFed,
}

/// Registry key: node index for `X`, `Y`, `L`, `Fs`; link index for `U`,
/// `F`, `Lambda`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarKey {
    pub class: VarClass,
    pub index: usize,
    pub period: Option<usize>,
}

impl VarKey {
    pub fn new(class: VarClass, index: usize, period: Option<usize>) -> Self {
        Self { class, index, period }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Binary,
    Continuous,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lower: f64,
    pub upper: f64,
    pub key: VarKey,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl Sense {
    pub fn as_str(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub family: Family,
    pub terms: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl Constraint {
    pub fn lhs(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|&(c, a)| a * x[c]).sum()
    }

    /// Amount by which `x` violates the row (0 when satisfied).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let lhs = self.lhs(x);
        match self.sense {
            Sense::Le => (lhs - self.rhs).max(0.0),
            Sense::Ge => (self.rhs - lhs).max(0.0),
            Sense::Eq => (lhs - self.rhs).abs(),
        }
    }
}

/// One routing copy inside a model.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerInfo {
    /// Period tag carried by the layer's routing variables.
    pub period: Option<usize>,
    /// Demand the layer's routing must carry (elementwise max when several
    /// periods share the layer).
    pub demand: Vec<f64>,
    pub active: Vec<bool>,
    /// In-link rows use the per-period activity form.
    pub activity_form: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MipModel {
    pub variant: Variant,
    /// Set for the per-period models of the dynamic mode.
    pub period: Option<usize>,
    /// Period tag of the antenna variables.
    pub source_period: Option<usize>,
    pub layers: Vec<LayerInfo>,
    pub variables: Vec<Variable>,
    pub constraints: Vec<Constraint>,
    pub objective: Vec<(usize, f64)>,
    /// `(from, to)` graph nodes of every graph link.
    pub link_ends: Vec<(usize, usize)>,
    /// Graph nodes below this index are households.
    pub households: usize,
    registry: HashMap<VarKey, usize>,
}

impl MipModel {
    fn new(variant: Variant, period: Option<usize>, graph: &DistributionGraph) -> Self {
        Self {
            variant,
            period,
            source_period: period,
            layers: Vec::new(),
            variables: Vec::new(),
            constraints: Vec::new(),
            objective: Vec::new(),
            link_ends: graph.links().iter().map(|l| (l.from, l.to)).collect(),
            households: graph.household_count(),
            registry: HashMap::new(),
        }
    }

    pub fn var(&self, key: VarKey) -> Option<usize> {
        self.registry.get(&key).copied()
    }

    /// Antenna column of `node` (`X` or `l`).
    pub fn source_var(&self, node: usize) -> Option<usize> {
        let class = if self.variant.is_splittable() { VarClass::L } else { VarClass::X };
        self.var(VarKey::new(class, node, self.source_period))
    }

    pub fn binary_count(&self) -> usize {
        self.variables.iter().filter(|v| v.kind == VarKind::Binary).count()
    }

    pub fn continuous_count(&self) -> usize {
        self.variables.len() - self.binary_count()
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().map(|&(c, a)| a * x[c]).sum()
    }

    fn add_var(&mut self, name: String, kind: VarKind, lower: f64, upper: f64, key: VarKey) -> usize {
        debug_assert!(!self.registry.contains_key(&key), "duplicate variable {name}");
        let idx = self.variables.len();
        self.variables.push(Variable { name, kind, lower, upper, key });
        self.registry.insert(key, idx);
        idx
    }

    fn add_row(&mut self, name: String, family: Family, terms: Vec<(usize, f64)>, sense: Sense, rhs: f64) {
        self.constraints.push(Constraint { name, family, terms, sense, rhs });
    }

    /// Indices of rows violated by more than `eps`, and bound or
    /// integrality breaches as `None`.
    pub fn violations(&self, x: &[f64], eps: f64) -> Vec<Option<usize>> {
        let mut out = Vec::new();
        if x.len() != self.variables.len() {
            out.push(None);
            return out;
        }
        for (v, &value) in self.variables.iter().zip(x) {
            let frac = v.kind == VarKind::Binary && (value - value.round()).abs() > eps;
            if !value.is_finite() || value < v.lower - eps || value > v.upper + eps || frac {
                out.push(None);
            }
        }
        for (r, row) in self.constraints.iter().enumerate() {
            if row.violation(x) > eps * (1.0 + row.rhs.abs()) {
                out.push(Some(r));
            }
        }
        out
    }

    pub fn is_feasible(&self, x: &[f64], eps: f64) -> bool {
        self.violations(x, eps).is_empty()
    }

    /// LP-format text: objective, rows, bounds and binaries.
    pub fn to_lp_string(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "\\ variant {}", self.variant);
        s.push_str("Minimize\n obj:");
        write_terms(&mut s, &self.objective, &self.variables);
        s.push_str("\nSubject To\n");
        for row in &self.constraints {
            let _ = write!(s, " {}:", row.name);
            write_terms(&mut s, &row.terms, &self.variables);
            let _ = writeln!(s, " {} {}", row.sense.as_str(), fmt_num(row.rhs));
        }
        s.push_str("Bounds\n");
        for v in self.variables.iter().filter(|v| v.kind == VarKind::Continuous) {
            if v.upper.is_finite() {
                let _ = writeln!(s, " {} <= {} <= {}", fmt_num(v.lower), v.name, fmt_num(v.upper));
            } else {
                let _ = writeln!(s, " {} >= {}", v.name, fmt_num(v.lower));
            }
        }
        for v in self.variables.iter().filter(|v| v.kind == VarKind::Binary && v.upper < 1.0) {
            let _ = writeln!(s, " {} = {}", v.name, fmt_num(v.upper));
        }
        s.push_str("Binaries\n");
        for v in self.variables.iter().filter(|v| v.kind == VarKind::Binary) {
            let _ = writeln!(s, " {}", v.name);
        }
        s.push_str("End\n");
        s
    }
}

fn fmt_num(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

fn write_terms(s: &mut String, terms: &[(usize, f64)], vars: &[Variable]) {
    if terms.is_empty() {
        s.push_str(" 0");
    }
    for (k, &(c, a)) in terms.iter().enumerate() {
        let sign = if a < 0.0 { " -" } else if k == 0 { "" } else { " +" };
        let mag = a.abs();
        if mag == 1.0 {
            let _ = write!(s, "{sign} {}", vars[c].name);
        } else {
            let _ = write!(s, "{sign} {} {}", fmt_num(mag), vars[c].name);
        }
    }
}

/// Exact solver settings.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Big-M constant; computed from the instance when `None`.
    pub big_m: Option<f64>,
    pub eps: f64,
    pub node_limit: usize,
    pub time_limit: Option<Duration>,
    /// Append implied inequalities before solving.
    pub strengthen: bool,
    /// Seed branch-and-bound with a greedy plan when one applies.
    pub greedy_start: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            big_m: None,
            eps: 1e-6,
            node_limit: 2_000_000,
            time_limit: None,
            strengthen: true,
            greedy_start: true,
        }
    }
}

/// Smallest safe big-M: total peak demand plus the largest real link
/// capacity. A configured value below that is rejected.
pub fn big_m(graph: &DistributionGraph, peaks: &[f64], cfg: &SolverConfig) -> Result<f64> {
    let floor = peaks.iter().sum::<f64>() + graph.max_real_capacity();
    match cfg.big_m {
        None => Ok(floor),
        Some(m) if m.is_finite() && m >= floor => Ok(m),
        Some(m) => Err(Error::Formulation(format!("big-M {m} is below the safe value {floor}"))),
    }
}

fn sanitize(id: &str) -> String {
    id.chars().map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' }).collect()
}

struct Builder<'a> {
    graph: &'a DistributionGraph,
    scenario: &'a Scenario,
    variant: Variant,
    theta: f64,
    names: Vec<String>,
    households: usize,
    bs: Vec<usize>,
    /// Real links usable by the variant, in graph order.
    real_links: Vec<usize>,
}

fn suffix(period: Option<usize>) -> String {
    period.map(|t| format!("_t{t}")).unwrap_or_default()
}

impl Builder<'_> {
    fn is_lte(&self, l: usize) -> bool {
        self.graph.link(l).kind == LinkKind::Lte
    }

    fn cap(&self, l: usize) -> f64 {
        self.graph.link(l).capacity_mbps
    }

    fn link_name(&self, l: usize) -> String {
        let link = self.graph.link(l);
        format!("{}_{}", self.names[link.from], self.names[link.to])
    }

    fn in_links(&self, j: usize) -> Vec<usize> {
        self.graph.real_in_links(j).filter(|&l| self.variant.lte || !self.is_lte(l)).collect()
    }

    fn wifi_out(&self, i: usize) -> Vec<usize> {
        self.graph.real_out_links(i).filter(|&l| !self.is_lte(l)).collect()
    }

    fn lte_out(&self, b: usize) -> Vec<usize> {
        self.graph.real_out_links(b).filter(|&l| self.is_lte(l)).collect()
    }

    fn source_nodes(&self) -> Vec<usize> {
        let mut v: Vec<usize> = (0..self.households).collect();
        if self.variant.lte {
            v.extend(&self.bs);
        }
        v
    }

    fn tau(&self, b: usize) -> f64 {
        self.graph.node(b).tau
    }

    fn add_sources(&self, m: &mut MipModel, period: Option<usize>) {
        let (class, prefix) =
            if self.variant.is_splittable() { (VarClass::L, "l_s_") } else { (VarClass::X, "X_") };
        for i in self.source_nodes() {
            let name = format!("{prefix}{}{}", self.names[i], suffix(period));
            let c = m.add_var(name, VarKind::Binary, 0.0, 1.0, VarKey::new(class, i, period));
            m.objective.push((c, 1.0));
        }
    }

    fn add_nonsplit_layer_vars(&self, m: &mut MipModel, p: Option<usize>) {
        let sfx = suffix(p);
        if self.variant.hops == Hops::Two {
            for j in 0..self.households {
                let name = format!("Y_{}{sfx}", self.names[j]);
                m.add_var(name, VarKind::Binary, 0.0, 1.0, VarKey::new(VarClass::Y, j, p));
            }
        }
        for &l in &self.real_links {
            let name = format!("u_{}{sfx}", self.link_name(l));
            m.add_var(name, VarKind::Binary, 0.0, 1.0, VarKey::new(VarClass::U, l, p));
        }
        for &l in self.real_links.iter().filter(|&&l| self.is_lte(l)) {
            let name = format!("lam_{}{sfx}", self.link_name(l));
            m.add_var(name, VarKind::Continuous, 0.0, 1.0, VarKey::new(VarClass::Lambda, l, p));
        }
    }

    fn add_split_layer_vars(&self, m: &mut MipModel, p: Option<usize>) {
        let sfx = suffix(p);
        for i in self.source_nodes() {
            let name = format!("f_s_{}{sfx}", self.names[i]);
            m.add_var(name, VarKind::Continuous, 0.0, f64::INFINITY, VarKey::new(VarClass::Fs, i, p));
        }
        for &l in &self.real_links {
            let name = format!("f_{}{sfx}", self.link_name(l));
            m.add_var(name, VarKind::Continuous, 0.0, f64::INFINITY, VarKey::new(VarClass::F, l, p));
        }
        for &l in self.real_links.iter().filter(|&&l| self.is_lte(l)) {
            let name = format!("lam_{}{sfx}", self.link_name(l));
            m.add_var(name, VarKind::Continuous, 0.0, 1.0, VarKey::new(VarClass::Lambda, l, p));
        }
    }

    fn col(m: &MipModel, class: VarClass, index: usize, p: Option<usize>) -> usize {
        m.var(VarKey::new(class, index, p)).expect("variable declared")
    }

    /// Degree, in-link, role and relay-chain rows of one routing layer.
    fn structural_rows(&self, m: &mut MipModel, p: Option<usize>, sp: Option<usize>, active: Option<&[bool]>) {
        let sfx = suffix(p);
        let rho = f64::from(self.scenario.rho);
        let two = self.variant.hops == Hops::Two;
        let n = self.households;
        for i in 0..n {
            let mut terms: Vec<(usize, f64)> =
                self.wifi_out(i).iter().map(|&l| (Self::col(m, VarClass::U, l, p), 1.0)).collect();
            terms.push((Self::col(m, VarClass::X, i, sp), -rho));
            if two {
                terms.push((Self::col(m, VarClass::Y, i, p), -rho));
            }
            m.add_row(format!("out_degree_{}{sfx}", self.names[i]), Family::OutDegree, terms, Sense::Le, 0.0);
        }
        for j in 0..n {
            let mut terms: Vec<(usize, f64)> =
                self.in_links(j).iter().map(|&l| (Self::col(m, VarClass::U, l, p), 1.0)).collect();
            let demanding = active.is_none_or(|a| a[j]);
            let rhs = if demanding {
                terms.push((Self::col(m, VarClass::X, j, sp), 1.0));
                1.0
            } else {
                if two {
                    terms.push((Self::col(m, VarClass::Y, j, p), -1.0));
                }
                0.0
            };
            m.add_row(format!("in_link_{}{sfx}", self.names[j]), Family::InLink, terms, Sense::Eq, rhs);
        }
        if two {
            for i in 0..n {
                let terms = vec![(Self::col(m, VarClass::X, i, sp), 1.0), (Self::col(m, VarClass::Y, i, p), 1.0)];
                m.add_row(format!("role_{}{sfx}", self.names[i]), Family::RoleExclusive, terms, Sense::Le, 1.0);
            }
            for &l in self.real_links.iter().filter(|&&l| !self.is_lte(l)) {
                let link = self.graph.link(l);
                let terms = vec![
                    (Self::col(m, VarClass::Y, link.to, p), 1.0),
                    (Self::col(m, VarClass::Y, link.from, p), 1.0),
                    (Self::col(m, VarClass::U, l, p), 1.0),
                ];
                m.add_row(format!("relay_chain_{}{sfx}", self.link_name(l)), Family::RelayChain, terms, Sense::Le, 2.0);
            }
        }
        if self.variant.lte {
            for &b in &self.bs {
                let outs = self.lte_out(b);
                let mut terms: Vec<(usize, f64)> =
                    outs.iter().map(|&l| (Self::col(m, VarClass::U, l, p), 1.0)).collect();
                terms.push((Self::col(m, VarClass::X, b, sp), -(outs.len() as f64)));
                m.add_row(format!("lte_gate_{}{sfx}", self.names[b]), Family::LteGate, terms, Sense::Le, 0.0);
            }
            for &b in &self.bs {
                let mut terms: Vec<(usize, f64)> =
                    self.lte_out(b).iter().map(|&l| (Self::col(m, VarClass::Lambda, l, p), 1.0)).collect();
                terms.push((Self::col(m, VarClass::X, b, sp), -self.tau(b)));
                m.add_row(format!("lte_share_{}{sfx}", self.names[b]), Family::LteShare, terms, Sense::Le, 0.0);
            }
        }
    }

    /// Capacity rows of one layer for one demand vector.
    fn demand_rows(&self, m: &mut MipModel, p: Option<usize>, sp: Option<usize>, delta: &[f64], tag: &str) {
        let sfx = suffix(p);
        match self.variant.hops {
            Hops::One => {
                for j in 0..self.households {
                    let mut terms: Vec<(usize, f64)> =
                        self.in_links(j).iter().map(|&l| (Self::col(m, VarClass::U, l, p), self.cap(l))).collect();
                    terms.push((Self::col(m, VarClass::X, j, sp), delta[j]));
                    let name = format!("demand_{}{sfx}{tag}", self.names[j]);
                    m.add_row(name, Family::LinkCapacity, terms, Sense::Ge, delta[j]);
                }
                if self.variant.lte {
                    for &l in self.real_links.iter().filter(|&&l| self.is_lte(l)) {
                        let j = self.graph.link(l).to;
                        let terms = vec![
                            (Self::col(m, VarClass::Lambda, l, p), self.cap(l)),
                            (Self::col(m, VarClass::U, l, p), -delta[j]),
                        ];
                        let name = format!("lte_capacity_{}{sfx}{tag}", self.link_name(l));
                        m.add_row(name, Family::LteCapacity, terms, Sense::Ge, 0.0);
                    }
                }
            }
            Hops::Two => {
                let theta = self.theta;
                for &l in &self.real_links {
                    let link = self.graph.link(l);
                    let (i, j) = (link.from, link.to);
                    let mut terms = Vec::new();
                    if self.is_lte(l) {
                        terms.push((Self::col(m, VarClass::Lambda, l, p), self.cap(l)));
                        terms.push((Self::col(m, VarClass::U, l, p), -delta[j] - theta));
                    } else {
                        terms.push((Self::col(m, VarClass::U, l, p), self.cap(l) - delta[j] - theta));
                    }
                    for k_link in self.wifi_out(j) {
                        let k = self.graph.link(k_link).to;
                        if k != i {
                            terms.push((Self::col(m, VarClass::U, k_link, p), -delta[k]));
                        }
                    }
                    let family = if self.is_lte(l) { Family::LteCapacity } else { Family::LinkCapacity };
                    let name = format!("{}_{}{sfx}{tag}", family.as_str(), self.link_name(l));
                    m.add_row(name, family, terms, Sense::Ge, -theta);
                }
            }
            Hops::Splittable => unreachable!("splittable layers use flow rows"),
        }
        let _ = sp;
    }

    fn split_rows(&self, m: &mut MipModel, p: Option<usize>, sp: Option<usize>, delta: &[f64]) {
        let sfx = suffix(p);
        let total: f64 = delta.iter().sum();
        for i in self.source_nodes() {
            let mut terms = vec![(Self::col(m, VarClass::Fs, i, p), 1.0)];
            for l in self.in_links(i) {
                terms.push((Self::col(m, VarClass::F, l, p), 1.0));
            }
            for l in self.graph.real_out_links(i).filter(|l| self.real_links.contains(l)) {
                terms.push((Self::col(m, VarClass::F, l, p), -1.0));
            }
            let d = if i < self.households { delta[i] } else { 0.0 };
            m.add_row(format!("conservation_{}{sfx}", self.names[i]), Family::FlowConservation, terms, Sense::Eq, d);
        }
        let terms = self.source_nodes().iter().map(|&i| (Self::col(m, VarClass::Fs, i, p), 1.0)).collect();
        m.add_row(format!("source_total{sfx}"), Family::SourceTotal, terms, Sense::Eq, total);
        for &l in &self.real_links {
            let name = format!("link_capacity_{}{sfx}", self.link_name(l));
            if self.is_lte(l) {
                let terms =
                    vec![(Self::col(m, VarClass::F, l, p), 1.0), (Self::col(m, VarClass::Lambda, l, p), -self.cap(l))];
                m.add_row(name, Family::LteCapacity, terms, Sense::Le, 0.0);
            } else {
                m.add_row(name, Family::LinkCapacity, vec![(Self::col(m, VarClass::F, l, p), 1.0)], Sense::Le, self.cap(l));
            }
        }
        let vs = self.graph.virtual_source().expect("checked by caller");
        for i in self.source_nodes() {
            let c_si = self
                .graph
                .find_link(vs, i)
                .map(|l| self.cap(l))
                .expect("virtual link to every real node");
            let terms = vec![(Self::col(m, VarClass::Fs, i, p), 1.0), (Self::col(m, VarClass::L, i, sp), -c_si)];
            m.add_row(format!("virtual_capacity_{}{sfx}", self.names[i]), Family::VirtualCapacity, terms, Sense::Le, 0.0);
        }
        let h = f64::from(self.scenario.hop_limit);
        let terms = self.real_links.iter().map(|&l| (Self::col(m, VarClass::F, l, p), 1.0)).collect();
        m.add_row(format!("hop_budget{sfx}"), Family::HopBudget, terms, Sense::Le, h * total);
        if self.variant.lte {
            for &b in &self.bs {
                let mut terms: Vec<(usize, f64)> =
                    self.lte_out(b).iter().map(|&l| (Self::col(m, VarClass::Lambda, l, p), 1.0)).collect();
                terms.push((Self::col(m, VarClass::L, b, sp), -self.tau(b)));
                m.add_row(format!("lte_share_{}{sfx}", self.names[b]), Family::LteShare, terms, Sense::Le, 0.0);
            }
        }
    }

    /// Model with one routing layer per entry of `layers`; `sp` tags the
    /// shared antenna variables.
    fn build(&self, period: Option<usize>, sp: Option<usize>, layers: Vec<(Option<usize>, Vec<Vec<f64>>, bool)>) -> MipModel {
        let mut m = MipModel::new(self.variant, period, self.graph);
        m.source_period = sp;
        self.add_sources(&mut m, sp);
        let split = self.variant.is_splittable();
        for (p, _, _) in &layers {
            if split {
                self.add_split_layer_vars(&mut m, *p);
            } else {
                self.add_nonsplit_layer_vars(&mut m, *p);
            }
        }
        for (p, columns, activity_form) in &layers {
            let demand = elementwise_max(columns);
            let active: Vec<bool> = demand.iter().map(|&d| d > 0.0).collect();
            if split {
                self.split_rows(&mut m, *p, sp, &demand);
            } else {
                self.structural_rows(&mut m, *p, sp, activity_form.then_some(active.as_slice()));
                let mut seen: HashSet<Vec<u64>> = HashSet::new();
                for (k, col) in columns.iter().enumerate() {
                    if !seen.insert(col.iter().map(|d| d.to_bits()).collect()) {
                        continue;
                    }
                    let tag = if columns.len() > 1 { format!("_d{k}") } else { String::new() };
                    self.demand_rows(&mut m, *p, sp, col, &tag);
                }
            }
            m.layers.push(LayerInfo { period: *p, demand, active, activity_form: *activity_form });
        }
        m
    }
}

fn elementwise_max(columns: &[Vec<f64>]) -> Vec<f64> {
    let mut out = columns[0].clone();
    for col in &columns[1..] {
        for (o, &d) in out.iter_mut().zip(col) {
            *o = o.max(d);
        }
    }
    out
}

/// Builds the model family for `variant`: one model, or one per period in
/// dynamic mode.
pub fn build_model(
    graph: &DistributionGraph,
    profile: &DemandProfile,
    variant: Variant,
    scenario: &Scenario,
    cfg: &SolverConfig,
) -> Result<Vec<MipModel>> {
    let n = scenario.households.len();
    if profile.households() != n || profile.periods() == 0 || n == 0 {
        return Err(Error::Formulation(format!(
            "demand covers {} households over {} periods, scenario has {n} households",
            profile.households(),
            profile.periods()
        )));
    }
    if graph.household_count() != n {
        return Err(Error::Formulation("graph does not match the scenario".into()));
    }
    if variant.is_splittable() != graph.virtual_source().is_some() {
        return Err(Error::Formulation(format!(
            "variant {variant} needs a graph {} a virtual source",
            if variant.is_splittable() { "with" } else { "without" }
        )));
    }
    if !variant.lte && graph.has_lte() {
        return Err(Error::Formulation("graph carries LTE links but the variant excludes LTE".into()));
    }
    if variant.lte && graph.bs_count() != scenario.lte_bs.len() {
        return Err(Error::Formulation("LTE variant needs a graph augmented with base stations".into()));
    }
    let peaks = profile.peak_demands();
    let theta = big_m(graph, &peaks, cfg)?;
    let b = Builder {
        graph,
        scenario,
        variant,
        theta,
        names: graph.nodes().iter().map(|node| sanitize(&node.id)).collect(),
        households: n,
        bs: graph.real_nodes().filter(|&v| graph.is_bs(v)).collect(),
        real_links: (0..graph.links().len())
            .filter(|&l| match graph.link(l).kind {
                LinkKind::Wifi => true,
                LinkKind::Lte => variant.lte,
                LinkKind::Virtual => false,
            })
            .collect(),
    };
    let columns: Vec<Vec<f64>> = (0..profile.periods()).map(|t| profile.column(t)).collect();
    let models = match variant.temporal {
        Temporal::Fixed => vec![b.build(None, None, vec![(None, vec![peaks], false)])],
        Temporal::Static if variant.is_splittable() => vec![b.build(None, None, vec![(None, vec![peaks], false)])],
        Temporal::Static => vec![b.build(None, None, vec![(None, columns, false)])],
        Temporal::Dynamic => columns
            .into_iter()
            .enumerate()
            .map(|(t, col)| b.build(Some(t), Some(t), vec![(Some(t), vec![col], true)]))
            .collect(),
        Temporal::SemiDynamic => {
            let layers = columns.into_iter().enumerate().map(|(t, col)| (Some(t), vec![col], true)).collect();
            vec![b.build(None, None, layers)]
        }
    };
    Ok(models)
}

/// Appends inequalities implied by integrality and fixes links that can
/// never carry their receiver's demand. The integer feasible set is
/// unchanged; the relaxation gets much tighter.
pub fn strengthen(model: &mut MipModel, graph: &DistributionGraph, scenario: &Scenario) {
    let sp = model.source_period;
    let rho = scenario.rho as usize;
    let layers = model.layers.clone();
    let x = |m: &MipModel, i: usize| m.source_var(i);
    let eff_cap = |l: usize| {
        let link = graph.link(l);
        match link.kind {
            LinkKind::Lte => link.capacity_mbps * graph.node(link.from).tau,
            _ => link.capacity_mbps,
        }
    };
    let implied = |m: &mut MipModel, name: String, terms: Vec<(usize, f64)>, sense: Sense, rhs: f64| {
        m.add_row(name, Family::Implied, terms, sense, rhs);
    };
    if model.variant.is_splittable() {
        for layer in &layers {
            let p = layer.period;
            let sfx = suffix(p);
            let f = |m: &MipModel, l: usize| m.var(VarKey::new(VarClass::F, l, p));
            let nodes: Vec<usize> = (0..graph.node_count()).filter(|&v| x(model, v).is_some()).collect();
            for &i in &nodes {
                let (Some(li), Some(fsi)) = (x(model, i), model.var(VarKey::new(VarClass::Fs, i, p))) else { continue };
                let demand_i = layer.demand.get(i).copied().unwrap_or(0.0);
                let outs: Vec<usize> = graph.real_out_links(i).filter(|&l| f(model, l).is_some()).collect();
                let reach = if graph.is_bs(i) {
                    outs.iter().map(|&l| eff_cap(l)).fold(0.0, f64::max)
                } else {
                    demand_i + outs.iter().map(|&l| eff_cap(l)).sum::<f64>()
                };
                let total: f64 = layer.demand.iter().sum();
                let bound = reach.min(total);
                implied(model, format!("imp_source_{i}{sfx}"), vec![(fsi, 1.0), (li, -bound)], Sense::Le, 0.0);
                if demand_i > 0.0 {
                    let mut terms: Vec<(usize, f64)> =
                        graph.real_in_links(i).filter_map(|l| f(model, l)).map(|c| (c, 1.0)).collect();
                    terms.push((li, demand_i));
                    implied(model, format!("imp_inflow_{i}{sfx}"), terms, Sense::Ge, demand_i);
                }
            }
            // Every demanding household needs an antenna somewhere upstream.
            let mut seen = BTreeSet::new();
            for j in 0..layer.demand.len() {
                if layer.demand[j] <= 0.0 {
                    continue;
                }
                let up = upstream(graph, j, |l| f(model, l).is_some());
                let cols: Vec<usize> = up.iter().filter_map(|&v| x(model, v)).collect();
                if seen.insert(cols.clone()) {
                    let terms = cols.into_iter().map(|c| (c, 1.0)).collect();
                    implied(model, format!("imp_reach_{j}{sfx}"), terms, Sense::Ge, 1.0);
                }
            }
        }
        return;
    }

    let two = model.variant.hops == Hops::Two;
    for layer in &layers {
        let p = layer.period;
        let sfx = suffix(p);
        let u = |m: &MipModel, l: usize| m.var(VarKey::new(VarClass::U, l, p));
        let y = |m: &MipModel, i: usize| m.var(VarKey::new(VarClass::Y, i, p));
        let links: Vec<usize> = (0..graph.links().len()).filter(|&l| u(model, l).is_some()).collect();
        let usable = |l: usize| eff_cap(l) + 1e-9 >= layer.demand[graph.link(l).to];
        for &l in &links {
            let uc = u(model, l).unwrap();
            if !usable(l) {
                model.variables[uc].upper = 0.0;
            }
            let link = *graph.link(l);
            let mut terms = vec![(uc, 1.0)];
            if let Some(xi) = x(model, link.from) {
                terms.push((xi, -1.0));
            }
            if let Some(yi) = y(model, link.from) {
                terms.push((yi, -1.0));
            }
            implied(model, format!("imp_feed_{l}{sfx}"), terms, Sense::Le, 0.0);
            if two && link.kind == LinkKind::Lte {
                if let Some(lam) = model.var(VarKey::new(VarClass::Lambda, l, p)) {
                    let terms = vec![(lam, link.capacity_mbps), (uc, -layer.demand[link.to])];
                    implied(model, format!("imp_airtime_{l}{sfx}"), terms, Sense::Ge, 0.0);
                }
            }
            if two && link.kind == LinkKind::Wifi {
                if let (Some(yj), Some(xi)) = (y(model, link.to), x(model, link.from)) {
                    let terms = vec![(uc, 1.0), (yj, 1.0), (xi, -1.0)];
                    implied(model, format!("imp_relay_parent_{l}{sfx}"), terms, Sense::Le, 1.0);
                }
            }
        }
        if !two {
            continue;
        }
        // Source-fed share of each household link: a = u * X_from.
        let mut fed: HashMap<usize, usize> = HashMap::new();
        for &l in &links {
            let link = *graph.link(l);
            let uc = u(model, l).unwrap();
            if link.kind != LinkKind::Wifi || model.variables[uc].upper <= 0.0 {
                continue;
            }
            let (Some(xi), Some(yi), Some(yj)) = (x(model, link.from), y(model, link.from), y(model, link.to)) else {
                continue;
            };
            let name = model.variables[uc].name.replacen("u_", "a_", 1);
            let a = model.add_var(name, VarKind::Continuous, 0.0, 1.0, VarKey::new(VarClass::SourceFed, l, p));
            fed.insert(l, a);
            implied(model, format!("imp_fed_link_{l}{sfx}"), vec![(a, 1.0), (uc, -1.0)], Sense::Le, 0.0);
            implied(model, format!("imp_fed_source_{l}{sfx}"), vec![(a, 1.0), (xi, -1.0)], Sense::Le, 0.0);
            implied(model, format!("imp_fed_relay_{l}{sfx}"), vec![(uc, 1.0), (a, -1.0), (yi, -1.0)], Sense::Le, 0.0);
            implied(model, format!("imp_fed_terminal_{l}{sfx}"), vec![(uc, 1.0), (a, -1.0), (yj, 1.0)], Sense::Le, 1.0);
        }
        // Column carrying the source-fed part of an in-link.
        let fed_col = |m: &MipModel, l: usize| -> Option<usize> {
            match graph.link(l).kind {
                LinkKind::Lte => u(m, l),
                _ => fed.get(&l).copied(),
            }
        };
        for j in 0..layer.demand.len() {
            let Some(yj) = y(model, j) else { continue };
            let ins: Vec<usize> = graph.real_in_links(j).filter(|&l| u(model, l).is_some()).collect();
            // A relay hangs off a source.
            let mut terms = vec![(yj, 1.0)];
            for &l in &ins {
                if let Some(c) = fed_col(model, l) {
                    terms.push((c, -1.0));
                }
            }
            implied(model, format!("imp_relay_source_{j}{sfx}"), terms, Sense::Le, 0.0);
            // What j forwards as a relay fits the spare capacity of its
            // source-fed in-link.
            let mut terms = Vec::new();
            for l in graph.real_out_links(j) {
                if let (Some(uc), Some(&a)) = (u(model, l), fed.get(&l)) {
                    let d = layer.demand[graph.link(l).to];
                    terms.push((uc, d));
                    terms.push((a, -d));
                }
            }
            if !terms.is_empty() {
                for &l in &ins {
                    match (graph.link(l).kind, model.var(VarKey::new(VarClass::Lambda, l, p))) {
                        (LinkKind::Lte, Some(lam)) => {
                            terms.push((lam, -graph.link(l).capacity_mbps));
                            terms.push((u(model, l).unwrap(), layer.demand[j]));
                        }
                        _ => {
                            let spare = (eff_cap(l) - layer.demand[j]).max(0.0);
                            if let (true, Some(&a)) = (spare > 0.0, fed.get(&l)) {
                                terms.push((a, -spare));
                            }
                        }
                    }
                }
                implied(model, format!("imp_relay_spare_{j}{sfx}"), terms, Sense::Le, 0.0);
            }
            // Load forwarded by j fits the spare capacity of its feeder.
            let outs: Vec<usize> = graph
                .real_out_links(j)
                .filter(|&l| u(model, l).is_some() && graph.link(l).kind == LinkKind::Wifi)
                .collect();
            if outs.is_empty() {
                continue;
            }
            let mut loads: Vec<f64> = outs.iter().map(|&l| layer.demand[graph.link(l).to]).collect();
            loads.sort_by(|a, b| b.total_cmp(a));
            let own_fanout: f64 = loads.iter().take(rho).sum();
            let mut terms: Vec<(usize, f64)> =
                outs.iter().map(|&l| (u(model, l).unwrap(), layer.demand[graph.link(l).to])).collect();
            for &l in &ins {
                let ul = u(model, l).unwrap();
                match model.var(VarKey::new(VarClass::Lambda, l, p)) {
                    Some(lam) => {
                        terms.push((lam, -graph.link(l).capacity_mbps));
                        terms.push((ul, layer.demand[j]));
                    }
                    None => {
                        let spare = (eff_cap(l) - layer.demand[j]).max(0.0);
                        if spare > 0.0 {
                            terms.push((ul, -spare));
                        }
                    }
                }
            }
            if let Some(xj) = x(model, j) {
                terms.push((xj, -own_fanout));
            }
            implied(model, format!("imp_relay_load_{j}{sfx}"), terms, Sense::Le, 0.0);
        }
        // Coverage within two usable hops for households that need an
        // in-link.
        let mut seen = BTreeSet::new();
        for j in 0..layer.demand.len() {
            if layer.activity_form && !layer.active[j] {
                continue;
            }
            let mut cover = BTreeSet::from([j]);
            for l in graph.real_in_links(j).filter(|&l| u(model, l).is_some() && usable(l)) {
                let i = graph.link(l).from;
                cover.insert(i);
                if !graph.is_household(i) {
                    continue;
                }
                for k_link in graph.real_in_links(i).filter(|&k| u(model, k).is_some()) {
                    if eff_cap(k_link) + 1e-9 >= layer.demand[i] + layer.demand[j] {
                        cover.insert(graph.link(k_link).from);
                    }
                }
            }
            let cols: Vec<usize> = cover.iter().filter_map(|&v| x(model, v)).collect();
            if seen.insert(cols.clone()) {
                let terms = cols.into_iter().map(|c| (c, 1.0)).collect();
                implied(model, format!("imp_cover_{j}{sfx}"), terms, Sense::Ge, 1.0);
            }
        }
    }
    let _ = sp;
}

/// Nodes with a directed path to `target` over links accepted by `keep`,
/// `target` included.
fn upstream(graph: &DistributionGraph, target: usize, keep: impl Fn(usize) -> bool) -> BTreeSet<usize> {
    let mut seen = BTreeSet::from([target]);
    let mut stack = vec![target];
    while let Some(v) = stack.pop() {
        for l in graph.real_in_links(v) {
            if keep(l) && seen.insert(graph.link(l).from) {
                stack.push(graph.link(l).from);
            }
        }
    }
    seen
}

/// Turns a feasible assignment into a plan.
pub fn extract_plan(model: &MipModel, assignment: &[f64], eps: f64) -> Result<Plan> {
    if assignment.len() != model.variables.len() {
        return Err(Error::Infeasible(format!(
            "assignment has {} values for {} variables",
            assignment.len(),
            model.variables.len()
        )));
    }
    let mut x = assignment.to_vec();
    for (v, value) in model.variables.iter().zip(x.iter_mut()) {
        if v.kind == VarKind::Binary {
            if (*value - value.round()).abs() > eps {
                return Err(Error::Infeasible(format!("{} = {} is fractional", v.name, value)));
            }
            *value = value.round();
        } else if value.abs() <= eps {
            *value = 0.0;
        }
    }
    let bad = model.violations(&x, eps);
    if let Some(first) = bad.first() {
        let what = match first {
            Some(r) => model.constraints[*r].name.clone(),
            None => "a variable bound".to_string(),
        };
        return Err(Error::Infeasible(format!("assignment violates {} condition(s), first: {what}", bad.len())));
    }
    let split = model.variant.is_splittable();
    let mut sources = BTreeSet::new();
    let mut layers: Vec<RoutingLayer> =
        model.layers.iter().map(|l| RoutingLayer { period: l.period, ..RoutingLayer::default() }).collect();
    let layer_pos = |p: Option<usize>| model.layers.iter().position(|l| l.period == p);
    for (v, &value) in model.variables.iter().zip(&x) {
        let key = v.key;
        match key.class {
            VarClass::X | VarClass::L => {
                if value > 0.5 {
                    sources.insert(key.index);
                }
            }
            _ => {
                let Some(pos) = layer_pos(key.period) else { continue };
                let layer = &mut layers[pos];
                match key.class {
                    VarClass::Y if value > 0.5 => {
                        layer.relays.insert(key.index);
                    }
                    VarClass::U if value > 0.5 => {
                        layer.links.insert(key.index);
                    }
                    VarClass::F => {
                        layer.flows.insert(key.index, value);
                    }
                    VarClass::Fs => {
                        layer.source_flows.insert(key.index, value);
                    }
                    VarClass::Lambda => {
                        layer.lte_shares.insert(key.index, value);
                    }
                    _ => {}
                }
            }
        }
    }
    if split {
        for layer in &mut layers {
            let relays: Vec<usize> = layer
                .flows
                .iter()
                .filter(|(_, &f)| f > eps)
                .map(|(&l, _)| model.link_ends[l].0)
                .filter(|&v| v < model.households && !sources.contains(&v))
                .collect();
            layer.relays.extend(relays);
        }
    }
    Ok(Plan { variant: model.variant, period: model.period, sources, layers })
}

/// Assignment that encodes `plan` in `model`, for seeding and
/// cross-checks. Flows and shares are taken from the plan; `None` if the
/// plan references variables the model lacks.
pub fn assignment_from_plan(model: &MipModel, plan: &Plan) -> Option<Vec<f64>> {
    let mut x = vec![0.0; model.variables.len()];
    for &s in &plan.sources {
        x[model.source_var(s)?] = 1.0;
    }
    for layer in &plan.layers {
        let covered: Vec<Option<usize>> = if model.layers.iter().any(|l| l.period == layer.period) {
            vec![layer.period]
        } else if layer.period.is_none() {
            model.layers.iter().map(|l| l.period).collect()
        } else {
            return None;
        };
        for p in covered {
            for &r in &layer.relays {
                if let Some(c) = model.var(VarKey::new(VarClass::Y, r, p)) {
                    x[c] = 1.0;
                }
            }
            for &l in &layer.links {
                x[model.var(VarKey::new(VarClass::U, l, p))?] = 1.0;
            }
            for (&l, &f) in &layer.flows {
                x[model.var(VarKey::new(VarClass::F, l, p))?] = f;
            }
            for (&i, &f) in &layer.source_flows {
                x[model.var(VarKey::new(VarClass::Fs, i, p))?] = f;
            }
            for (&l, &s) in &layer.lte_shares {
                x[model.var(VarKey::new(VarClass::Lambda, l, p))?] = s;
            }
        }
    }
    for (c, v) in model.variables.iter().enumerate() {
        if v.key.class == VarClass::SourceFed {
            let from = model.link_ends[v.key.index].0;
            let uc = model.var(VarKey::new(VarClass::U, v.key.index, v.key.period))?;
            x[c] = x[uc] * model.source_var(from).map_or(0.0, |s| x[s]);
        }
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netgraph::{augment_virtual_source, build_wifi_graph, virtual_capacity};
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

    fn fixed(hops: Hops) -> Variant {
        Variant::fixed(hops, false)
    }

    #[test]
    fn line_has_four_links() {
        let (_, g) = line3();
        assert_eq!(g.links().len(), 4);
    }

    #[test]
    fn one_hop_counts() {
        let (s, g) = line3();
        let p = DemandProfile::fixed(vec![10.0; 3]);
        let m = build_model(&g, &p, fixed(Hops::One), &s, &SolverConfig::default()).unwrap();
        assert_eq!(m.len(), 1);
        assert_eq!(m[0].binary_count(), 7);
        assert_eq!(m[0].constraints.len(), 9);
        let fams: Vec<Family> = m[0].constraints.iter().map(|c| c.family).collect();
        assert_eq!(&fams[..3], &[Family::OutDegree; 3]);
        assert_eq!(&fams[3..6], &[Family::InLink; 3]);
        assert_eq!(&fams[6..], &[Family::LinkCapacity; 3]);
    }

    #[test]
    fn two_hop_counts() {
        let (s, g) = line3();
        let p = DemandProfile::fixed(vec![10.0; 3]);
        let m = &build_model(&g, &p, fixed(Hops::Two), &s, &SolverConfig::default()).unwrap()[0];
        assert_eq!(m.binary_count(), 10);
        assert_eq!(m.constraints.len(), 17);
    }

    #[test]
    fn splittable_counts() {
        let (s, g) = line3();
        let p = DemandProfile::fixed(vec![10.0; 3]);
        let g = augment_virtual_source(&g, virtual_capacity(&p.peak_demands()));
        let m = &build_model(&g, &p, fixed(Hops::Splittable), &s, &SolverConfig::default()).unwrap()[0];
        assert_eq!(m.binary_count(), 3);
        assert_eq!(m.continuous_count(), 7);
        assert_eq!(m.constraints.len(), 12);
    }

    #[test]
    fn mismatches_rejected() {
        let (s, g) = line3();
        let p = DemandProfile::fixed(vec![10.0; 3]);
        let cfg = SolverConfig::default();
        assert!(build_model(&g, &p, fixed(Hops::Splittable), &s, &cfg).is_err());
        let short = DemandProfile::fixed(vec![10.0; 2]);
        assert!(build_model(&g, &short, fixed(Hops::One), &s, &cfg).is_err());
        let low = SolverConfig { big_m: Some(1.0), ..cfg };
        assert!(build_model(&g, &p, fixed(Hops::Two), &s, &low).is_err());
    }

    #[test]
    fn semi_dynamic_single_period_matches_fixed() {
        let (s, g) = line3();
        let p = DemandProfile::new(vec![vec![10.0], vec![5.0], vec![15.0]]);
        let cfg = SolverConfig::default();
        for hops in [Hops::One, Hops::Two] {
            let a = &build_model(&g, &p, fixed(hops), &s, &cfg).unwrap()[0];
            let v = Variant { hops, lte: false, temporal: Temporal::SemiDynamic };
            let b = &build_model(&g, &p, v, &s, &cfg).unwrap()[0];
            assert_eq!(a.variables.len(), b.variables.len());
            assert_eq!(a.constraints.len(), b.constraints.len());
            for (ra, rb) in a.constraints.iter().zip(&b.constraints) {
                assert_eq!((ra.family, &ra.terms, ra.sense, ra.rhs), (rb.family, &rb.terms, rb.sense, rb.rhs));
            }
        }
    }

    #[test]
    fn dynamic_returns_one_model_per_period() {
        let (s, g) = line3();
        let p = DemandProfile::new(vec![vec![10.0, 0.0], vec![5.0, 5.0], vec![15.0, 0.0]]);
        let v = Variant { hops: Hops::One, lte: false, temporal: Temporal::Dynamic };
        let ms = build_model(&g, &p, v, &s, &SolverConfig::default()).unwrap();
        assert_eq!(ms.len(), 2);
        assert_eq!(ms[1].period, Some(1));
        // Inactive households need no in-link.
        let row = ms[1].constraints.iter().find(|c| c.name == "in_link_A_t1").unwrap();
        assert_eq!(row.rhs, 0.0);
        assert_eq!(row.terms.len(), 1);
    }

    #[test]
    fn extract_one_hop() {
        let (s, g) = line3();
        let p = DemandProfile::fixed(vec![10.0; 3]);
        let m = &build_model(&g, &p, fixed(Hops::One), &s, &SolverConfig::default()).unwrap()[0];
        let mut x = vec![0.0; m.variables.len()];
        x[m.var(VarKey::new(VarClass::X, 1, None)).unwrap()] = 1.0;
        let ba = g.find_link(1, 0).unwrap();
        let bc = g.find_link(1, 2).unwrap();
        x[m.var(VarKey::new(VarClass::U, ba, None)).unwrap()] = 1.0;
        x[m.var(VarKey::new(VarClass::U, bc, None)).unwrap()] = 1.0;
        let plan = extract_plan(m, &x, 1e-6).unwrap();
        assert_eq!(plan.sources, BTreeSet::from([1]));
        assert_eq!(plan.layers[0].links, BTreeSet::from([ba, bc]));
        assert_eq!(assignment_from_plan(m, &plan).unwrap(), x);

        let all: Vec<f64> = m.variables.iter().map(|v| if v.key.class == VarClass::X { 1.0 } else { 0.0 }).collect();
        let plan = extract_plan(m, &all, 1e-6).unwrap();
        assert_eq!(plan.sources.len(), 3);
        assert!(plan.layers[0].links.is_empty());

        x[m.var(VarKey::new(VarClass::U, bc, None)).unwrap()] = 0.0;
        assert!(matches!(extract_plan(m, &x, 1e-6), Err(Error::Infeasible(_))));
    }

    #[test]
    fn extract_splittable() {
        let s = Scenario::with_households(vec![Household::new("A", 0.0, 0.0), Household::new("B", 20.0, 0.0)]);
        let p = DemandProfile::fixed(vec![10.0, 15.0]);
        let g = augment_virtual_source(&build_wifi_graph(&s), virtual_capacity(&p.peak_demands()));
        let m = &build_model(&g, &p, fixed(Hops::Splittable), &s, &SolverConfig::default()).unwrap()[0];
        let mut x = vec![0.0; m.variables.len()];
        x[m.var(VarKey::new(VarClass::L, 0, None)).unwrap()] = 1.0;
        x[m.var(VarKey::new(VarClass::Fs, 0, None)).unwrap()] = 25.0;
        let ab = g.find_link(0, 1).unwrap();
        x[m.var(VarKey::new(VarClass::F, ab, None)).unwrap()] = 15.0;
        let plan = extract_plan(m, &x, 1e-6).unwrap();
        assert_eq!(plan.sources, BTreeSet::from([0]));
        assert_eq!(plan.layers[0].flows[&ab], 15.0);
        assert!(plan.layers[0].relays.is_empty());
    }

    #[test]
    fn lp_dump_lists_every_section() {
        let (s, g) = line3();
        let p = DemandProfile::fixed(vec![10.0; 3]);
        let m = &build_model(&g, &p, fixed(Hops::One), &s, &SolverConfig::default()).unwrap()[0];
        let text = m.to_lp_string();
        assert!(text.contains("Minimize\n obj: X_A + X_B + X_C"));
        assert!(text.contains(" in_link_B: u_A_B + u_C_B + X_B = 1"));
        assert_eq!(text.lines().filter(|l| l.starts_with(" u_") || l.starts_with(" X_")).count(), 7);
        assert!(text.ends_with("End\n"));
    }

    #[test]
    fn strengthening_keeps_known_solution() {
        let (s, g) = line3();
        let p = DemandProfile::fixed(vec![10.0; 3]);
        for hops in [Hops::One, Hops::Two] {
            let mut m = build_model(&g, &p, fixed(hops), &s, &SolverConfig::default()).unwrap().remove(0);
            let before = m.constraints.len();
            strengthen(&mut m, &g, &s);
            assert!(m.constraints.len() > before);
            let mut x = vec![0.0; m.variables.len()];
            x[m.var(VarKey::new(VarClass::X, 1, None)).unwrap()] = 1.0;
            for (a, b) in [(1, 0), (1, 2)] {
                let link = g.find_link(a, b).unwrap();
                x[m.var(VarKey::new(VarClass::U, link, None)).unwrap()] = 1.0;
                if let Some(c) = m.var(VarKey::new(VarClass::SourceFed, link, None)) {
                    x[c] = 1.0;
                }
            }
            assert!(m.is_feasible(&x, 1e-9), "{hops:?}");
        }
    }
}
