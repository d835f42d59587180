//! Depth-first branch-and-bound over the binary columns of a model.

use std::time::Instant;

use log::debug;

use super::lp::{self, LpProblem, LpRow, LpStatus};
use crate::formulation::{MipModel, SolverConfig, VarKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MipStatus {
    Optimal,
    Infeasible,
    NodeLimit,
    TimeLimit,
}

impl MipStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            MipStatus::Optimal => "optimal",
            MipStatus::Infeasible => "infeasible",
            MipStatus::NodeLimit => "node_limit",
            MipStatus::TimeLimit => "time_limit",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MipSolution {
    pub status: MipStatus,
    pub assignment: Option<Vec<f64>>,
    pub objective: Option<f64>,
    /// Proven lower bound on the optimum.
    pub bound: f64,
    pub nodes: usize,
}

struct Node {
    /// `(column, value)` fixings on top of the model bounds.
    fixes: Vec<(usize, f64)>,
    /// Relaxation value of the parent.
    bound: f64,
}

/// LP relaxation of `model` with the given extra fixings.
pub fn relaxation(model: &MipModel, fixes: &[(usize, f64)]) -> LpProblem {
    let mut lower: Vec<f64> = model.variables.iter().map(|v| v.lower).collect();
    let mut upper: Vec<f64> = model.variables.iter().map(|v| v.upper).collect();
    for &(c, v) in fixes {
        lower[c] = v;
        upper[c] = v;
    }
    let mut cost = vec![0.0; model.variables.len()];
    for &(c, a) in &model.objective {
        cost[c] += a;
    }
    LpProblem {
        cost,
        lower,
        upper,
        rows: model
            .constraints
            .iter()
            .map(|r| LpRow { terms: r.terms.clone(), sense: r.sense, rhs: r.rhs })
            .collect(),
    }
}

pub fn lp_solve(model: &MipModel, fixes: &[(usize, f64)]) -> lp::LpResult {
    lp::solve(&relaxation(model, fixes))
}

pub fn solve_mip(model: &MipModel, cfg: &SolverConfig) -> MipSolution {
    solve_mip_from(model, cfg, None)
}

/// Objective takes only integer values on integer-feasible points.
fn integral_objective(model: &MipModel) -> bool {
    model
        .objective
        .iter()
        .all(|&(c, a)| model.variables[c].kind == VarKind::Binary && a == a.round())
}

/// Re-solves with the binaries of `x` fixed so continuous columns are
/// consistent with exact 0/1 values.
fn polish(model: &MipModel, x: &[f64], eps: f64) -> Option<Vec<f64>> {
    let fixes: Vec<(usize, f64)> = model
        .variables
        .iter()
        .enumerate()
        .filter(|(_, v)| v.kind == VarKind::Binary)
        .map(|(c, _)| (c, x[c].round()))
        .collect();
    let r = lp_solve(model, &fixes);
    if r.status != LpStatus::Optimal {
        return None;
    }
    let mut y = r.x;
    for (c, v) in &fixes {
        y[*c] = *v;
    }
    model.is_feasible(&y, eps).then_some(y)
}

/// Branch-and-bound, optionally seeded with a known assignment. The
/// search order is fixed, so results do not depend on timing unless a
/// limit is hit.
pub fn solve_mip_from(model: &MipModel, cfg: &SolverConfig, start: Option<&[f64]>) -> MipSolution {
    solve_mip_bounded(model, cfg, start, f64::NEG_INFINITY)
}

/// As [`solve_mip_from`], given a lower bound on the optimum that is known
/// from elsewhere. The search ends once the incumbent reaches it.
pub fn solve_mip_bounded(model: &MipModel, cfg: &SolverConfig, start: Option<&[f64]>, lower: f64) -> MipSolution {
    let started = Instant::now();
    let eps = cfg.eps;
    let integral = integral_objective(model);
    let binaries: Vec<usize> = (0..model.variables.len())
        .filter(|&c| model.variables[c].kind == VarKind::Binary)
        .collect();
    let objective_cols: Vec<usize> = binaries
        .iter()
        .copied()
        .filter(|c| model.objective.iter().any(|&(o, _)| o == *c))
        .collect();

    let mut incumbent: Option<(Vec<f64>, f64)> = None;
    if let Some(x) = start {
        if x.len() == model.variables.len() && model.is_feasible(x, eps) {
            incumbent = Some((x.to_vec(), model.objective_value(x)));
        }
    }
    let cutoff = |inc: &Option<(Vec<f64>, f64)>| match inc {
        None => f64::INFINITY,
        Some((_, obj)) if integral => obj - 1.0 + 1e-6,
        Some((_, obj)) => obj - eps,
    };

    let mut stack = vec![Node { fixes: Vec::new(), bound: lower }];
    let mut nodes = 0usize;
    let mut root_bound = f64::NEG_INFINITY;
    let mut limit: Option<MipStatus> = None;
    while let Some(node) = stack.pop() {
        if node.bound >= cutoff(&incumbent) {
            continue;
        }
        if nodes >= cfg.node_limit {
            stack.push(node);
            limit = Some(MipStatus::NodeLimit);
            break;
        }
        if cfg.time_limit.is_some_and(|t| started.elapsed() >= t) {
            stack.push(node);
            limit = Some(MipStatus::TimeLimit);
            break;
        }
        nodes += 1;
        let r = lp_solve(model, &node.fixes);
        match r.status {
            LpStatus::Optimal => {}
            LpStatus::Infeasible => continue,
            LpStatus::Unbounded | LpStatus::NumericalFailure => {
                debug!("node {nodes}: relaxation status {:?}, branching blindly", r.status);
                if let Some(c) = binaries.iter().copied().find(|c| !node.fixes.iter().any(|f| f.0 == *c)) {
                    for v in [1.0, 0.0] {
                        let mut fixes = node.fixes.clone();
                        fixes.push((c, v));
                        stack.push(Node { fixes, bound: node.bound });
                    }
                }
                continue;
            }
        }
        if node.fixes.is_empty() {
            root_bound = r.objective;
        }
        debug_assert!(r.objective >= root_bound - 1e-6, "child bound below root");
        debug!("node {nodes}: depth {} lp {:.6} incumbent {:?}", node.fixes.len(), r.objective, incumbent.as_ref().map(|i| i.1));
        if r.objective >= cutoff(&incumbent) {
            continue;
        }
        // Most fractional binary, lowest index on ties; objective columns
        // take priority.
        let most_fractional = |cols: &[usize]| {
            let mut branch: Option<(usize, f64)> = None;
            for &c in cols {
                let v = r.x[c];
                let frac = (v - v.floor()).min(v.ceil() - v);
                if frac > eps && branch.is_none_or(|(_, f)| frac > f + 1e-12) {
                    branch = Some((c, frac));
                }
            }
            branch
        };
        let branch = most_fractional(&objective_cols).or_else(|| most_fractional(&binaries));
        match branch {
            None => {
                if let Some(x) = polish(model, &r.x, eps) {
                    let obj = model.objective_value(&x);
                    if incumbent.as_ref().is_none_or(|(_, o)| obj < *o - eps) {
                        debug!("node {nodes}: incumbent {obj}");
                        incumbent = Some((x, obj));
                        if obj <= lower + eps {
                            stack.clear();
                        }
                        // Restart from the most promising open node.
                        stack.sort_by(|a, b| b.bound.total_cmp(&a.bound));
                    }
                }
            }
            Some((c, _)) => {
                let v = r.x[c];
                let near = if v >= 0.5 { 1.0 } else { 0.0 };
                for value in [1.0 - near, near] {
                    let mut fixes = node.fixes.clone();
                    fixes.push((c, value));
                    stack.push(Node { fixes, bound: r.objective });
                }
            }
        }
    }

    let open_bound = stack.iter().map(|n| n.bound).fold(f64::INFINITY, f64::min);
    match (limit, incumbent) {
        (None, Some((x, obj))) => MipSolution { status: MipStatus::Optimal, assignment: Some(x), objective: Some(obj), bound: obj, nodes },
        (None, None) => MipSolution { status: MipStatus::Infeasible, assignment: None, objective: None, bound: f64::INFINITY, nodes },
        (Some(status), inc) => {
            let obj = inc.as_ref().map(|i| i.1);
            let mut bound = open_bound.max(root_bound).min(obj.unwrap_or(f64::INFINITY));
            if integral {
                bound = (bound - 1e-6).ceil();
            }
            MipSolution { status, objective: obj, assignment: inc.map(|i| i.0), bound, nodes }
        }
    }
}

/// Next `k`-subset of `0..n` in lexicographic order.
fn next_subset(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    for i in (0..k).rev() {
        if idx[i] < n - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1usize, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// Decides a model whose objective counts binary columns by trying every
/// placement of fewer columns than `incumbent` uses, smallest first,
/// starting from `lower`. Returns `None` when that takes more than
/// `max_placements` subproblems or a subproblem stops at a limit.
pub fn solve_by_placement(
    model: &MipModel,
    cfg: &SolverConfig,
    incumbent: &[f64],
    lower: f64,
    max_placements: usize,
) -> Option<MipSolution> {
    let started = Instant::now();
    let counting = model.objective.iter().all(|&(c, a)| a == 1.0 && model.variables[c].kind == VarKind::Binary);
    if !counting || !model.is_feasible(incumbent, cfg.eps) {
        return None;
    }
    let mut cols: Vec<usize> = model.objective.iter().map(|&(c, _)| c).collect();
    cols.sort_unstable();
    cols.dedup();
    let n = cols.len();
    let best = model.objective_value(incumbent).round() as usize;
    let first = lower.max(0.0).ceil() as usize;
    if (first..best).map(|k| binomial(n, k)).fold(0usize, usize::saturating_add) > max_placements {
        return None;
    }
    let mut nodes = 0;
    for k in first..best {
        let mut idx: Vec<usize> = (0..k).collect();
        loop {
            if cfg.time_limit.is_some_and(|t| started.elapsed() >= t) {
                return None;
            }
            let mut fixes: Vec<(usize, f64)> = cols.iter().map(|&c| (c, 0.0)).collect();
            for &i in &idx {
                fixes[i].1 = 1.0;
            }
            nodes += 1;
            if lp_solve(model, &fixes).status == LpStatus::Optimal {
                let mut sub = model.clone();
                for &(c, v) in &fixes {
                    sub.variables[c].lower = v;
                    sub.variables[c].upper = v;
                }
                let sol = solve_mip_bounded(&sub, cfg, None, k as f64);
                nodes += sol.nodes;
                match sol.status {
                    MipStatus::Optimal => {
                        return Some(MipSolution { nodes, bound: k as f64, ..sol });
                    }
                    MipStatus::Infeasible => {}
                    _ => return None,
                }
            }
            if !next_subset(&mut idx, n) {
                break;
            }
        }
    }
    let obj = model.objective_value(incumbent);
    Some(MipSolution { status: MipStatus::Optimal, assignment: Some(incumbent.to_vec()), objective: Some(obj), bound: obj, nodes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::demand::DemandProfile;
    use crate::formulation::build_model;
    use crate::netgraph::build_wifi_graph;
    use crate::plan::{Hops, Variant};
    use crate::scenario::{Household, Scenario};

    fn line3() -> (Scenario, crate::netgraph::DistributionGraph) {
        let s = Scenario::with_households(vec![
            Household::new("A", 0.0, 0.0),
            Household::new("B", 30.0, 0.0),
            Household::new("C", 90.0, 0.0),
        ]);
        let g = build_wifi_graph(&s);
        (s, g)
    }

    #[test]
    fn line_one_hop_needs_one_antenna() {
        let (s, g) = line3();
        let p = DemandProfile::fixed(vec![10.0; 3]);
        let cfg = SolverConfig { strengthen: false, ..SolverConfig::default() };
        let m = &build_model(&g, &p, Variant::fixed(Hops::One, false), &s, &cfg).unwrap()[0];
        let relaxed = lp_solve(m, &[]);
        assert_eq!(relaxed.status, LpStatus::Optimal);
        assert!(relaxed.objective <= 1.0 + 1e-9);
        let sol = solve_mip(m, &cfg);
        assert_eq!(sol.status, MipStatus::Optimal);
        assert_eq!(sol.objective, Some(1.0));
        let x = sol.assignment.unwrap();
        assert_eq!(x[1], 1.0, "middle node is the source");
    }

    #[test]
    fn edgeless_graph_needs_every_node() {
        let s = Scenario::with_households(
            (0..4).map(|i| Household::new(format!("h{i}"), 1000.0 * i as f64, 0.0)).collect(),
        );
        let g = build_wifi_graph(&s);
        let p = DemandProfile::fixed(vec![10.0; 4]);
        let cfg = SolverConfig::default();
        let m = &build_model(&g, &p, Variant::fixed(Hops::One, false), &s, &cfg).unwrap()[0];
        assert_eq!(solve_mip(m, &cfg).objective, Some(4.0));
    }

    #[test]
    fn infeasible_fixings_and_known_point() {
        let (s, g) = line3();
        let p = DemandProfile::fixed(vec![10.0; 3]);
        let cfg = SolverConfig::default();
        let m = &build_model(&g, &p, Variant::fixed(Hops::One, false), &s, &cfg).unwrap()[0];
        // X_A = 0 with every in-link of A closed violates its in-link row.
        let ba = g.find_link(1, 0).unwrap();
        let u_ba = m.var(crate::formulation::VarKey::new(crate::formulation::VarClass::U, ba, None)).unwrap();
        assert_eq!(lp_solve(m, &[(0, 0.0), (u_ba, 0.0)]).status, LpStatus::Infeasible);
        // Fully fixed at all-sources.
        let fixes: Vec<(usize, f64)> = (0..m.variables.len()).map(|c| (c, if c < 3 { 1.0 } else { 0.0 })).collect();
        let r = lp_solve(m, &fixes);
        assert_eq!(r.status, LpStatus::Optimal);
        assert_eq!(r.objective, 3.0);
    }

    #[test]
    fn subsets_are_listed_in_order() {
        let mut idx = vec![0, 1];
        let mut seen = vec![idx.clone()];
        while next_subset(&mut idx, 4) {
            seen.push(idx.clone());
        }
        assert_eq!(seen, [[0, 1], [0, 2], [0, 3], [1, 2], [1, 3], [2, 3]]);
        assert_eq!(binomial(23, 2), 253);
        assert_eq!(binomial(5, 0), 1);
    }

    #[test]
    fn placement_search_finds_the_single_source() {
        let (s, g) = line3();
        let p = DemandProfile::fixed(vec![10.0; 3]);
        let cfg = SolverConfig::default();
        let m = &build_model(&g, &p, Variant::fixed(Hops::One, false), &s, &cfg).unwrap()[0];
        let all = solve_mip(m, &cfg).assignment.unwrap();
        let every: Vec<(usize, f64)> = (0..m.variables.len()).map(|c| (c, if c < 3 { 1.0 } else { 0.0 })).collect();
        let three = lp_solve(m, &every).x;
        let sol = solve_by_placement(m, &cfg, &three, 0.0, 100).unwrap();
        assert_eq!(sol.status, MipStatus::Optimal);
        assert_eq!(sol.objective, Some(1.0));
        assert_eq!(sol.assignment.unwrap()[1], 1.0);
        assert!(solve_by_placement(m, &cfg, &three, 0.0, 2).is_none(), "over the placement budget");
        let kept = solve_by_placement(m, &cfg, &all, 1.0, 100).unwrap();
        assert_eq!(kept.objective, Some(1.0));
    }
}
