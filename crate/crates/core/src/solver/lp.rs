//! Dense bounded-variable two-phase primal simplex.

use crate::formulation::Sense;

/// Linear program `min c·x` over rows and finite lower bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    pub cost: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub rows: Vec<LpRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpRow {
    pub terms: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// Iteration limit or a final solution that fails the feasibility
    /// re-check.
    NumericalFailure,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpResult {
    pub status: LpStatus,
    pub objective: f64,
    pub x: Vec<f64>,
    pub iterations: usize,
}

impl LpResult {
    fn status(status: LpStatus, iterations: usize) -> Self {
        Self { status, objective: f64::NAN, x: Vec::new(), iterations }
    }
}

const PIVOT_TOL: f64 = 1e-7;
const PRICE_TOL: f64 = 1e-9;
const FEAS_TOL: f64 = 1e-9;
const CHECK_TOL: f64 = 1e-6;
const DEGENERATE_SWITCH: usize = 50;

pub fn solve(lp: &LpProblem) -> LpResult {
    let n = lp.cost.len();
    debug_assert_eq!(lp.lower.len(), n);
    debug_assert_eq!(lp.upper.len(), n);
    if lp.lower.iter().any(|l| !l.is_finite()) {
        return LpResult::status(LpStatus::NumericalFailure, 0);
    }
    let Some(pre) = presolve(lp) else {
        return LpResult::status(LpStatus::Infeasible, 0);
    };
    let mut result = if pre.rows.is_empty() {
        // Every column sits at the bound favoured by its cost.
        let mut x = pre.lower.clone();
        for (k, &j) in pre.cols.iter().enumerate() {
            let c = lp.cost[j];
            if c < 0.0 {
                if !pre.upper[k].is_finite() {
                    return LpResult::status(LpStatus::Unbounded, 0);
                }
                x[k] = pre.upper[k];
            }
        }
        let mut full = pre.fixed.clone();
        for (k, &j) in pre.cols.iter().enumerate() {
            full[j] = x[k];
        }
        LpResult { status: LpStatus::Optimal, objective: 0.0, x: full, iterations: 0 }
    } else {
        let mut t = Tableau::new(lp, &pre);
        let r = t.run();
        if r != LpStatus::Optimal {
            return LpResult::status(r, t.iterations);
        }
        let mut full = pre.fixed.clone();
        let vals = t.structural_values();
        for (k, &j) in pre.cols.iter().enumerate() {
            full[j] = vals[k];
        }
        LpResult { status: LpStatus::Optimal, objective: 0.0, x: full, iterations: t.iterations }
    };
    result.objective = lp.cost.iter().zip(&result.x).map(|(c, x)| c * x).sum();
    if !check(lp, &result.x) {
        return LpResult::status(LpStatus::NumericalFailure, result.iterations);
    }
    result
}

fn check(lp: &LpProblem, x: &[f64]) -> bool {
    for j in 0..x.len() {
        if x[j] < lp.lower[j] - CHECK_TOL || x[j] > lp.upper[j] + CHECK_TOL || !x[j].is_finite() {
            return false;
        }
    }
    lp.rows.iter().all(|row| {
        let lhs: f64 = row.terms.iter().map(|&(c, a)| a * x[c]).sum();
        let tol = CHECK_TOL * (1.0 + row.rhs.abs());
        match row.sense {
            Sense::Le => lhs <= row.rhs + tol,
            Sense::Ge => lhs >= row.rhs - tol,
            Sense::Eq => (lhs - row.rhs).abs() <= tol,
        }
    })
}

/// Reduced problem after removing fixed columns and turning single-term
/// rows into bounds.
struct Presolved {
    /// Original index of each kept column.
    cols: Vec<usize>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    /// Rows over kept columns (reduced indices), rhs adjusted.
    rows: Vec<LpRow>,
    /// Full-length vector holding the values of removed columns.
    fixed: Vec<f64>,
}

fn presolve(lp: &LpProblem) -> Option<Presolved> {
    let n = lp.cost.len();
    let mut lower = lp.lower.clone();
    let mut upper = lp.upper.clone();
    let mut live = vec![true; lp.rows.len()];
    loop {
        let mut changed = false;
        for (r, row) in lp.rows.iter().enumerate() {
            if !live[r] {
                continue;
            }
            let mut rhs = row.rhs;
            let mut single: Option<(usize, f64)> = None;
            let mut count = 0;
            for &(c, a) in &row.terms {
                if a == 0.0 {
                    continue;
                }
                if upper[c] - lower[c] <= 0.0 {
                    rhs -= a * lower[c];
                } else {
                    count += 1;
                    single = Some((c, a));
                }
            }
            let tol = FEAS_TOL * (1.0 + rhs.abs()).max(1.0) * 10.0;
            match (count, single) {
                (0, _) => {
                    let ok = match row.sense {
                        Sense::Le => 0.0 <= rhs + tol,
                        Sense::Ge => 0.0 >= rhs - tol,
                        Sense::Eq => rhs.abs() <= tol,
                    };
                    if !ok {
                        return None;
                    }
                    live[r] = false;
                }
                (1, Some((c, a))) => {
                    let v = rhs / a;
                    let (lo, hi) = match (row.sense, a > 0.0) {
                        (Sense::Eq, _) => (v, v),
                        (Sense::Le, true) | (Sense::Ge, false) => (f64::NEG_INFINITY, v),
                        (Sense::Le, false) | (Sense::Ge, true) => (v, f64::INFINITY),
                    };
                    if lo > lower[c] {
                        lower[c] = lo;
                    }
                    if hi < upper[c] {
                        upper[c] = hi;
                    }
                    if lower[c] > upper[c] {
                        if lower[c] - upper[c] > 1e-7 * (1.0 + upper[c].abs()) {
                            return None;
                        }
                        let mid = if lo == hi { lo } else { upper[c] };
                        lower[c] = mid;
                        upper[c] = mid;
                    }
                    live[r] = false;
                    changed = true;
                }
                _ => {}
            }
        }
        if !changed {
            break;
        }
    }
    let mut map = vec![usize::MAX; n];
    let mut cols = Vec::new();
    let mut fixed = vec![0.0; n];
    for j in 0..n {
        if upper[j] - lower[j] <= 0.0 {
            fixed[j] = lower[j];
        } else {
            map[j] = cols.len();
            cols.push(j);
        }
    }
    let mut rows = Vec::new();
    for (r, row) in lp.rows.iter().enumerate() {
        if !live[r] {
            continue;
        }
        let mut rhs = row.rhs;
        let mut terms = Vec::with_capacity(row.terms.len());
        for &(c, a) in &row.terms {
            if a == 0.0 {
                continue;
            }
            if map[c] == usize::MAX {
                rhs -= a * fixed[c];
            } else {
                terms.push((map[c], a));
            }
        }
        rows.push(LpRow { terms, sense: row.sense, rhs });
    }
    Some(Presolved {
        lower: cols.iter().map(|&j| lower[j]).collect(),
        upper: cols.iter().map(|&j| upper[j]).collect(),
        cols,
        rows,
        fixed,
    })
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum At {
    Lower,
    Upper,
    Basic,
}

/// Tableau over shifted columns `x' = x - lower` in `[0, range]`.
struct Tableau {
    m: usize,
    width: usize,
    /// Structural columns come first, then slacks, then artificials.
    structural: usize,
    first_artificial: usize,
    a: Vec<f64>,
    beta: Vec<f64>,
    basis: Vec<usize>,
    state: Vec<At>,
    range: Vec<f64>,
    cost: Vec<f64>,
    lower: Vec<f64>,
    iterations: usize,
    max_iterations: usize,
}

impl Tableau {
    fn new(lp: &LpProblem, pre: &Presolved) -> Self {
        let n = pre.cols.len();
        let m = pre.rows.len();
        // Scale rows to unit max coefficient, then sign them so that a
        // slack or an artificial can start basic with a non-negative value.
        struct Norm {
            sign: f64,
            rhs: f64,
            slack: Option<f64>,
            artificial: bool,
        }
        let mut norms = Vec::with_capacity(m);
        let scales: Vec<f64> = pre
            .rows
            .iter()
            .map(|row| 1.0 / row.terms.iter().fold(1e-12f64, |acc, &(_, a)| acc.max(a.abs())))
            .collect();
        for (row, scale) in pre.rows.iter().zip(&scales) {
            let shifted = scale * (row.rhs - row.terms.iter().map(|&(c, a)| a * pre.lower[c]).sum::<f64>());
            let norm = match row.sense {
                Sense::Le if shifted >= 0.0 => Norm { sign: 1.0, rhs: shifted, slack: Some(1.0), artificial: false },
                Sense::Le => Norm { sign: -1.0, rhs: -shifted, slack: Some(-1.0), artificial: true },
                Sense::Ge if shifted <= 0.0 => Norm { sign: -1.0, rhs: -shifted, slack: Some(1.0), artificial: false },
                Sense::Ge => Norm { sign: 1.0, rhs: shifted, slack: Some(-1.0), artificial: true },
                Sense::Eq if shifted >= 0.0 => Norm { sign: 1.0, rhs: shifted, slack: None, artificial: true },
                Sense::Eq => Norm { sign: -1.0, rhs: -shifted, slack: None, artificial: true },
            };
            norms.push(norm);
        }
        let slacks = norms.iter().filter(|r| r.slack.is_some()).count();
        let arts = norms.iter().filter(|r| r.artificial).count();
        let first_artificial = n + slacks;
        let width = first_artificial + arts;
        let mut a = vec![0.0; m * width];
        let mut basis = vec![0; m];
        let mut state = vec![At::Lower; width];
        let mut range = vec![f64::INFINITY; width];
        for k in 0..n {
            range[k] = pre.upper[k] - pre.lower[k];
        }
        let mut beta = vec![0.0; m];
        let (mut s, mut art) = (n, first_artificial);
        for (r, (row, norm)) in pre.rows.iter().zip(&norms).enumerate() {
            let base = r * width;
            for &(c, v) in &row.terms {
                a[base + c] += norm.sign * scales[r] * v;
            }
            beta[r] = norm.rhs;
            if let Some(sv) = norm.slack {
                a[base + s] = sv;
                if !norm.artificial {
                    basis[r] = s;
                    state[s] = At::Basic;
                }
                s += 1;
            }
            if norm.artificial {
                a[base + art] = 1.0;
                basis[r] = art;
                state[art] = At::Basic;
                art += 1;
            }
        }
        let mut cost = vec![0.0; width];
        for (k, &j) in pre.cols.iter().enumerate() {
            cost[k] = lp.cost[j];
        }
        Self {
            m,
            width,
            structural: n,
            first_artificial,
            a,
            state,
            range,
            cost,
            lower: pre.lower.clone(),
            beta,
            basis,
            iterations: 0,
            max_iterations: 50 * (m + width) + 1000,
        }
    }

    fn reduced_costs(&self, cost: &[f64]) -> Vec<f64> {
        let mut d = cost.to_vec();
        for r in 0..self.m {
            let cb = cost[self.basis[r]];
            if cb != 0.0 {
                let row = &self.a[r * self.width..(r + 1) * self.width];
                for (dj, &v) in d.iter_mut().zip(row) {
                    *dj -= cb * v;
                }
            }
        }
        for r in 0..self.m {
            d[self.basis[r]] = 0.0;
        }
        d
    }

    fn run(&mut self) -> LpStatus {
        if self.first_artificial < self.width {
            let mut phase1 = vec![0.0; self.width];
            for c in phase1.iter_mut().skip(self.first_artificial) {
                *c = 1.0;
            }
            let mut d = self.reduced_costs(&phase1);
            match self.iterate(&mut d, true) {
                LpStatus::Optimal => {}
                LpStatus::Unbounded => return LpStatus::NumericalFailure,
                other => return other,
            }
            let infeas: f64 =
                (0..self.m).filter(|&r| self.basis[r] >= self.first_artificial).map(|r| self.beta[r]).sum();
            let scale = 1.0 + self.beta.iter().fold(0.0f64, |acc, b| acc.max(b.abs()));
            if infeas > 1e-7 * scale {
                return LpStatus::Infeasible;
            }
            self.drive_out_artificials();
            for j in self.first_artificial..self.width {
                self.range[j] = 0.0;
            }
        }
        let cost = self.cost.clone();
        let mut d = self.reduced_costs(&cost);
        self.iterate(&mut d, false)
    }

    fn drive_out_artificials(&mut self) {
        for r in 0..self.m {
            if self.basis[r] < self.first_artificial {
                continue;
            }
            let row = &self.a[r * self.width..r * self.width + self.first_artificial];
            let mut best: Option<(usize, f64)> = None;
            for (j, &v) in row.iter().enumerate() {
                if self.state[j] != At::Basic && v.abs() > 1e-7 && best.is_none_or(|(_, b)| v.abs() > b) {
                    best = Some((j, v.abs()));
                }
            }
            if let Some((q, _)) = best {
                let value = if self.state[q] == At::Upper { self.range[q] } else { 0.0 };
                let leaving = self.basis[r];
                self.pivot(r, q, None);
                self.beta[r] = value;
                self.state[leaving] = At::Lower;
                self.range[leaving] = 0.0;
            }
        }
    }

    /// Eliminates column `q` from all rows but `r`; updates `d` too.
    fn pivot(&mut self, r: usize, q: usize, d: Option<&mut Vec<f64>>) {
        let w = self.width;
        let p = self.a[r * w + q];
        let inv = 1.0 / p;
        let mut nz: Vec<usize> = Vec::with_capacity(w);
        {
            let row = &mut self.a[r * w..(r + 1) * w];
            for (j, v) in row.iter_mut().enumerate() {
                if *v != 0.0 {
                    *v *= inv;
                    if v.abs() < 1e-13 {
                        *v = 0.0;
                    } else {
                        nz.push(j);
                    }
                }
            }
            row[q] = 1.0;
        }
        let (head, tail) = self.a.split_at_mut(r * w);
        let (prow, rest) = tail.split_at_mut(w);
        let update = |row: &mut [f64]| {
            let f = row[q];
            if f != 0.0 {
                for &j in &nz {
                    row[j] -= f * prow[j];
                }
                row[q] = 0.0;
            }
        };
        head.chunks_exact_mut(w).for_each(update);
        rest.chunks_exact_mut(w).for_each(update);
        if let Some(d) = d {
            let f = d[q];
            if f != 0.0 {
                for &j in &nz {
                    d[j] -= f * prow[j];
                }
                d[q] = 0.0;
            }
        }
        let leaving = self.basis[r];
        self.basis[r] = q;
        self.state[q] = At::Basic;
        if self.state[leaving] == At::Basic {
            self.state[leaving] = At::Lower;
        }
    }

    fn iterate(&mut self, d: &mut Vec<f64>, phase1: bool) -> LpStatus {
        let mut degenerate = 0usize;
        loop {
            if self.iterations >= self.max_iterations {
                return LpStatus::NumericalFailure;
            }
            let bland = degenerate > DEGENERATE_SWITCH;
            let limit = if phase1 { self.width } else { self.first_artificial };
            let mut entering: Option<(usize, f64)> = None;
            for j in 0..limit {
                let dir = match self.state[j] {
                    At::Basic => continue,
                    At::Lower if d[j] < -PRICE_TOL => 1.0,
                    At::Upper if d[j] > PRICE_TOL => -1.0,
                    _ => continue,
                };
                if self.range[j] <= 0.0 {
                    continue;
                }
                if bland {
                    entering = Some((j, dir));
                    break;
                }
                if entering.is_none_or(|(e, _)| d[j].abs() > d[e].abs()) {
                    entering = Some((j, dir));
                }
            }
            let Some((q, dir)) = entering else {
                return LpStatus::Optimal;
            };
            self.iterations += 1;

            // Ratio test with Harris-style tolerance.
            let w = self.width;
            let ratio = |r: usize, relaxed: f64| -> Option<f64> {
                let alpha = self.a[r * w + q] * dir;
                let b = self.basis[r];
                if alpha > PIVOT_TOL {
                    Some((self.beta[r] + relaxed).max(0.0) / alpha)
                } else if alpha < -PIVOT_TOL && self.range[b].is_finite() {
                    Some((self.range[b] - self.beta[r] + relaxed).max(0.0) / -alpha)
                } else {
                    None
                }
            };
            let mut theta_max = f64::INFINITY;
            for r in 0..self.m {
                if let Some(t) = ratio(r, FEAS_TOL) {
                    theta_max = theta_max.min(t);
                }
            }
            let mut leave: Option<(usize, f64)> = None;
            if theta_max.is_finite() {
                let mut best_alpha = 0.0;
                for r in 0..self.m {
                    if let Some(t) = ratio(r, 0.0) {
                        if t <= theta_max {
                            let alpha = self.a[r * w + q].abs();
                            let better = if bland {
                                leave.is_none_or(|(lr, _)| self.basis[r] < self.basis[lr])
                            } else {
                                alpha > best_alpha
                            };
                            if better {
                                best_alpha = alpha;
                                leave = Some((r, t));
                            }
                        }
                    }
                }
            }
            let flip = self.range[q];
            let step = leave.map_or(f64::INFINITY, |(_, t)| t);
            if flip <= step {
                if !flip.is_finite() {
                    return LpStatus::Unbounded;
                }
                for r in 0..self.m {
                    let alpha = self.a[r * w + q];
                    if alpha != 0.0 {
                        self.beta[r] -= alpha * flip * dir;
                    }
                }
                self.state[q] = if dir > 0.0 { At::Upper } else { At::Lower };
                degenerate = 0;
                continue;
            }
            let (r, theta) = leave.expect("finite step has a leaving row");
            if theta <= FEAS_TOL {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            for i in 0..self.m {
                let alpha = self.a[i * w + q];
                if alpha != 0.0 {
                    self.beta[i] -= alpha * theta * dir;
                }
            }
            let entering_value = if dir > 0.0 { theta } else { self.range[q] - theta };
            let leaving = self.basis[r];
            let alpha_r = self.a[r * w + q] * dir;
            let leaving_to_upper = alpha_r < 0.0;
            self.pivot(r, q, Some(d));
            self.beta[r] = entering_value;
            self.state[leaving] = if leaving_to_upper { At::Upper } else { At::Lower };
        }
    }

    fn structural_values(&self) -> Vec<f64> {
        let mut x: Vec<f64> = (0..self.structural)
            .map(|j| match self.state[j] {
                At::Upper => self.range[j],
                _ => 0.0,
            })
            .collect();
        for r in 0..self.m {
            let b = self.basis[r];
            if b < self.structural {
                x[b] = self.beta[r].clamp(0.0, self.range[b]);
            }
        }
        for (v, lo) in x.iter_mut().zip(&self.lower) {
            *v += lo;
        }
        x
    }
}
