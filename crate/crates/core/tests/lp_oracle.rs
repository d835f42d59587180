//! Simplex results against brute-force vertex enumeration on small boxed LPs.

use proptest::prelude::*;
use skyrelay_core::formulation::Sense;
use skyrelay_core::solver::lp::{solve, LpProblem, LpRow, LpStatus};

const TOL: f64 = 1e-7;

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-10 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in 0..n {
            if r != col {
                let f = a[r][col] / a[col][col];
                for c in col..n {
                    a[r][c] -= f * a[col][c];
                }
                b[r] -= f * b[col];
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

fn feasible(lp: &LpProblem, x: &[f64]) -> bool {
    let bounds = x.iter().enumerate().all(|(i, &v)| v >= lp.lower[i] - TOL && v <= lp.upper[i] + TOL);
    bounds
        && lp.rows.iter().all(|r| {
            let lhs: f64 = r.terms.iter().map(|&(c, a)| a * x[c]).sum();
            match r.sense {
                Sense::Le => lhs <= r.rhs + TOL,
                Sense::Ge => lhs >= r.rhs - TOL,
                Sense::Eq => (lhs - r.rhs).abs() <= TOL,
            }
        })
}

/// Minimum over all feasible vertices, `None` when there are none.
fn vertex_optimum(lp: &LpProblem) -> Option<f64> {
    let n = lp.cost.len();
    let mut planes: Vec<(Vec<f64>, f64)> = Vec::new();
    for r in &lp.rows {
        let mut a = vec![0.0; n];
        for &(c, v) in &r.terms {
            a[c] += v;
        }
        planes.push((a, r.rhs));
    }
    for i in 0..n {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        planes.push((e.clone(), lp.lower[i]));
        planes.push((e, lp.upper[i]));
    }
    let mut best: Option<f64> = None;
    let mut pick = vec![0usize; n];
    fn rec(
        start: usize,
        depth: usize,
        pick: &mut Vec<usize>,
        planes: &[(Vec<f64>, f64)],
        lp: &LpProblem,
        best: &mut Option<f64>,
    ) {
        if depth == pick.len() {
            let a = pick.iter().map(|&p| planes[p].0.clone()).collect();
            let b = pick.iter().map(|&p| planes[p].1).collect();
            if let Some(x) = solve_square(a, b) {
                if feasible(lp, &x) {
                    let obj: f64 = lp.cost.iter().zip(&x).map(|(c, v)| c * v).sum();
                    *best = Some(best.map_or(obj, |b: f64| b.min(obj)));
                }
            }
            return;
        }
        for p in start..planes.len() {
            pick[depth] = p;
            rec(p + 1, depth + 1, pick, planes, lp, best);
        }
    }
    rec(0, 0, &mut pick, &planes, lp, &mut best);
    best
}

fn sense() -> impl Strategy<Value = Sense> {
    prop_oneof![4 => Just(Sense::Le), 3 => Just(Sense::Ge), 1 => Just(Sense::Eq)]
}

fn lp_strategy() -> impl Strategy<Value = LpProblem> {
    (2usize..=4).prop_flat_map(|n| {
        let row = (proptest::collection::vec(-3i32..=3, n), sense(), -4i32..=10).prop_map(|(coef, sense, rhs)| LpRow {
            terms: coef.iter().enumerate().filter(|(_, &a)| a != 0).map(|(c, &a)| (c, f64::from(a))).collect(),
            sense,
            rhs: f64::from(rhs),
        });
        (
            proptest::collection::vec(-5i32..=5, n),
            proptest::collection::vec((0i32..=2, 1i32..=4), n),
            proptest::collection::vec(row, 1..=4),
        )
            .prop_map(|(cost, bounds, rows)| LpProblem {
                cost: cost.into_iter().map(f64::from).collect(),
                lower: bounds.iter().map(|&(l, _)| f64::from(l)).collect(),
                upper: bounds.iter().map(|&(l, w)| f64::from(l + w)).collect(),
                rows,
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn simplex_matches_vertex_enumeration(lp in lp_strategy()) {
        let result = solve(&lp);
        match vertex_optimum(&lp) {
            None => prop_assert_eq!(result.status, LpStatus::Infeasible),
            Some(best) => {
                prop_assert_eq!(result.status, LpStatus::Optimal);
                prop_assert!((result.objective - best).abs() <= 1e-6, "simplex {} vs vertices {}", result.objective, best);
                prop_assert!(feasible(&lp, &result.x));
            }
        }
    }
}
