//! Linear programs solved by enumerating basic solutions.

use alloc::vec;
use alloc::vec::Vec;

use super::markov::{gauss_jordan, Dense};
use crate::optimize::{LinearProgram, Relation, Sense};

/// Optimal objective of a bounded LP with finite variable bounds, found by
/// solving every square subsystem of active constraints and keeping the best
/// feasible point. `None` if no vertex is feasible.
pub fn vertex_optimum(lp: &LinearProgram) -> Option<f64> {
    let n = lp.variables.len();
    let mut eq_rows: Vec<(Vec<f64>, f64)> = Vec::new();
    let mut rows: Vec<(Vec<f64>, f64)> = Vec::new();
    for c in &lp.constraints {
        let mut a = vec![0.0; n];
        for &(j, v) in &c.terms {
            a[j] += v;
        }
        if a.iter().all(|&x| x == 0.0) {
            let ok = match c.relation {
                Relation::Eq => c.rhs == 0.0,
                Relation::Le => c.rhs >= 0.0,
                Relation::Ge => c.rhs <= 0.0,
            };
            if !ok {
                return None;
            }
            continue;
        }
        match c.relation {
            Relation::Eq => eq_rows.push((a, c.rhs)),
            _ => rows.push((a, c.rhs)),
        }
    }
    for (j, v) in lp.variables.iter().enumerate() {
        assert!(v.lower.is_finite() && v.upper.is_finite(), "oracle needs finite bounds");
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        rows.push((e.clone(), v.lower));
        rows.push((e, v.upper));
    }
    // redundant equalities would make every square subsystem singular;
    // feasibility below is still checked against all of them
    let eq_rows = independent_rows(eq_rows);
    if eq_rows.len() > n {
        return None;
    }
    let mut objective = vec![0.0; n];
    for &(j, v) in &lp.objective {
        objective[j] += v;
    }
    let better = |a: f64, b: f64| match lp.sense {
        Sense::Maximize => a > b,
        Sense::Minimize => a < b,
    };
    let mut best: Option<f64> = None;
    let need = n - eq_rows.len();
    let mut pick: Vec<usize> = (0..need).collect();
    if need > rows.len() {
        return None;
    }
    loop {
        let a: Dense = eq_rows.iter().chain(pick.iter().map(|&k| &rows[k])).map(|r| r.0.clone()).collect();
        let b: Vec<f64> = eq_rows.iter().chain(pick.iter().map(|&k| &rows[k])).map(|r| r.1).collect();
        if let Some(x) = gauss_jordan(a, b) {
            if lp.max_violation(&x) <= 1e-9 {
                let v: f64 = objective.iter().zip(&x).map(|(c, x)| c * x).sum();
                if best.is_none_or(|b| better(v, b)) {
                    best = Some(v);
                }
            }
        }
        if !next_combination(&mut pick, rows.len()) {
            return best;
        }
    }
}

/// A maximal linearly independent subset of `rows`, in order.
fn independent_rows(rows: Vec<(Vec<f64>, f64)>) -> Vec<(Vec<f64>, f64)> {
    let mut echelon: Vec<(usize, Vec<f64>)> = Vec::new();
    let mut kept = Vec::new();
    for row in rows {
        let mut r = row.0.clone();
        for (p, e) in &echelon {
            let f = r[*p] / e[*p];
            if f != 0.0 {
                r.iter_mut().zip(e).for_each(|(x, y)| *x -= f * y);
            }
        }
        let scale = row.0.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let Some(p) = (0..r.len()).max_by(|&i, &j| r[i].abs().total_cmp(&r[j].abs())) else {
            continue;
        };
        if r[p].abs() > 1e-10 * scale {
            echelon.push((p, r));
            kept.push(row);
        }
    }
    kept
}

fn next_combination(pick: &mut [usize], n: usize) -> bool {
    let k = pick.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if pick[i] < n - k + i {
            pick[i] += 1;
            for j in i + 1..k {
                pick[j] = pick[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_corner_is_optimal() {
        let mut lp = LinearProgram::new(Sense::Maximize);
        let x = lp.add_var("x", 0.0, 2.0);
        let y = lp.add_var("y", 0.0, 3.0);
        lp.add_objective(x, 1.0);
        lp.add_objective(y, 1.0);
        lp.add_constraint("c", vec![(x, 1.0), (y, 2.0)], Relation::Le, 4.0);
        // x = 2, y = 1
        assert!((vertex_optimum(&lp).unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn empty_rows_are_ignored() {
        let mut lp = LinearProgram::new(Sense::Minimize);
        let x = lp.add_var("x", -1.0, 2.0);
        lp.add_objective(x, 1.0);
        lp.add_constraint("z", vec![], Relation::Eq, 0.0);
        assert_eq!(vertex_optimum(&lp), Some(-1.0));
    }

    #[test]
    fn parallel_equalities_are_redundant() {
        let mut lp = LinearProgram::new(Sense::Maximize);
        let x = lp.add_var("x", 0.0, 4.0);
        let y = lp.add_var("y", 0.0, 4.0);
        lp.add_objective(y, 1.0);
        lp.add_constraint("e1", vec![(x, 2.0)], Relation::Eq, 2.0);
        lp.add_constraint("e2", vec![(x, -3.0)], Relation::Eq, -3.0);
        assert_eq!(vertex_optimum(&lp), Some(4.0));
    }

    #[test]
    fn combinations_are_exhaustive() {
        let mut pick = vec![0, 1];
        let mut count = 1;
        while next_combination(&mut pick, 5) {
            count += 1;
        }
        assert_eq!(count, 10);
    }
}
