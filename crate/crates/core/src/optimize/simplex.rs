//! Dense bounded-variable primal simplex with duals.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::{LinearProgram, LpError, LpSolution, LpSolver, Relation, Sense};

/// Degenerate pivots tolerated before switching from Dantzig pricing to
/// Bland's rule for the rest of the phase.
const DEGENERATE_SWITCH: usize = 50;

/// Reduced costs are recomputed from scratch this often to shed drift.
const REPRICE_EVERY: usize = 64;

/// Dense tableau simplex. Pricing is Dantzig's largest reduced cost with
/// lowest-index ties, falling back to Bland's rule once degenerate pivots
/// pile up, so results are deterministic.
#[derive(Debug, Clone, Copy)]
pub struct DenseSimplex {
    pub tol: f64,
    pub max_iterations: Option<usize>,
}

impl Default for DenseSimplex {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_iterations: None,
        }
    }
}

/// How an original variable maps onto internal nonnegative columns.
#[derive(Debug, Clone, Copy)]
enum VarMap {
    /// `x = l + col`
    Shift(usize, f64),
    /// `x = u − col`
    Mirror(usize, f64),
    /// `x = pos − neg`
    Split(usize, usize),
}

struct Tableau {
    m: usize,
    n: usize,
    a: Vec<f64>,
    upper: Vec<f64>,
    basis: Vec<usize>,
    at_upper: Vec<bool>,
    xb: Vec<f64>,
    d: Vec<f64>,
    tol: f64,
}

enum Step {
    Optimal,
    Moved { degenerate: bool },
}

impl Tableau {
    fn at(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.n + j]
    }

    fn price(&mut self, cost: &[f64]) {
        for j in 0..self.n {
            let mut dj = cost[j];
            for i in 0..self.m {
                let a = self.a[i * self.n + j];
                if a != 0.0 {
                    dj -= cost[self.basis[i]] * a;
                }
            }
            self.d[j] = dj;
        }
        for &b in &self.basis {
            self.d[b] = 0.0;
        }
    }

    fn is_basic(&self) -> Vec<bool> {
        let mut basic = vec![false; self.n];
        self.basis.iter().for_each(|&b| basic[b] = true);
        basic
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let n = self.n;
        let p = self.a[r * n + j];
        for k in 0..n {
            self.a[r * n + k] /= p;
        }
        self.a[r * n + j] = 1.0;
        let pivot_row: Vec<f64> = self.a[r * n..(r + 1) * n].to_vec();
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = self.a[i * n + j];
            if f == 0.0 {
                continue;
            }
            let row = &mut self.a[i * n..(i + 1) * n];
            for (x, &pr) in row.iter_mut().zip(&pivot_row) {
                if pr != 0.0 {
                    *x -= f * pr;
                }
            }
            row[j] = 0.0;
        }
        let f = self.d[j];
        if f != 0.0 {
            for (x, &pr) in self.d.iter_mut().zip(&pivot_row) {
                if pr != 0.0 {
                    *x -= f * pr;
                }
            }
            self.d[j] = 0.0;
        }
        self.basis[r] = j;
    }

    fn step(&mut self, bland: bool) -> Result<Step, LpError> {
        let basic = self.is_basic();
        let tol = self.tol;
        let mut entering: Option<(usize, f64)> = None;
        for j in 0..self.n {
            if basic[j] || self.upper[j] <= 0.0 {
                continue;
            }
            let dj = self.d[j];
            let eligible = if self.at_upper[j] { dj < -tol } else { dj > tol };
            if !eligible {
                continue;
            }
            if bland {
                entering = Some((j, dj));
                break;
            }
            if entering.map_or(true, |(_, best)| dj.abs() > best.abs()) {
                entering = Some((j, dj));
            }
        }
        let Some((j, _)) = entering else {
            return Ok(Step::Optimal);
        };
        let dir = if self.at_upper[j] { -1.0 } else { 1.0 };
        // (row, step, leaves at upper)
        let mut best: Option<(usize, f64, bool)> = None;
        for i in 0..self.m {
            let alpha = dir * self.at(i, j);
            let (limit, to_upper) = if alpha > tol {
                (self.xb[i].max(0.0) / alpha, false)
            } else if alpha < -tol {
                let ub = self.upper[self.basis[i]];
                if !ub.is_finite() {
                    continue;
                }
                ((ub - self.xb[i]).max(0.0) / -alpha, true)
            } else {
                continue;
            };
            let better = match best {
                None => true,
                Some((r, t, _)) => {
                    if limit < t - tol {
                        true
                    } else if limit <= t + tol {
                        if bland {
                            self.basis[i] < self.basis[r]
                        } else {
                            self.at(i, j).abs() > self.at(r, j).abs()
                        }
                    } else {
                        false
                    }
                }
            };
            if better {
                best = Some((i, limit, to_upper));
            }
        }
        let flip = self.upper[j];
        match best {
            None if !flip.is_finite() => Err(LpError::Unbounded),
            Some((_, t, _)) if t <= flip => {
                let (r, t, to_upper) = best.unwrap();
                for i in 0..self.m {
                    self.xb[i] -= dir * self.at(i, j) * t;
                }
                let leaving = self.basis[r];
                self.at_upper[leaving] = to_upper;
                let entering_value = if self.at_upper[j] { flip - t } else { t };
                self.at_upper[j] = false;
                self.pivot(r, j);
                self.xb[r] = entering_value;
                Ok(Step::Moved {
                    degenerate: t <= tol,
                })
            }
            _ => {
                for i in 0..self.m {
                    self.xb[i] -= dir * self.at(i, j) * flip;
                }
                self.at_upper[j] = !self.at_upper[j];
                Ok(Step::Moved { degenerate: false })
            }
        }
    }

    fn run(&mut self, cost: &[f64], limit: usize) -> Result<(), LpError> {
        self.price(cost);
        let mut degenerate = 0;
        for it in 0..limit {
            if it > 0 && it % REPRICE_EVERY == 0 {
                self.price(cost);
            }
            match self.step(degenerate > DEGENERATE_SWITCH)? {
                Step::Optimal => return Ok(()),
                Step::Moved { degenerate: true } => degenerate += 1,
                Step::Moved { .. } => {}
            }
            for v in self.xb.iter_mut() {
                if v.abs() < 1e-14 {
                    *v = 0.0;
                }
            }
        }
        Err(LpError::IterationLimit)
    }

    fn value_of(&self, col: usize, basic_row: &[Option<usize>]) -> f64 {
        match basic_row[col] {
            Some(i) => self.xb[i],
            None if self.at_upper[col] => self.upper[col],
            None => 0.0,
        }
    }
}

impl LpSolver for DenseSimplex {
    fn solve(&self, lp: &LinearProgram, want_duals: bool) -> Result<LpSolution, LpError> {
        lp.validate()?;
        let flip = if lp.sense == Sense::Maximize { 1.0 } else { -1.0 };
        let m = lp.n_constraints();

        // structural columns
        let mut maps = Vec::with_capacity(lp.n_vars());
        let mut upper = Vec::new();
        let mut offset = vec![0.0; m];
        for v in &lp.variables {
            let k = upper.len();
            if v.lower.is_finite() {
                maps.push(VarMap::Shift(k, v.lower));
                upper.push(v.upper - v.lower);
            } else if v.upper.is_finite() {
                maps.push(VarMap::Mirror(k, v.upper));
                upper.push(f64::INFINITY);
            } else {
                maps.push(VarMap::Split(k, k + 1));
                upper.push(f64::INFINITY);
                upper.push(f64::INFINITY);
            }
        }
        let n_struct = upper.len();
        let slack_of: Vec<Option<usize>> = {
            let mut next = n_struct;
            lp.constraints
                .iter()
                .map(|c| {
                    (c.relation != Relation::Eq).then(|| {
                        next += 1;
                        next - 1
                    })
                })
                .collect()
        };
        let n_slack = slack_of.iter().flatten().count();
        let art0 = n_struct + n_slack;
        let n = art0 + m;
        upper.resize(art0, f64::INFINITY);
        upper.resize(n, 0.0);

        let mut a = vec![0.0; m * n];
        let mut rhs = vec![0.0; m];
        for (i, c) in lp.constraints.iter().enumerate() {
            let row = &mut a[i * n..(i + 1) * n];
            for &(j, coef) in &c.terms {
                match maps[j] {
                    VarMap::Shift(k, l) => {
                        row[k] += coef;
                        offset[i] += coef * l;
                    }
                    VarMap::Mirror(k, u) => {
                        row[k] -= coef;
                        offset[i] += coef * u;
                    }
                    VarMap::Split(p, q) => {
                        row[p] += coef;
                        row[q] -= coef;
                    }
                }
            }
            if let Some(s) = slack_of[i] {
                row[s] = if c.relation == Relation::Le { 1.0 } else { -1.0 };
            }
            rhs[i] = c.rhs - offset[i];
        }
        let sign: Vec<f64> = rhs.iter().map(|&b| if b < 0.0 { -1.0 } else { 1.0 }).collect();
        for i in 0..m {
            if sign[i] < 0.0 {
                a[i * n..(i + 1) * n].iter_mut().for_each(|x| *x = -*x);
                rhs[i] = -rhs[i];
            }
            a[i * n + art0 + i] = 1.0;
        }

        let mut cost = vec![0.0; n];
        for &(j, c) in &lp.objective {
            match maps[j] {
                VarMap::Shift(k, _) => cost[k] += flip * c,
                VarMap::Mirror(k, _) => cost[k] -= flip * c,
                VarMap::Split(p, q) => {
                    cost[p] += flip * c;
                    cost[q] -= flip * c;
                }
            }
        }

        // start from slacks where they form an identity column, artificials elsewhere
        let mut basis = Vec::with_capacity(m);
        let mut phase1 = vec![0.0; n];
        for i in 0..m {
            match slack_of[i] {
                Some(s) if a[i * n + s] > 0.0 => basis.push(s),
                _ => {
                    basis.push(art0 + i);
                    upper[art0 + i] = f64::INFINITY;
                    phase1[art0 + i] = -1.0;
                }
            }
        }
        let mut t = Tableau {
            m,
            n,
            a,
            upper,
            basis,
            at_upper: vec![false; n],
            xb: rhs.clone(),
            d: vec![0.0; n],
            tol: self.tol,
        };
        let limit = self.max_iterations.unwrap_or(50 * (m + n) + 1000);

        if phase1.iter().any(|&c| c != 0.0) {
            t.run(&phase1, limit)?;
            let scale = rhs.iter().fold(1.0f64, |s, b| s.max(b.abs()));
            let infeasibility: f64 = (0..m)
                .filter(|&i| t.basis[i] >= art0)
                .map(|i| t.xb[i])
                .sum();
            if infeasibility > 1e-7 * scale {
                return Err(LpError::Infeasible);
            }
            for j in art0..n {
                t.upper[j] = 0.0;
            }
            // drive remaining artificials out of the basis where possible
            for r in 0..m {
                if t.basis[r] < art0 {
                    continue;
                }
                let basic = t.is_basic();
                if let Some(j) = (0..art0).find(|&j| !basic[j] && t.at(r, j).abs() > 1e-7) {
                    let value = if t.at_upper[j] { t.upper[j] } else { 0.0 };
                    t.at_upper[j] = false;
                    t.pivot(r, j);
                    t.xb[r] = value;
                }
            }
        }
        t.run(&cost, limit)?;

        let mut basic_row = vec![None; n];
        for (i, &b) in t.basis.iter().enumerate() {
            basic_row[b] = Some(i);
        }
        let x: Vec<f64> = maps
            .iter()
            .map(|&mp| match mp {
                VarMap::Shift(k, l) => l + t.value_of(k, &basic_row),
                VarMap::Mirror(k, u) => u - t.value_of(k, &basic_row),
                VarMap::Split(p, q) => t.value_of(p, &basic_row) - t.value_of(q, &basic_row),
            })
            .collect();
        let scale = lp
            .constraints
            .iter()
            .fold(1.0f64, |s, c| s.max(c.rhs.abs()));
        let violation = lp.max_violation(&x);
        if violation > 1e-6 * scale {
            return Err(LpError::NumericalBreakdown(format!(
                "solution violates constraints by {violation:e}"
            )));
        }
        let duals = if want_duals {
            (0..m).map(|i| -flip * sign[i] * t.d[art0 + i]).collect()
        } else {
            Vec::new()
        };
        Ok(LpSolution {
            value: lp.objective_value(&x),
            x,
            duals,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn solve(lp: &LinearProgram) -> Result<LpSolution, LpError> {
        DenseSimplex::default().solve(lp, true)
    }

    #[test]
    fn single_bounded_variable() {
        let mut lp = LinearProgram::new(Sense::Maximize);
        let x = lp.add_var("x", 0.0, 1.0);
        lp.add_objective(x, 1.0);
        let s = solve(&lp).unwrap();
        assert_eq!(s.value, 1.0);
        assert_eq!(s.x, vec![1.0]);
    }

    #[test]
    fn textbook_duality() {
        let mut lp = LinearProgram::new(Sense::Maximize);
        let x = lp.add_var("x", 0.0, f64::INFINITY);
        let y = lp.add_var("y", 0.0, f64::INFINITY);
        lp.add_objective(x, 1.0);
        lp.add_objective(y, 1.0);
        lp.add_constraint("c", vec![(x, 1.0), (y, 1.0)], Relation::Le, 1.0);
        let s = solve(&lp).unwrap();
        assert!((s.value - 1.0).abs() < 1e-12);
        assert!((s.duals[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn equality_and_ge_rows() {
        // min 2x + 3y, x + y = 4, x - y >= 1, y >= 0.5
        let mut lp = LinearProgram::new(Sense::Minimize);
        let x = lp.add_var("x", f64::NEG_INFINITY, f64::INFINITY);
        let y = lp.add_var("y", 0.5, f64::INFINITY);
        lp.add_objective(x, 2.0);
        lp.add_objective(y, 3.0);
        lp.add_constraint("sum", vec![(x, 1.0), (y, 1.0)], Relation::Eq, 4.0);
        lp.add_constraint("gap", vec![(x, 1.0), (y, -1.0)], Relation::Ge, 1.0);
        let s = solve(&lp).unwrap();
        assert!((s.x[0] - 3.5).abs() < 1e-9 && (s.x[1] - 0.5).abs() < 1e-9);
        assert!((s.value - 8.5).abs() < 1e-9);
        // raising the sum adds one unit of the cheaper x
        assert!((s.duals[0] - 2.0).abs() < 1e-9);
        assert!(s.duals[1].abs() < 1e-9);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = LinearProgram::new(Sense::Maximize);
        let x = lp.add_var("x", 0.0, 1.0);
        lp.add_constraint("c", vec![(x, 1.0)], Relation::Ge, 2.0);
        assert_eq!(solve(&lp), Err(LpError::Infeasible));

        let mut lp = LinearProgram::new(Sense::Maximize);
        let x = lp.add_var("x", 0.0, f64::INFINITY);
        lp.add_objective(x, 1.0);
        assert_eq!(solve(&lp), Err(LpError::Unbounded));
    }

    #[test]
    fn upper_bounded_negative_mirror() {
        let mut lp = LinearProgram::new(Sense::Minimize);
        let x = lp.add_var("x", f64::NEG_INFINITY, 3.0);
        lp.add_objective(x, -1.0);
        lp.add_constraint("c", vec![(x, 2.0)], Relation::Ge, -10.0);
        let s = solve(&lp).unwrap();
        assert!((s.x[0] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn redundant_equalities() {
        let mut lp = LinearProgram::new(Sense::Maximize);
        let x = lp.add_var("x", 0.0, 5.0);
        let y = lp.add_var("y", 0.0, 5.0);
        lp.add_objective(x, 1.0);
        lp.add_constraint("a", vec![(x, 1.0), (y, 1.0)], Relation::Eq, 2.0);
        lp.add_constraint("b", vec![(x, 2.0), (y, 2.0)], Relation::Eq, 4.0);
        let s = solve(&lp).unwrap();
        assert!((s.value - 2.0).abs() < 1e-9);
    }
}
