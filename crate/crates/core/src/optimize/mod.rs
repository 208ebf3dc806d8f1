//! Linear programs, a dense simplex solver and McCormick relaxation of
//! bilinear programs.
//!
//! Dual values follow the sensitivity convention: `duals[i]` is the rate of
//! change of the optimal objective per unit increase of constraint `i`'s
//! right-hand side.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::Error;

mod simplex;

pub use simplex::DenseSimplex;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub terms: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

/// A linear program over bounded (possibly infinite) variables.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub sense: Sense,
    pub variables: Vec<Variable>,
    /// Sparse objective; repeated indices are summed.
    pub objective: Vec<(usize, f64)>,
    pub constraints: Vec<Constraint>,
}

impl LinearProgram {
    pub fn new(sense: Sense) -> Self {
        Self {
            sense,
            variables: Vec::new(),
            objective: Vec::new(),
            constraints: Vec::new(),
        }
    }

    pub fn add_var(&mut self, name: impl Into<String>, lower: f64, upper: f64) -> usize {
        self.variables.push(Variable {
            name: name.into(),
            lower,
            upper,
        });
        self.variables.len() - 1
    }

    pub fn add_objective(&mut self, var: usize, coef: f64) {
        self.objective.push((var, coef));
    }

    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        terms: Vec<(usize, f64)>,
        relation: Relation,
        rhs: f64,
    ) -> usize {
        self.constraints.push(Constraint {
            name: name.into(),
            terms,
            relation,
            rhs,
        });
        self.constraints.len() - 1
    }

    pub fn n_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn n_constraints(&self) -> usize {
        self.constraints.len()
    }

    /// Checks that every referenced variable exists and bounds are ordered.
    pub fn validate(&self) -> Result<(), LpError> {
        let n = self.n_vars();
        for v in &self.variables {
            if v.lower.is_nan() || v.upper.is_nan() || v.lower > v.upper {
                return Err(LpError::Malformed(format!("bad bounds on `{}`", v.name)));
            }
            if v.lower == f64::INFINITY || v.upper == f64::NEG_INFINITY {
                return Err(LpError::Malformed(format!("empty domain for `{}`", v.name)));
            }
        }
        let in_range = |terms: &[(usize, f64)]| terms.iter().all(|&(j, c)| j < n && c.is_finite());
        if !in_range(&self.objective) {
            return Err(LpError::Malformed("objective references an unknown variable".into()));
        }
        for c in &self.constraints {
            if !in_range(&c.terms) || !c.rhs.is_finite() {
                return Err(LpError::Malformed(format!("constraint `{}` is malformed", c.name)));
            }
        }
        Ok(())
    }

    /// Objective value at `x`.
    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().map(|&(j, c)| c * x[j]).sum()
    }

    /// Largest violation of any bound or constraint at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for (v, &xj) in self.variables.iter().zip(x) {
            worst = worst.max(v.lower - xj).max(xj - v.upper);
        }
        for c in &self.constraints {
            let lhs: f64 = c.terms.iter().map(|&(j, a)| a * x[j]).sum();
            let gap = match c.relation {
                Relation::Le => lhs - c.rhs,
                Relation::Ge => c.rhs - lhs,
                Relation::Eq => (lhs - c.rhs).abs(),
            };
            worst = worst.max(gap);
        }
        worst
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub value: f64,
    pub x: Vec<f64>,
    /// One entry per constraint; empty if duals were not requested.
    pub duals: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LpError {
    #[error("program is infeasible")]
    Infeasible,
    #[error("program is unbounded")]
    Unbounded,
    #[error("iteration limit reached")]
    IterationLimit,
    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(String),
    #[error("malformed program: {0}")]
    Malformed(String),
}

/// An LP backend.
pub trait LpSolver {
    fn solve(&self, lp: &LinearProgram, want_duals: bool) -> Result<LpSolution, LpError>;
}

/// Dual of `lp`, built so that the optimal values of the duals of `lp`'s
/// constraints are the first `lp.n_constraints()` variables.
///
/// For `max cᵀx, Ax ~ b, l ≤ x ≤ u` the dual is
/// `min bᵀy + uᵀp − lᵀq, Aᵀy + p − q = c` with sign restrictions on `y`
/// following the constraint relations. `p_j` and `q_j` exist only for
/// finite bounds. A minimization is handled by negating the objective.
pub fn dualize(lp: &LinearProgram) -> LinearProgram {
    let flip = if lp.sense == Sense::Maximize { 1.0 } else { -1.0 };
    let mut dual = LinearProgram::new(Sense::Minimize);
    let mut columns: Vec<Vec<(usize, f64)>> = vec![Vec::new(); lp.n_vars()];
    for (i, c) in lp.constraints.iter().enumerate() {
        let (lo, hi) = match c.relation {
            Relation::Le => (0.0, f64::INFINITY),
            Relation::Ge => (f64::NEG_INFINITY, 0.0),
            Relation::Eq => (f64::NEG_INFINITY, f64::INFINITY),
        };
        let y = dual.add_var(format!("y_{i}"), lo, hi);
        dual.add_objective(y, c.rhs);
        for &(j, a) in &c.terms {
            columns[j].push((y, a));
        }
    }
    let mut cost = vec![0.0; lp.n_vars()];
    for &(j, c) in &lp.objective {
        cost[j] += flip * c;
    }
    for (j, v) in lp.variables.iter().enumerate() {
        let mut terms = core::mem::take(&mut columns[j]);
        if v.upper.is_finite() {
            let p = dual.add_var(format!("p_{j}"), 0.0, f64::INFINITY);
            dual.add_objective(p, v.upper);
            terms.push((p, 1.0));
        }
        if v.lower.is_finite() {
            let q = dual.add_var(format!("q_{j}"), 0.0, f64::INFINITY);
            dual.add_objective(q, -v.lower);
            terms.push((q, -1.0));
        }
        dual.add_constraint(format!("col_{j}"), terms, Relation::Eq, cost[j]);
    }
    dual
}

/// Recovers sensitivity duals of `primal` from an optimal solution of
/// [`dualize`]`(primal)`.
pub fn duals_from_dual_solution(primal: &LinearProgram, dual_x: &[f64]) -> Vec<f64> {
    let flip = if primal.sense == Sense::Maximize { 1.0 } else { -1.0 };
    dual_x[..primal.n_constraints()].iter().map(|y| flip * y).collect()
}

/// A product `x·y` of two variables of a [`BilinearProgram`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Product {
    pub x: usize,
    pub y: usize,
}

/// A linear program plus bilinear terms in its constraints and objective.
#[derive(Debug, Clone, PartialEq)]
pub struct BilinearProgram {
    pub lp: LinearProgram,
    pub products: Vec<Product>,
    /// `(constraint, product, coefficient)`.
    pub constraint_products: Vec<(usize, usize, f64)>,
    /// `(product, coefficient)`.
    pub objective_products: Vec<(usize, f64)>,
}

impl BilinearProgram {
    pub fn new(sense: Sense) -> Self {
        Self {
            lp: LinearProgram::new(sense),
            products: Vec::new(),
            constraint_products: Vec::new(),
            objective_products: Vec::new(),
        }
    }

    pub fn add_product(&mut self, x: usize, y: usize) -> usize {
        self.products.push(Product { x, y });
        self.products.len() - 1
    }

    /// Adds a constraint whose left-hand side is `linear + Σ coef·product`.
    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        linear: Vec<(usize, f64)>,
        products: &[(usize, f64)],
        relation: Relation,
        rhs: f64,
    ) -> usize {
        let row = self.lp.add_constraint(name, linear, relation, rhs);
        self.constraint_products
            .extend(products.iter().map(|&(p, c)| (row, p, c)));
        row
    }

    /// Evaluates constraint violation at a point of the original variables.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut lp = self.lp.clone();
        for &(row, p, c) in &self.constraint_products {
            let Product { x: a, y: b } = self.products[p];
            lp.constraints[row].rhs -= c * x[a] * x[b];
        }
        lp.max_violation(x)
    }
}

/// Corner bounds of `x·y` over a box.
fn product_range(xl: f64, xu: f64, yl: f64, yu: f64) -> (f64, f64) {
    let c = [xl * yl, xl * yu, xu * yl, xu * yu];
    (
        c.iter().copied().fold(f64::INFINITY, f64::min),
        c.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    )
}

/// Relaxation produced by [`relax_bilinear`]: the LP plus the index of the
/// variable that stands in for each product.
#[derive(Debug, Clone, PartialEq)]
pub struct Relaxation {
    pub lp: LinearProgram,
    pub product_vars: Vec<usize>,
}

/// Replaces each product by a fresh variable constrained by its four
/// McCormick envelope inequalities.
pub fn relax_bilinear(bp: &BilinearProgram) -> Result<Relaxation, Error> {
    let mut lp = bp.lp.clone();
    let mut product_vars = Vec::with_capacity(bp.products.len());
    for (k, p) in bp.products.iter().enumerate() {
        let (vx, vy) = (&bp.lp.variables[p.x], &bp.lp.variables[p.y]);
        for v in [vx, vy] {
            if !v.lower.is_finite() || !v.upper.is_finite() {
                return Err(Error::UnboundedBilinearVariable(v.name.clone()));
            }
        }
        let (xl, xu, yl, yu) = (vx.lower, vx.upper, vy.lower, vy.upper);
        let (lo, hi) = product_range(xl, xu, yl, yu);
        let w = lp.add_var(format!("prod_{k}"), lo, hi);
        product_vars.push(w);
        // w - xl*y - yl*x >= -xl*yl, and the three siblings
        let env = [
            (xl, yl, Relation::Ge),
            (xu, yu, Relation::Ge),
            (xu, yl, Relation::Le),
            (xl, yu, Relation::Le),
        ];
        for (e, &(a, b, rel)) in env.iter().enumerate() {
            let mut terms = vec![(w, 1.0)];
            if a != 0.0 {
                terms.push((p.y, -a));
            }
            if b != 0.0 {
                terms.push((p.x, -b));
            }
            lp.add_constraint(format!("mc{e}_{k}"), terms, rel, -a * b);
        }
    }
    for &(row, p, c) in &bp.constraint_products {
        lp.constraints[row].terms.push((product_vars[p], c));
    }
    for &(p, c) in &bp.objective_products {
        lp.objective.push((product_vars[p], c));
    }
    Ok(Relaxation { lp, product_vars })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dual_of_textbook_lp() {
        let mut lp = LinearProgram::new(Sense::Maximize);
        let x = lp.add_var("x", 0.0, f64::INFINITY);
        let y = lp.add_var("y", 0.0, f64::INFINITY);
        lp.add_objective(x, 1.0);
        lp.add_objective(y, 1.0);
        lp.add_constraint("c", vec![(x, 1.0), (y, 1.0)], Relation::Le, 1.0);
        let dual = dualize(&lp);
        let sol = DenseSimplex::default().solve(&dual, false).unwrap();
        assert!((sol.value - 1.0).abs() < 1e-9);
        let duals = duals_from_dual_solution(&lp, &sol.x);
        assert!((duals[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn mccormick_pins_corners() {
        for (xv, yv) in [(1.0, 1.0), (0.0, 1.0), (1.0, 0.0), (0.0, 0.0)] {
            let mut bp = BilinearProgram::new(Sense::Maximize);
            let x = bp.lp.add_var("x", 0.0, 1.0);
            let y = bp.lp.add_var("y", 0.0, 1.0);
            let p = bp.add_product(x, y);
            bp.objective_products.push((p, 1.0));
            bp.lp.add_constraint("fx", vec![(x, 1.0)], Relation::Eq, xv);
            bp.lp.add_constraint("fy", vec![(y, 1.0)], Relation::Eq, yv);
            let r = relax_bilinear(&bp).unwrap();
            let sol = DenseSimplex::default().solve(&r.lp, false).unwrap();
            assert!((sol.x[r.product_vars[0]] - xv * yv).abs() < 1e-9);
            let mut min_lp = r.lp.clone();
            min_lp.sense = Sense::Minimize;
            let sol = DenseSimplex::default().solve(&min_lp, false).unwrap();
            assert!((sol.x[r.product_vars[0]] - xv * yv).abs() < 1e-9);
        }
    }

    #[test]
    fn unbounded_participant_rejected() {
        let mut bp = BilinearProgram::new(Sense::Maximize);
        let x = bp.lp.add_var("x", 0.0, f64::INFINITY);
        let y = bp.lp.add_var("y", 0.0, 1.0);
        bp.add_product(x, y);
        assert_eq!(
            relax_bilinear(&bp),
            Err(Error::UnboundedBilinearVariable("x".into()))
        );
    }

    #[test]
    fn malformed_lp_detected() {
        let mut lp = LinearProgram::new(Sense::Maximize);
        lp.add_var("x", 1.0, 0.0);
        assert!(lp.validate().is_err());
        let mut lp = LinearProgram::new(Sense::Maximize);
        lp.add_objective(3, 1.0);
        assert!(lp.validate().is_err());
    }
}
