//! Sparse LP backend and automatic backend selection.

use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettingsBuilder, DefaultSolver, IPSolver, NonnegativeConeT, SolverStatus, ZeroConeT,
};
use ltlsynth_core::optimize::{
    DenseSimplex, LinearProgram, LpError, LpSolution, LpSolver, Relation, Sense,
};

/// Sparse interior-point solver backed by `clarabel`. Duals are the
/// sensitivities `∂ value / ∂ rhs`, matching [`DenseSimplex`].
#[derive(Debug, Clone, Copy)]
pub struct SparseSolver {
    pub tol: f64,
    pub max_iter: u32,
}

impl Default for SparseSolver {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 200,
        }
    }
}

impl LpSolver for SparseSolver {
    fn solve(&self, lp: &LinearProgram, want_duals: bool) -> Result<LpSolution, LpError> {
        match self.solve_at(lp, want_duals, self.tol) {
            Err(LpError::NumericalBreakdown(_)) if self.tol < 1e-8 => self.solve_at(lp, want_duals, 1e-8),
            done => done,
        }
    }
}

impl SparseSolver {
    fn solve_at(&self, lp: &LinearProgram, want_duals: bool, tol: f64) -> Result<LpSolution, LpError> {
        lp.validate()?;
        let n = lp.n_vars();
        // equality rows first (zero cone), then `a·x ≤ b` rows
        let mut rows: Vec<(Vec<(usize, f64)>, f64)> = Vec::new();
        let mut sign = Vec::new();
        let eq: Vec<usize> = (0..lp.n_constraints())
            .filter(|&i| lp.constraints[i].relation == Relation::Eq)
            .collect();
        let ineq: Vec<usize> = (0..lp.n_constraints())
            .filter(|&i| lp.constraints[i].relation != Relation::Eq)
            .collect();
        let mut slot = vec![0; lp.n_constraints()];
        for &i in eq.iter().chain(&ineq) {
            let c = &lp.constraints[i];
            let s = if c.relation == Relation::Ge { -1.0 } else { 1.0 };
            slot[i] = rows.len();
            sign.push(s);
            rows.push((c.terms.iter().map(|&(j, a)| (j, s * a)).collect(), s * c.rhs));
        }
        for (j, v) in lp.variables.iter().enumerate() {
            if v.upper.is_finite() {
                rows.push((vec![(j, 1.0)], v.upper));
            }
            if v.lower.is_finite() {
                rows.push((vec![(j, -1.0)], -v.lower));
            }
        }
        let m = rows.len();
        let (mut ri, mut ci, mut vals) = (Vec::new(), Vec::new(), Vec::new());
        for (r, (terms, _)) in rows.iter().enumerate() {
            for &(j, a) in terms {
                if a != 0.0 {
                    ri.push(r);
                    ci.push(j);
                    vals.push(a);
                }
            }
        }
        let a = CscMatrix::new_from_triplets(m, n, ri, ci, vals);
        let b: Vec<f64> = rows.iter().map(|r| r.1).collect();
        let flip = if lp.sense == Sense::Maximize { -1.0 } else { 1.0 };
        let mut q = vec![0.0; n];
        for &(j, c) in &lp.objective {
            q[j] += flip * c;
        }
        let p = CscMatrix::<f64>::zeros((n, n));
        let cones = [ZeroConeT(eq.len()), NonnegativeConeT(m - eq.len())];
        let settings = DefaultSettingsBuilder::default()
            .verbose(false)
            .max_iter(self.max_iter)
            .tol_gap_abs(tol)
            .tol_gap_rel(tol)
            .tol_feas(tol)
            .build()
            .map_err(|e| LpError::Malformed(format!("{e:?}")))?;
        let mut solver = DefaultSolver::new(&p, &q, &a, &b, &cones, settings)
            .map_err(|e| LpError::Malformed(format!("{e:?}")))?;
        solver.solve();
        let sol = &solver.solution;
        match sol.status {
            SolverStatus::Solved | SolverStatus::AlmostSolved => {}
            SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible => {
                return Err(LpError::Infeasible)
            }
            SolverStatus::DualInfeasible | SolverStatus::AlmostDualInfeasible => {
                return Err(LpError::Unbounded)
            }
            SolverStatus::MaxIterations | SolverStatus::MaxTime => return Err(LpError::IterationLimit),
            other => return Err(LpError::NumericalBreakdown(format!("{other:?}"))),
        }
        let x = sol.x.clone();
        let duals = if want_duals {
            // minimizing flip·c: ∂(min)/∂b = −z, and the value is flip·min
            (0..lp.n_constraints())
                .map(|i| -flip * sign[slot[i]] * sol.z[slot[i]])
                .collect()
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

/// Dense tableau for small programs, sparse backend otherwise or when the
/// tableau fails to converge.
#[derive(Debug, Clone, Copy)]
pub struct AutoSolver {
    /// Largest `rows × columns` handed to the dense tableau.
    pub dense_limit: usize,
    pub sparse: SparseSolver,
}

impl Default for AutoSolver {
    fn default() -> Self {
        Self {
            dense_limit: 2_000,
            sparse: SparseSolver::default(),
        }
    }
}

impl LpSolver for AutoSolver {
    fn solve(&self, lp: &LinearProgram, want_duals: bool) -> Result<LpSolution, LpError> {
        if lp.n_vars() * lp.n_constraints() <= self.dense_limit {
            match DenseSimplex::default().solve(lp, want_duals) {
                Err(LpError::IterationLimit | LpError::NumericalBreakdown(_)) => {}
                done => return done,
            }
        }
        self.sparse.solve(lp, want_duals)
    }
}
