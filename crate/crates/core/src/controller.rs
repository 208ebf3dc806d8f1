//! Stochastic finite-state controllers with a transient/steady I-state
//! partition, and discounted value vectors of the closed loop.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::chain::{build_global_chain, ChainKind};
use crate::linalg::{solve, Matrix};
use crate::product::{LtlRewards, ProductPomdp};
use crate::Error;

/// Row-sum tolerance for controller distributions.
pub const OMEGA_TOL: f64 = 1e-10;

/// Initial I-state selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Kappa {
    /// The I-state maximizing the expected value at the initial belief,
    /// lowest index on ties.
    #[default]
    Argmax,
    Fixed(usize),
}

/// An sFSC. `omega` is indexed `[g][o][g'][α]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sfsc {
    n_obs: usize,
    n_actions: usize,
    steady: Vec<bool>,
    omega: Vec<f64>,
    kappa: Kappa,
}

impl Sfsc {
    pub fn new(
        n_obs: usize,
        n_actions: usize,
        steady: Vec<bool>,
        omega: Vec<f64>,
        kappa: Kappa,
    ) -> Result<Self, Error> {
        let c = Self {
            n_obs,
            n_actions,
            steady,
            omega,
            kappa,
        };
        c.validate()?;
        Ok(c)
    }

    /// Uniform over `G × Act` from transient I-states and over `G^ss × Act`
    /// from steady ones.
    pub fn uniform(n_obs: usize, n_actions: usize, steady: Vec<bool>) -> Result<Self, Error> {
        let ng = steady.len();
        let n_ss = steady.iter().filter(|&&b| b).count();
        let mut omega = Vec::with_capacity(ng * n_obs * ng * n_actions);
        for g in 0..ng {
            let targets = if steady[g] { n_ss } else { ng };
            for _ in 0..n_obs {
                for gn in 0..ng {
                    let p = if steady[g] && !steady[gn] {
                        0.0
                    } else {
                        1.0 / (targets * n_actions) as f64
                    };
                    omega.extend(core::iter::repeat(p).take(n_actions));
                }
            }
        }
        Self::new(n_obs, n_actions, steady, omega, Kappa::Argmax)
    }

    pub fn validate(&self) -> Result<(), Error> {
        let ng = self.steady.len();
        if ng == 0 {
            return Err(Error::InvalidController("no I-states".into()));
        }
        if self.omega.len() != ng * self.n_obs * ng * self.n_actions {
            return Err(Error::DimensionMismatch {
                expected: ng * self.n_obs * ng * self.n_actions,
                found: self.omega.len(),
            });
        }
        for g in 0..ng {
            for o in 0..self.n_obs {
                let row = self.row(g, o);
                if row.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
                    return Err(Error::InvalidController(format!(
                        "omega(.|{g},{o}) has an entry outside [0,1]"
                    )));
                }
                let sum: f64 = row.iter().sum();
                if (sum - 1.0).abs() > OMEGA_TOL {
                    return Err(Error::InvalidController(format!(
                        "omega(.|{g},{o}) sums to {sum}"
                    )));
                }
                if self.steady[g] {
                    for gn in (0..ng).filter(|&gn| !self.steady[gn]) {
                        if row[gn * self.n_actions..(gn + 1) * self.n_actions]
                            .iter()
                            .any(|&p| p > 0.0)
                        {
                            return Err(Error::StructureViolation { from: g, to: gn });
                        }
                    }
                }
            }
        }
        if let Kappa::Fixed(g) = self.kappa {
            if g >= ng {
                return Err(Error::UnknownState(g));
            }
        }
        Ok(())
    }

    pub fn n_istates(&self) -> usize {
        self.steady.len()
    }
    pub fn n_observations(&self) -> usize {
        self.n_obs
    }
    pub fn n_actions(&self) -> usize {
        self.n_actions
    }
    pub fn steady(&self) -> &[bool] {
        &self.steady
    }
    pub fn is_steady(&self, g: usize) -> bool {
        self.steady[g]
    }
    pub fn n_steady(&self) -> usize {
        self.steady.iter().filter(|&&b| b).count()
    }
    pub fn kappa(&self) -> Kappa {
        self.kappa
    }
    pub fn omega_table(&self) -> &[f64] {
        &self.omega
    }

    /// `ω(g', α | g, o)`.
    pub fn omega(&self, g: usize, o: usize, gn: usize, a: usize) -> f64 {
        let ng = self.n_istates();
        self.omega[((g * self.n_obs + o) * ng + gn) * self.n_actions + a]
    }

    /// Distribution over `(g', α)` pairs, indexed `g'·|Act| + α`.
    pub fn row(&self, g: usize, o: usize) -> &[f64] {
        let w = self.n_istates() * self.n_actions;
        let k = g * self.n_obs + o;
        &self.omega[k * w..(k + 1) * w]
    }

    /// Copy with all rows of I-state `g` replaced; `rows` is `[o][g'][α]`.
    pub fn with_rows(&self, g: usize, rows: &[f64]) -> Result<Self, Error> {
        let w = self.n_obs * self.n_istates() * self.n_actions;
        if rows.len() != w {
            return Err(Error::DimensionMismatch {
                expected: w,
                found: rows.len(),
            });
        }
        let mut next = self.clone();
        next.omega[g * w..(g + 1) * w].copy_from_slice(rows);
        next.validate()?;
        Ok(next)
    }

    /// Copy with one extra I-state that moves to `successor` and plays
    /// `action` under every observation.
    pub fn with_deterministic_istate(&self, steady: bool, successor: usize, action: usize) -> Result<Self, Error> {
        let ng = self.n_istates();
        let na = self.n_actions;
        let mut omega = Vec::with_capacity((ng + 1) * self.n_obs * (ng + 1) * na);
        for g in 0..ng {
            for o in 0..self.n_obs {
                omega.extend_from_slice(self.row(g, o));
                omega.extend(core::iter::repeat(0.0).take(na));
            }
        }
        for _ in 0..self.n_obs {
            let mut row = vec![0.0; (ng + 1) * na];
            row[successor * na + action] = 1.0;
            omega.extend(row);
        }
        let mut flags = self.steady.clone();
        flags.push(steady);
        Self::new(self.n_obs, na, flags, omega, self.kappa)
    }

    pub fn with_kappa(mut self, kappa: Kappa) -> Result<Self, Error> {
        self.kappa = kappa;
        self.validate()?;
        Ok(self)
    }
}

/// The controller of the original POMDP induced by a product controller.
/// I-states and parameters carry over unchanged.
pub fn induce_controller(product_sfsc: &Sfsc) -> Sfsc {
    product_sfsc.clone()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalMethod {
    Direct,
    Richardson,
}

/// Iteration cap for Richardson evaluation.
const RICHARDSON_CAP: usize = 1_000_000;

/// `V^β` solving `V = r + βTV` on the plain global chain, where
/// `r([s,g]) = r^β(s)·r^G(g)`.
pub fn evaluate_discounted(
    product: &ProductPomdp,
    sfsc: &Sfsc,
    rewards: &LtlRewards,
    method: EvalMethod,
    tol: f64,
) -> Result<Vec<f64>, Error> {
    let chain = build_global_chain(product, sfsc, ChainKind::Plain, 0)?;
    discounted_values(&chain.transition, &rewards.discounted_charge(), rewards.discount, method, tol)
}

/// Discounted values of an arbitrary chain. Richardson iteration stops once
/// the error bound `β/(1−β)·‖V_{k+1} − V_k‖` falls below `tol`.
pub fn discounted_values(
    t: &Matrix,
    reward: &[f64],
    beta: f64,
    method: EvalMethod,
    tol: f64,
) -> Result<Vec<f64>, Error> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::InvalidConfig(format!("discount {beta} outside (0,1)")));
    }
    let n = t.rows();
    match method {
        EvalMethod::Direct => {
            let mut a = Matrix::identity(n);
            for i in 0..n {
                for (x, &p) in a.row_mut(i).iter_mut().zip(t.row(i)) {
                    *x -= beta * p;
                }
            }
            solve(a, reward)
        }
        EvalMethod::Richardson => {
            let mut v = vec![0.0; n];
            for _ in 0..RICHARDSON_CAP {
                let tv = t.mul_vec(&v);
                let next: Vec<f64> = reward.iter().zip(&tv).map(|(r, x)| r + beta * x).collect();
                let diff = next
                    .iter()
                    .zip(&v)
                    .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
                v = next;
                if beta / (1.0 - beta) * diff < tol {
                    return Ok(v);
                }
            }
            Err(Error::InvalidConfig("Richardson iteration did not converge".into()))
        }
    }
}

/// Value vectors of a controller.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueVectors {
    pub n_istates: usize,
    pub discounted: Vec<f64>,
    pub average: Vec<f64>,
    pub gain: Vec<f64>,
}

/// `bᵀV_g` for a belief `b` over product states.
pub fn value_at_belief(values: &[f64], n_istates: usize, g: usize, b: &[f64]) -> f64 {
    b.iter()
        .enumerate()
        .map(|(s, &p)| p * values[s * n_istates + g])
        .sum()
}

/// `argmax_g bᵀV_g`, lowest index on ties.
pub fn best_istate(values: &[f64], n_istates: usize, b: &[f64]) -> usize {
    (0..n_istates).fold(0, |best, g| {
        if value_at_belief(values, n_istates, g, b) > value_at_belief(values, n_istates, best, b) {
            g
        } else {
            best
        }
    })
}

/// `max_g bᵀV_g`.
pub fn belief_value(values: &[f64], n_istates: usize, b: &[f64]) -> f64 {
    value_at_belief(values, n_istates, best_istate(values, n_istates, b), b)
}

/// The initial I-state selected by the controller's κ rule.
pub fn initial_istate(sfsc: &Sfsc, values: &[f64], b: &[f64]) -> usize {
    match sfsc.kappa() {
        Kappa::Argmax => best_istate(values, sfsc.n_istates(), b),
        Kappa::Fixed(g) => g,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_respects_structure() {
        let c = Sfsc::uniform(2, 3, vec![false, true, true]).unwrap();
        assert_eq!(c.omega(1, 0, 0, 0), 0.0);
        assert!((c.omega(1, 1, 2, 2) - 1.0 / 6.0).abs() < 1e-15);
        assert!((c.omega(0, 1, 0, 2) - 1.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn structure_violation_rejected() {
        let c = Sfsc::uniform(1, 1, vec![false, false]).unwrap();
        let mut omega = c.omega_table().to_vec();
        omega.copy_from_slice(&[1.0, 0.0, 1.0, 0.0]);
        assert_eq!(
            Sfsc::new(1, 1, vec![false, true], omega, Kappa::Argmax),
            Err(Error::StructureViolation { from: 1, to: 0 })
        );
    }

    #[test]
    fn added_istate_is_deterministic() {
        let c = Sfsc::uniform(2, 2, vec![false, true]).unwrap();
        let d = c.with_deterministic_istate(true, 1, 0).unwrap();
        assert_eq!(d.n_istates(), 3);
        for o in 0..2 {
            assert_eq!(d.row(2, o), &[0.0, 0.0, 1.0, 0.0, 0.0, 0.0]);
            assert_eq!(d.omega(0, o, 2, 0), 0.0);
            assert_eq!(d.omega(1, o, 1, 1), c.omega(1, o, 1, 1));
        }
    }

    #[test]
    fn geometric_series() {
        let t = Matrix::identity(1);
        let v = discounted_values(&t, &[1.0], 0.9, EvalMethod::Direct, 1e-9).unwrap();
        assert!((v[0] - 10.0).abs() < 1e-12);
        let v = discounted_values(&t, &[0.0], 0.9, EvalMethod::Richardson, 1e-9).unwrap();
        assert_eq!(v, vec![0.0]);
    }

    #[test]
    fn argmax_ties_lowest() {
        let values = [0.0, 1.0, 1.0, 0.0, 1.0, 1.0];
        assert_eq!(best_istate(&values, 3, &[0.5, 0.5]), 1);
        assert_eq!(value_at_belief(&values, 3, 2, &[1.0, 0.0]), 1.0);
    }
}
