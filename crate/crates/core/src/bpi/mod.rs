//! Bounded policy iteration under the conservative safety criterion.
//!
//! Controllers are evaluated on two chains: discounted Repeat rewards on the
//! plain global chain, and the Avoid-absorption gain on the ssd chain. A
//! controller is feasible when the gain seen from `Repeat × G^ss` is at most
//! `eps_feas`.

use alloc::format;
use alloc::vec::Vec;

use crate::chain::{build_global_chain, gain, poisson_solve, ChainKind, PoissonSolution};
use crate::controller::{evaluate_discounted, initial_istate, value_at_belief, EvalMethod, Sfsc};
use crate::linalg::{dot, Matrix};
use crate::optimize::LpSolver;
use crate::product::{steady_state_seed, LtlRewards, ProductPomdp};
use crate::Error;

mod escape;
mod improve;
mod seed;
mod support;

pub use escape::{add_istates, forward_beliefs, prune_candidates, AddOutcome};
pub use improve::{
    build_improvement_program, improve_istate_bilinear, improve_istate_lp, ImproveOutcome,
    ImprovementProgram,
};
pub use seed::{find_initial_controller, repair_steady_rows, uniform_seed, SeedReport};
pub use support::safe_support;

/// How much of the Poisson block the improvement program materializes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BilinearMode {
    /// Every product `ω(g',α|g,o)·w(s,α,g')` over all of `S × O × G × Act`.
    Full,
    /// Only products with `O(o|s) > 0` and admissible `ω`, over the global
    /// states reachable from `Repeat × G^ss`.
    Reduced,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BpiConfig {
    pub n_max: usize,
    pub n_new: usize,
    pub beta: f64,
    pub eps_beta: f64,
    pub eps_feas: f64,
    pub eps_improve: f64,
    pub m1: f64,
    pub m2: f64,
    pub max_iterations: usize,
    pub rabin_index: usize,
    pub eval_method: EvalMethod,
    pub bilinear_mode: BilinearMode,
    /// After a relaxed candidate fails exact verification, retry the
    /// improvement over a support that is safe by reachability.
    pub support_fallback: bool,
    /// Let the seed search prune unsafe steady rows when the relaxation
    /// yields no verified controller.
    pub seed_repair: bool,
    /// Relaxations with more products than this are skipped by the seed search.
    pub relaxation_limit: usize,
}

impl Default for BpiConfig {
    fn default() -> Self {
        Self {
            n_max: 10,
            n_new: 3,
            beta: 0.95,
            eps_beta: 1e-9,
            eps_feas: 1e-6,
            eps_improve: 1e-7,
            m1: 1e3,
            m2: 1e3,
            max_iterations: 100,
            rabin_index: 0,
            eval_method: EvalMethod::Direct,
            bilinear_mode: BilinearMode::Reduced,
            support_fallback: true,
            seed_repair: true,
            relaxation_limit: 20_000,
        }
    }
}

impl BpiConfig {
    pub fn validate(&self) -> Result<(), Error> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.into()));
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return bad("beta must lie in (0,1)");
        }
        if self.n_new > self.n_max || self.n_new == 0 {
            return bad("need 0 < n_new <= n_max");
        }
        if !(self.eps_beta > 0.0 && self.eps_feas > 0.0 && self.eps_improve > 0.0) {
            return bad("tolerances must be positive");
        }
        if !(self.m1 > 0.0 && self.m2 > 0.0) {
            return bad("M1 and M2 must be positive");
        }
        Ok(())
    }
}

/// Values of a controller and its feasibility residual.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    /// `V^β` over global states `s·|G| + g`.
    pub values: Vec<f64>,
    /// Poisson solution on the ssd chain with charge `r^av·r^G`.
    pub avoid: PoissonSolution,
    /// `ι^ss` over global states.
    pub seed: Vec<f64>,
    /// `ι^ssᵀ𝔤`.
    pub residual: f64,
    pub initial_istate: usize,
    /// `max_g ι^φᵀV_g` under the κ rule.
    pub initial_value: f64,
    pub ssd: Matrix,
}

pub fn evaluate(product: &ProductPomdp, sfsc: &Sfsc, config: &BpiConfig) -> Result<Evaluation, Error> {
    let rewards = LtlRewards::new(product, sfsc.steady(), config.beta);
    let values = evaluate_discounted(product, sfsc, &rewards, config.eval_method, config.eps_beta)?;
    let ssd = build_global_chain(product, sfsc, ChainKind::Ssd, 0)?.transition;
    let avoid = poisson_solve(&ssd, &rewards.avoid_charge())?;
    let seed = steady_state_seed(product, sfsc.steady())?;
    let residual = dot(&seed, &avoid.gain);
    let g0 = initial_istate(sfsc, &values, product.initial());
    let initial_value = value_at_belief(&values, sfsc.n_istates(), g0, product.initial());
    Ok(Evaluation {
        values,
        avoid,
        seed,
        residual,
        initial_istate: g0,
        initial_value,
        ssd,
    })
}

/// Long-run frequency of `Repeat × G^ss` visits from `ι^ss` on the ssd chain.
pub fn repeat_frequency(product: &ProductPomdp, sfsc: &Sfsc, ssd: &Matrix) -> Result<f64, Error> {
    let rewards = LtlRewards::new(product, sfsc.steady(), 0.5);
    let g = gain(ssd, &rewards.repeat_charge())?;
    Ok(dot(&steady_state_seed(product, sfsc.steady())?, &g))
}

/// One row of the synthesis report.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    pub n_istates: usize,
    pub n_steady: usize,
    pub value: f64,
    pub residual: f64,
    pub repeat_frequency: f64,
    /// `(I-state, ε)` for every improvement program solved this iteration.
    pub epsilons: Vec<(usize, f64)>,
    pub improved: Vec<usize>,
    pub added: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    NotImproved,
    IterationLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BpiReport {
    pub records: Vec<IterationRecord>,
    pub controller: Sfsc,
    pub termination: Termination,
    /// Exact satisfaction probability of the final closed loop.
    pub satisfaction: f64,
}

fn record(
    iteration: usize,
    product: &ProductPomdp,
    sfsc: &Sfsc,
    eval: &Evaluation,
) -> Result<IterationRecord, Error> {
    Ok(IterationRecord {
        iteration,
        n_istates: sfsc.n_istates(),
        n_steady: sfsc.n_steady(),
        value: eval.initial_value,
        residual: eval.residual,
        repeat_frequency: repeat_frequency(product, sfsc, &eval.ssd)?,
        epsilons: Vec::new(),
        improved: Vec::new(),
        added: 0,
    })
}

fn check_feasible(eval: &Evaluation, config: &BpiConfig, what: &str) -> Result<(), Error> {
    if eval.residual > config.eps_feas {
        return Err(Error::InvariantBreach(format!(
            "{what}: feasibility residual {:e} exceeds {:e}",
            eval.residual, config.eps_feas
        )));
    }
    Ok(())
}

/// Bounded policy iteration from a feasible seed.
pub fn run_bpi(
    product: &ProductPomdp,
    seed: &Sfsc,
    config: &BpiConfig,
    solver: &dyn LpSolver,
) -> Result<BpiReport, Error> {
    run_bpi_with(product, seed, config, solver, &mut |_, _, _| {})
}

/// [`run_bpi`], calling `observe` with the record, controller and evaluation
/// at the seed and after every iteration.
pub fn run_bpi_with(
    product: &ProductPomdp,
    seed: &Sfsc,
    config: &BpiConfig,
    solver: &dyn LpSolver,
    observe: &mut dyn FnMut(&IterationRecord, &Sfsc, &Evaluation),
) -> Result<BpiReport, Error> {
    config.validate()?;
    let mut sfsc = seed.clone();
    let mut eval = evaluate(product, &sfsc, config)?;
    check_feasible(&eval, config, "seed")?;
    let mut records = vec_of(record(0, product, &sfsc, &eval)?);
    observe(&records[0], &sfsc, &eval);
    let mut termination = Termination::NotImproved;
    let mut iteration = 0;
    loop {
        if iteration >= config.max_iterations {
            termination = Termination::IterationLimit;
            break;
        }
        iteration += 1;
        let mut epsilons = Vec::new();
        let mut improved_states = Vec::new();
        let mut tangents = Vec::new();
        for g in 0..sfsc.n_istates() {
            match improve_istate_bilinear(product, &sfsc, &eval, g, config, solver)? {
                ImproveOutcome::Improved {
                    sfsc: next,
                    epsilon,
                    evaluation,
                } => {
                    check_feasible(&evaluation, config, "improvement")?;
                    sfsc = next;
                    eval = *evaluation;
                    epsilons.push((g, epsilon));
                    improved_states.push(g);
                }
                ImproveOutcome::Tangent { epsilon, beliefs } => {
                    epsilons.push((g, epsilon));
                    tangents.extend(beliefs.into_iter().map(|b| (g, b)));
                }
            }
        }
        let mut added = 0;
        if improved_states.is_empty() && sfsc.n_istates() < config.n_max {
            if let AddOutcome::Added { sfsc: next, count } =
                add_istates(product, &sfsc, &eval, &tangents, config)?
            {
                sfsc = next;
                eval = evaluate(product, &sfsc, config)?;
                check_feasible(&eval, config, "I-state addition")?;
                added = count;
            }
        }
        let mut rec = record(iteration, product, &sfsc, &eval)?;
        rec.epsilons = epsilons;
        rec.improved = improved_states;
        rec.added = added;
        let progressed = !rec.improved.is_empty() || added > 0;
        observe(&rec, &sfsc, &eval);
        records.push(rec);
        if !progressed {
            break;
        }
    }
    let plain = build_global_chain(product, &sfsc, ChainKind::Plain, eval.initial_istate)?;
    let satisfaction = crate::chain::phi_feasible_sets(&plain, product)?.probability;
    Ok(BpiReport {
        records,
        controller: sfsc,
        termination,
        satisfaction,
    })
}

fn vec_of<T>(x: T) -> Vec<T> {
    let mut v = Vec::new();
    v.push(x);
    v
}
