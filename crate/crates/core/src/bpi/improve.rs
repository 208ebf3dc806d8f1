use alloc::boxed::Box;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::support::{admissible, safe_support};
use super::{evaluate, BilinearMode, BpiConfig, Evaluation};
use crate::controller::Sfsc;
use crate::optimize::{
    relax_bilinear, BilinearProgram, LpError, LpSolution, LpSolver, Relation, Sense,
};
use crate::product::{LtlRewards, ProductPomdp};
use crate::Error;

#[derive(Debug, Clone, PartialEq)]
pub enum ImproveOutcome {
    Improved {
        sfsc: Sfsc,
        epsilon: f64,
        evaluation: Box<Evaluation>,
    },
    /// No verified improvement. `beliefs` are the normalized duals of the
    /// improvement rows, or `ι^φ` when those vanish.
    Tangent { epsilon: f64, beliefs: Vec<Vec<f64>> },
}

/// The optimization problem that re-parameterizes the rows of one I-state.
#[derive(Debug, Clone, PartialEq)]
pub struct ImprovementProgram {
    pub bp: BilinearProgram,
    pub epsilon: usize,
    /// Variable of `ω(g', α | g, o)`, laid out `[o][g'][α]`.
    pub omega: Vec<Option<usize>>,
    /// Improvement row of each product state.
    pub improvement_rows: Vec<usize>,
    /// States whose one-step backup can beat their value by more than
    /// `eps_improve`; only these carry `ε`.
    pub improvable: Vec<bool>,
}

impl ImprovementProgram {
    pub fn n_products(&self) -> usize {
        self.bp.products.len()
    }
}

/// `Σ_{s'} T(s'|s,α)·V([s',g'])`, laid out `[s][g'][α]`.
fn lookahead(product: &ProductPomdp, values: &[f64], ng: usize) -> Vec<f64> {
    let (ns, na) = (product.n_states(), product.n_actions());
    let mut q = vec![0.0; ns * ng * na];
    for s in 0..ns {
        for a in 0..na {
            for (sn, &p) in product.transition_row(s, a).iter().enumerate() {
                if p == 0.0 {
                    continue;
                }
                for gn in 0..ng {
                    q[(s * ng + gn) * na + a] += p * values[sn * ng + gn];
                }
            }
        }
    }
    q
}

/// Global states reachable from the support of `ι^ss` when row `g` may use
/// any pair in `allowed` and every other row keeps its ssd transitions.
fn closed_set(
    product: &ProductPomdp,
    sfsc: &Sfsc,
    eval: &Evaluation,
    g: usize,
    allowed: &[bool],
) -> Vec<bool> {
    let (ng, na, no) = (sfsc.n_istates(), product.n_actions(), product.n_observations());
    let mut seen: Vec<bool> = eval.seed.iter().map(|&p| p > 0.0).collect();
    let mut stack: Vec<usize> = (0..seen.len()).filter(|&i| seen[i]).collect();
    let push = |j: usize, seen: &mut Vec<bool>, stack: &mut Vec<usize>| {
        if !seen[j] {
            seen[j] = true;
            stack.push(j);
        }
    };
    while let Some(i) = stack.pop() {
        let (s, h) = (i / ng, i % ng);
        if h == g {
            for gn in 0..ng {
                for a in 0..na {
                    let used = (0..no).any(|o| {
                        product.observation(s, o) > 0.0 && allowed[(o * ng + gn) * na + a]
                    });
                    if !used {
                        continue;
                    }
                    for (sn, &p) in product.modified_row(s, a).iter().enumerate() {
                        if p > 0.0 {
                            push(sn * ng + gn, &mut seen, &mut stack);
                        }
                    }
                }
            }
        } else {
            for (j, &p) in eval.ssd.row(i).iter().enumerate() {
                if p > 0.0 {
                    push(j, &mut seen, &mut stack);
                }
            }
        }
    }
    seen
}

/// Builds the program that maximizes the uniform improvement `ε` of row `g`.
///
/// `support` restricts row `g` (layout `[o][g'][α]`). With `poisson` set and
/// `g` steady, the program also carries the Avoid Poisson equations of the
/// ssd chain with row `g` free, bilinear in `ω`, and bounds the residual seen
/// from every steady I-state by `eps_feas`.
pub fn build_improvement_program(
    product: &ProductPomdp,
    sfsc: &Sfsc,
    eval: &Evaluation,
    g: usize,
    config: &BpiConfig,
    support: Option<&[bool]>,
    poisson: Option<BilinearMode>,
) -> Result<ImprovementProgram, Error> {
    let (ns, ng, na, no) = (
        product.n_states(),
        sfsc.n_istates(),
        product.n_actions(),
        product.n_observations(),
    );
    if g >= ng {
        return Err(Error::UnknownState(g));
    }
    let rewards = LtlRewards::new(product, sfsc.steady(), config.beta);
    let beta = config.beta;
    let mut allowed = admissible(sfsc, g);
    if let Some(sup) = support {
        for (a, &b) in allowed.iter_mut().zip(sup) {
            *a &= b;
        }
    }
    let full = poisson == Some(BilinearMode::Full) && sfsc.is_steady(g);
    let q = lookahead(product, &eval.values, ng);

    let mut bp = BilinearProgram::new(Sense::Maximize);
    let cap = 1.0 / (1.0 - beta) + 1.0;
    let epsilon = bp.lp.add_var("eps", -cap, cap);
    bp.lp.add_objective(epsilon, 1.0);

    let mut omega = vec![None; no * ng * na];
    for o in 0..no {
        for gn in 0..ng {
            for a in 0..na {
                let k = (o * ng + gn) * na + a;
                if allowed[k] || full {
                    let ub = if allowed[k] { 1.0 } else { 0.0 };
                    omega[k] = Some(bp.lp.add_var(format!("w_{o}_{gn}_{a}"), 0.0, ub));
                }
            }
        }
        let terms: Vec<(usize, f64)> = omega[o * ng * na..(o + 1) * ng * na]
            .iter()
            .flatten()
            .map(|&v| (v, 1.0))
            .collect();
        if terms.is_empty() {
            return Err(Error::InvalidController(format!(
                "I-state {g} has no admissible successor under observation {o}"
            )));
        }
        bp.lp.add_constraint(format!("simplex_{o}"), terms, Relation::Eq, 1.0);
    }

    let mut improvement_rows = Vec::with_capacity(ns);
    let mut improvable = Vec::with_capacity(ns);
    for s in 0..ns {
        let r = rewards.repeat[s] * rewards.istate[g];
        let v = eval.values[s * ng + g];
        let mut best = r;
        let mut terms = Vec::new();
        for o in (0..no).filter(|&o| product.observation(s, o) > 0.0) {
            let po = product.observation(s, o);
            let mut m = f64::NEG_INFINITY;
            for gn in 0..ng {
                for a in 0..na {
                    let k = (o * ng + gn) * na + a;
                    if let Some(var) = omega[k] {
                        let c = beta * po * q[(s * ng + gn) * na + a];
                        if c != 0.0 {
                            terms.push((var, -c));
                        }
                        if allowed[k] {
                            m = m.max(c);
                        }
                    }
                }
            }
            best += m;
        }
        let up = best - v > config.eps_improve;
        if up {
            terms.push((epsilon, 1.0));
        }
        improvable.push(up);
        improvement_rows.push(bp.lp.add_constraint(format!("improve_{s}"), terms, Relation::Le, r - v));
    }

    if poisson.is_some() && sfsc.is_steady(g) {
        add_poisson_block(&mut bp, product, sfsc, eval, g, config, &allowed, &omega, full, &rewards);
    }

    Ok(ImprovementProgram {
        bp,
        epsilon,
        omega,
        improvement_rows,
        improvable,
    })
}

#[allow(clippy::too_many_arguments)]
fn add_poisson_block(
    bp: &mut BilinearProgram,
    product: &ProductPomdp,
    sfsc: &Sfsc,
    eval: &Evaluation,
    g: usize,
    config: &BpiConfig,
    allowed: &[bool],
    omega: &[Option<usize>],
    full: bool,
    rewards: &LtlRewards,
) {
    let (ns, ng, na, no) = (
        product.n_states(),
        sfsc.n_istates(),
        product.n_actions(),
        product.n_observations(),
    );
    let n = ns * ng;
    let inside = if full {
        vec![true; n]
    } else {
        closed_set(product, sfsc, eval, g, allowed)
    };
    let (m1, m2) = (config.m1, config.m2);
    let mut gain = vec![usize::MAX; n];
    let mut bias = vec![usize::MAX; n];
    for i in (0..n).filter(|&i| inside[i]) {
        gain[i] = bp.lp.add_var(format!("gain_{i}"), 0.0, 1.0);
        bias[i] = bp.lp.add_var(format!("bias_{i}"), -m1, m2);
    }
    let charge = rewards.avoid_charge();
    for i in (0..n).filter(|&i| inside[i]) {
        let s = i / ng;
        if i % ng != g {
            let row = eval.ssd.row(i);
            let mut tg = vec![(gain[i], 1.0)];
            let mut tv = vec![(bias[i], 1.0), (gain[i], 1.0)];
            for (j, &p) in row.iter().enumerate() {
                if p > 0.0 {
                    tg.push((gain[j], -p));
                    tv.push((bias[j], -p));
                }
            }
            bp.lp.add_constraint(format!("pe_gain_{i}"), tg, Relation::Eq, 0.0);
            bp.lp.add_constraint(format!("pe_bias_{i}"), tv, Relation::Eq, charge[i]);
            continue;
        }
        let mut pg = Vec::new();
        let mut pv = Vec::new();
        for gn in 0..ng {
            for a in 0..na {
                let used = full
                    || (0..no).any(|o| {
                        product.observation(s, o) > 0.0 && allowed[(o * ng + gn) * na + a]
                    });
                if !used {
                    continue;
                }
                let wg = bp.lp.add_var(format!("next_gain_{s}_{a}_{gn}"), 0.0, 1.0);
                let wv = bp.lp.add_var(format!("next_bias_{s}_{a}_{gn}"), -m1, m2);
                let mut dg = vec![(wg, 1.0)];
                let mut dv = vec![(wv, 1.0)];
                for (sn, &p) in product.modified_row(s, a).iter().enumerate() {
                    if p > 0.0 {
                        dg.push((gain[sn * ng + gn], -p));
                        dv.push((bias[sn * ng + gn], -p));
                    }
                }
                bp.lp.add_constraint(format!("def_gain_{s}_{a}_{gn}"), dg, Relation::Eq, 0.0);
                bp.lp.add_constraint(format!("def_bias_{s}_{a}_{gn}"), dv, Relation::Eq, 0.0);
                for o in 0..no {
                    let po = product.observation(s, o);
                    let Some(w) = omega[(o * ng + gn) * na + a] else {
                        continue;
                    };
                    if !full && (po == 0.0 || !allowed[(o * ng + gn) * na + a]) {
                        continue;
                    }
                    let x = bp.add_product(w, wg);
                    let y = bp.add_product(w, wv);
                    pg.push((x, -po));
                    pv.push((y, -po));
                }
            }
        }
        bp.add_constraint(
            format!("pe_gain_{i}"),
            vec![(gain[i], 1.0)],
            &pg,
            Relation::Eq,
            0.0,
        );
        bp.add_constraint(
            format!("pe_bias_{i}"),
            vec![(bias[i], 1.0), (gain[i], 1.0)],
            &pv,
            Relation::Eq,
            charge[i],
        );
    }
    let n_ss = sfsc.n_steady() as f64;
    for h in (0..ng).filter(|&h| sfsc.is_steady(h)) {
        let terms: Vec<(usize, f64)> = (0..ns)
            .map(|s| (s * ng + h, eval.seed[s * ng + h] * n_ss))
            .filter(|&(i, p)| p > 0.0 && inside[i])
            .map(|(i, p)| (gain[i], p))
            .collect();
        bp.lp.add_constraint(format!("feasible_{h}"), terms, Relation::Le, config.eps_feas);
    }
}

fn solve(
    prog: &ImprovementProgram,
    solver: &dyn LpSolver,
) -> Result<Option<LpSolution>, Error> {
    let lp = if prog.bp.products.is_empty() {
        prog.bp.lp.clone()
    } else {
        relax_bilinear(&prog.bp)?.lp
    };
    match solver.solve(&lp, true) {
        Ok(sol) => Ok(Some(sol)),
        Err(LpError::Infeasible | LpError::IterationLimit | LpError::NumericalBreakdown(_)) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

/// Rows of I-state `g` read off a solution, clipped and renormalized.
fn extract_rows(prog: &ImprovementProgram, sfsc: &Sfsc, g: usize, x: &[f64]) -> Vec<f64> {
    let (ng, na, no) = (sfsc.n_istates(), sfsc.n_actions(), sfsc.n_observations());
    let w = ng * na;
    let mut rows = vec![0.0; no * w];
    for o in 0..no {
        let row = &mut rows[o * w..(o + 1) * w];
        for (k, cell) in row.iter_mut().enumerate() {
            if let Some(v) = prog.omega[o * w + k] {
                let p = x[v].clamp(0.0, 1.0);
                *cell = if p < 1e-12 { 0.0 } else { p };
            }
        }
        let total: f64 = row.iter().sum();
        if total > 0.0 {
            row.iter_mut().for_each(|p| *p /= total);
        } else {
            row.copy_from_slice(sfsc.row(g, o));
        }
    }
    rows
}

fn tangent_beliefs(prog: &ImprovementProgram, product: &ProductPomdp, sol: Option<&LpSolution>) -> Vec<Vec<f64>> {
    let weights: Vec<f64> = match sol {
        Some(sol) if !sol.duals.is_empty() => prog
            .improvement_rows
            .iter()
            .zip(&prog.improvable)
            .map(|(&r, &up)| if up { sol.duals[r].abs() } else { 0.0 })
            .collect(),
        _ => Vec::new(),
    };
    let total: f64 = weights.iter().sum();
    if total > 1e-12 {
        vec![weights.iter().map(|w| w / total).collect()]
    } else {
        vec![product.initial().to_vec()]
    }
}

/// Exact check of a candidate: feasible, no worse anywhere, and better
/// somewhere by at least `eps_improve`.
fn verify(
    product: &ProductPomdp,
    candidate: Sfsc,
    epsilon: f64,
    before: &Evaluation,
    config: &BpiConfig,
) -> Result<Option<ImproveOutcome>, Error> {
    let evaluation = evaluate(product, &candidate, config)?;
    let (mut worst, mut best) = (0.0f64, 0.0f64);
    for (new, old) in evaluation.values.iter().zip(&before.values) {
        worst = worst.min(new - old);
        best = best.max(new - old);
    }
    let accepted = evaluation.residual <= config.eps_feas
        && worst >= -1e-9
        && best >= config.eps_improve
        && evaluation.initial_value >= before.initial_value - 1e-9;
    if !accepted {
        return Ok(None);
    }
    Ok(Some(ImproveOutcome::Improved {
        sfsc: candidate,
        epsilon,
        evaluation: Box::new(evaluation),
    }))
}

/// Improvement by linear program alone, optionally over a restricted support.
pub fn improve_istate_lp(
    product: &ProductPomdp,
    sfsc: &Sfsc,
    eval: &Evaluation,
    g: usize,
    config: &BpiConfig,
    solver: &dyn LpSolver,
    support: Option<&[bool]>,
) -> Result<ImproveOutcome, Error> {
    let prog = build_improvement_program(product, sfsc, eval, g, config, support, None)?;
    run_program(product, sfsc, eval, g, config, solver, &prog).map(|(out, _)| out)
}

/// Returns the outcome and whether a candidate failed exact verification.
fn run_program(
    product: &ProductPomdp,
    sfsc: &Sfsc,
    eval: &Evaluation,
    g: usize,
    config: &BpiConfig,
    solver: &dyn LpSolver,
    prog: &ImprovementProgram,
) -> Result<(ImproveOutcome, bool), Error> {
    if !prog.improvable.iter().any(|&b| b) {
        return Ok((
            ImproveOutcome::Tangent {
                epsilon: 0.0,
                beliefs: tangent_beliefs(prog, product, None),
            },
            false,
        ));
    }
    let Some(sol) = solve(prog, solver)? else {
        return Ok((
            ImproveOutcome::Tangent {
                epsilon: 0.0,
                beliefs: tangent_beliefs(prog, product, None),
            },
            true,
        ));
    };
    let epsilon = sol.x[prog.epsilon];
    if epsilon > config.eps_improve {
        let rows = extract_rows(prog, sfsc, g, &sol.x);
        if let Ok(candidate) = sfsc.with_rows(g, &rows) {
            if let Some(out) = verify(product, candidate, epsilon, eval, config)? {
                return Ok((out, false));
            }
        }
        return Ok((
            ImproveOutcome::Tangent {
                epsilon,
                beliefs: tangent_beliefs(prog, product, Some(&sol)),
            },
            true,
        ));
    }
    Ok((
        ImproveOutcome::Tangent {
            epsilon,
            beliefs: tangent_beliefs(prog, product, Some(&sol)),
        },
        false,
    ))
}

/// One improvement step for I-state `g`.
///
/// Transient rows use the linear program. Steady rows solve the relaxed
/// bilinear program; a candidate that fails exact verification is retried
/// over the safe support when `support_fallback` is set.
pub fn improve_istate_bilinear(
    product: &ProductPomdp,
    sfsc: &Sfsc,
    eval: &Evaluation,
    g: usize,
    config: &BpiConfig,
    solver: &dyn LpSolver,
) -> Result<ImproveOutcome, Error> {
    if !sfsc.is_steady(g) {
        return improve_istate_lp(product, sfsc, eval, g, config, solver, None);
    }
    let prog = build_improvement_program(product, sfsc, eval, g, config, None, Some(config.bilinear_mode))?;
    let (out, rejected) = run_program(product, sfsc, eval, g, config, solver, &prog)?;
    if !rejected || !config.support_fallback {
        return Ok(out);
    }
    let Some(row) = row_safe_support(product, sfsc, g) else {
        return Ok(out);
    };
    let fallback = improve_istate_lp(product, sfsc, eval, g, config, solver, Some(&row))?;
    Ok(match fallback {
        ImproveOutcome::Improved { .. } => fallback,
        ImproveOutcome::Tangent { .. } => out,
    })
}

/// Safe support of row `g` with every other row held at its current support.
fn row_safe_support(product: &ProductPomdp, sfsc: &Sfsc, g: usize) -> Option<Vec<bool>> {
    let ng = sfsc.n_istates();
    let w = sfsc.n_observations() * ng * sfsc.n_actions();
    let mut mask: Vec<bool> = sfsc.omega_table().iter().map(|&p| p > 0.0).collect();
    mask[g * w..(g + 1) * w].copy_from_slice(&admissible(sfsc, g));
    let mut mutable = vec![false; ng];
    mutable[g] = true;
    let safe = safe_support(product, sfsc, &mutable, mask)?;
    Some(safe[g * w..(g + 1) * w].to_vec())
}
