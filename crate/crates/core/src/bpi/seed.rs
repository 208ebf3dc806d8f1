use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::support::{admissible_all, restrict_rows, safe_support};
use super::BpiConfig;
use crate::chain::{build_global_chain, gain, ChainKind};
use crate::controller::{Kappa, Sfsc};
use crate::linalg::dot;
use crate::optimize::{relax_bilinear, BilinearProgram, LpError, LpSolver, Relation, Sense};
use crate::product::{steady_state_seed, LtlRewards, ProductPomdp};
use crate::Error;

/// A feasible seed controller and how it was found.
#[derive(Debug, Clone, PartialEq)]
pub struct SeedReport {
    pub sfsc: Sfsc,
    /// `(|G^tr|, |G^ss|)` for every size tried, in order.
    pub attempts: Vec<(usize, usize)>,
    /// `max_{g ∈ G^ss} ι^φᵀ𝔤_g` for Repeat-visit frequency.
    pub objective: f64,
    pub residual: f64,
    /// Whether the reachability repair produced the seed.
    pub repaired: bool,
}

/// Uniform controller with `n_tr` transient I-states followed by `n_ss`
/// steady ones.
pub fn uniform_seed(product: &ProductPomdp, n_tr: usize, n_ss: usize) -> Result<Sfsc, Error> {
    let mut steady = vec![false; n_tr];
    steady.extend(core::iter::repeat(true).take(n_ss));
    Sfsc::uniform(product.n_observations(), product.n_actions(), steady)
}

/// Restricts every steady row to its greatest safe support, keeping the
/// relative weights of `sfsc` where it has mass there.
pub fn repair_steady_rows(product: &ProductPomdp, sfsc: &Sfsc) -> Result<Option<Sfsc>, Error> {
    let mut mask = admissible_all(sfsc);
    let ng = sfsc.n_istates();
    let w = sfsc.n_observations() * ng * sfsc.n_actions();
    for g in (0..ng).filter(|&g| !sfsc.is_steady(g)) {
        for (m, &p) in mask[g * w..(g + 1) * w].iter_mut().zip(&sfsc.omega_table()[g * w..(g + 1) * w]) {
            *m = p > 0.0;
        }
    }
    let Some(safe) = safe_support(product, sfsc, sfsc.steady(), mask) else {
        return Ok(None);
    };
    let omega = restrict_rows(sfsc.omega_table(), &safe, ng * sfsc.n_actions());
    Sfsc::new(
        sfsc.n_observations(),
        sfsc.n_actions(),
        sfsc.steady().to_vec(),
        omega,
        sfsc.kappa(),
    )
    .map(Some)
}

/// Exact `(objective, residual)` of a seed candidate.
pub(crate) fn seed_quality(product: &ProductPomdp, sfsc: &Sfsc) -> Result<(f64, f64), Error> {
    let ng = sfsc.n_istates();
    let t = build_global_chain(product, sfsc, ChainKind::Ssd, 0)?.transition;
    let rewards = LtlRewards::new(product, sfsc.steady(), 0.5);
    let avoid = gain(&t, &rewards.avoid_charge())?;
    let repeat = gain(&t, &rewards.repeat_charge())?;
    let residual = dot(&steady_state_seed(product, sfsc.steady())?, &avoid);
    let objective = (0..ng)
        .filter(|&g| sfsc.is_steady(g))
        .map(|g| {
            product
                .initial()
                .iter()
                .enumerate()
                .map(|(s, &p)| p * repeat[s * ng + g])
                .sum::<f64>()
        })
        .fold(0.0, f64::max);
    Ok((objective, residual))
}

/// Number of products the relaxed seed program would carry.
fn seed_product_count(product: &ProductPomdp, n_ss: usize) -> usize {
    let (ns, na, no) = (product.n_states(), product.n_actions(), product.n_observations());
    let emitted: usize = (0..ns)
        .map(|s| (0..no).filter(|&o| product.observation(s, o) > 0.0).count())
        .sum();
    4 * emitted * n_ss * n_ss * na
}

/// The relaxed seed program over all steady rows: both Poisson equations on
/// `S × G^ss`, the feasibility bound, and the Repeat-frequency objective seen
/// from `ι^φ`. Transient rows stay uniform.
fn relaxed_seed(
    product: &ProductPomdp,
    base: &Sfsc,
    config: &BpiConfig,
    solver: &dyn LpSolver,
) -> Result<Option<Sfsc>, Error> {
    let (ns, ng, na, no) = (
        product.n_states(),
        base.n_istates(),
        product.n_actions(),
        product.n_observations(),
    );
    let ss: Vec<usize> = (0..ng).filter(|&g| base.is_steady(g)).collect();
    let n_ss = ss.len();
    let pos = |g: usize| ss.iter().position(|&h| h == g).unwrap_or(0);
    let mut bp = BilinearProgram::new(Sense::Maximize);
    // omega[(k*no + o)*n_ss + k2)*na + a] for steady positions k, k2
    let mut omega = Vec::with_capacity(n_ss * no * n_ss * na);
    for k in 0..n_ss {
        for o in 0..no {
            let first = bp.lp.n_vars();
            for k2 in 0..n_ss {
                for a in 0..na {
                    omega.push(bp.lp.add_var(format!("w_{k}_{o}_{k2}_{a}"), 0.0, 1.0));
                }
            }
            let terms = (first..bp.lp.n_vars()).map(|v| (v, 1.0)).collect();
            bp.lp.add_constraint(format!("simplex_{k}_{o}"), terms, Relation::Eq, 1.0);
        }
    }
    let rewards = LtlRewards::new(product, base.steady(), config.beta);
    let charges = [rewards.repeat_charge(), rewards.avoid_charge()];
    let (m1, m2) = (config.m1, config.m2);
    let mut gains = [vec![0; ns * n_ss], vec![0; ns * n_ss]];
    let mut biases = [vec![0; ns * n_ss], vec![0; ns * n_ss]];
    for q in 0..2 {
        for i in 0..ns * n_ss {
            gains[q][i] = bp.lp.add_var(format!("gain{q}_{i}"), 0.0, 1.0);
            biases[q][i] = bp.lp.add_var(format!("bias{q}_{i}"), -m1, m2);
        }
    }
    for q in 0..2 {
        // next-state expectations per (s, α, k2)
        let mut next_g = vec![0; ns * na * n_ss];
        let mut next_b = vec![0; ns * na * n_ss];
        for s in 0..ns {
            for a in 0..na {
                for k2 in 0..n_ss {
                    let idx = (s * na + a) * n_ss + k2;
                    next_g[idx] = bp.lp.add_var(format!("ng{q}_{idx}"), 0.0, 1.0);
                    next_b[idx] = bp.lp.add_var(format!("nb{q}_{idx}"), -m1, m2);
                    let mut dg = vec![(next_g[idx], 1.0)];
                    let mut db = vec![(next_b[idx], 1.0)];
                    for (sn, &p) in product.modified_row(s, a).iter().enumerate() {
                        if p > 0.0 {
                            dg.push((gains[q][sn * n_ss + k2], -p));
                            db.push((biases[q][sn * n_ss + k2], -p));
                        }
                    }
                    bp.lp.add_constraint(format!("defg{q}_{idx}"), dg, Relation::Eq, 0.0);
                    bp.lp.add_constraint(format!("defb{q}_{idx}"), db, Relation::Eq, 0.0);
                }
            }
        }
        for s in 0..ns {
            for k in 0..n_ss {
                let i = s * n_ss + k;
                let mut pg = Vec::new();
                let mut pb = Vec::new();
                for o in (0..no).filter(|&o| product.observation(s, o) > 0.0) {
                    let po = product.observation(s, o);
                    for k2 in 0..n_ss {
                        for a in 0..na {
                            let w = omega[((k * no + o) * n_ss + k2) * na + a];
                            let idx = (s * na + a) * n_ss + k2;
                            pg.push((bp.add_product(w, next_g[idx]), -po));
                            pb.push((bp.add_product(w, next_b[idx]), -po));
                        }
                    }
                }
                let c = charges[q][s * ng + ss[k]];
                bp.add_constraint(format!("peg{q}_{i}"), vec![(gains[q][i], 1.0)], &pg, Relation::Eq, 0.0);
                bp.add_constraint(
                    format!("peb{q}_{i}"),
                    vec![(biases[q][i], 1.0), (gains[q][i], 1.0)],
                    &pb,
                    Relation::Eq,
                    c,
                );
            }
        }
    }
    let seed = steady_state_seed(product, base.steady())?;
    let feas: Vec<(usize, f64)> = (0..ns)
        .flat_map(|s| ss.iter().map(move |&g| (s, g)))
        .filter(|&(s, g)| seed[s * ng + g] > 0.0)
        .map(|(s, g)| (gains[1][s * n_ss + pos(g)], seed[s * ng + g]))
        .collect();
    bp.lp.add_constraint("feasible", feas, Relation::Le, config.eps_feas);
    for (s, &p) in product.initial().iter().enumerate() {
        if p > 0.0 {
            for k in 0..n_ss {
                bp.lp.add_objective(gains[0][s * n_ss + k], p / n_ss as f64);
            }
        }
    }
    let relaxed = relax_bilinear(&bp)?;
    let sol = match solver.solve(&relaxed.lp, false) {
        Ok(sol) => sol,
        Err(LpError::Infeasible) => return Ok(None),
        Err(e) => return Err(e.into()),
    };
    let mut table = base.omega_table().to_vec();
    let w = ng * na;
    for k in 0..n_ss {
        let g = ss[k];
        for o in 0..no {
            let row = &mut table[(g * no + o) * w..(g * no + o + 1) * w];
            row.iter_mut().for_each(|p| *p = 0.0);
            for k2 in 0..n_ss {
                for a in 0..na {
                    let x = sol.x[omega[((k * no + o) * n_ss + k2) * na + a]].clamp(0.0, 1.0);
                    row[ss[k2] * na + a] = if x < 1e-12 { 0.0 } else { x };
                }
            }
            let total: f64 = row.iter().sum();
            if total > 0.0 {
                row.iter_mut().for_each(|p| *p /= total);
            } else {
                row.copy_from_slice(base.row(g, o));
            }
        }
    }
    Sfsc::new(no, na, base.steady().to_vec(), table, Kappa::Argmax).map(Some)
}

/// Searches for a feasible controller with `n_tr` transient I-states,
/// starting at `n_ss` steady ones and growing the steady partition up to
/// `n_max` I-states in total.
pub fn find_initial_controller(
    product: &ProductPomdp,
    n_tr: usize,
    n_ss: usize,
    config: &BpiConfig,
    solver: &dyn LpSolver,
) -> Result<SeedReport, Error> {
    config.validate()?;
    if n_ss == 0 {
        return Err(Error::EmptySteadyPartition);
    }
    let mut attempts = Vec::new();
    let mut k = n_ss;
    while n_tr + k <= config.n_max {
        attempts.push((n_tr, k));
        let base = uniform_seed(product, n_tr, k)?;
        let mut candidates = Vec::new();
        if seed_product_count(product, k) <= config.relaxation_limit {
            if let Some(c) = relaxed_seed(product, &base, config, solver)? {
                candidates.push((c, false));
            }
        }
        if config.seed_repair {
            let from = candidates.first().map(|(c, _)| c.clone());
            for start in from.iter().chain(core::iter::once(&base)) {
                if let Some(c) = repair_steady_rows(product, start)? {
                    candidates.push((c, true));
                }
            }
        }
        for (sfsc, repaired) in candidates {
            let (objective, residual) = seed_quality(product, &sfsc)?;
            if residual <= config.eps_feas && objective > config.eps_improve {
                return Ok(SeedReport {
                    sfsc,
                    attempts,
                    objective,
                    residual,
                    repaired,
                });
            }
        }
        k += 1;
    }
    Err(Error::Infeasible(attempts))
}
