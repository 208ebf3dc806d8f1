use alloc::vec::Vec;

use super::{BpiConfig, Evaluation};
use crate::chain::{build_global_chain, gain, ChainKind};
use crate::controller::{belief_value, value_at_belief, Sfsc};
use crate::product::{steady_state_slice, LtlRewards, ProductPomdp};
use crate::Error;

const DUPLICATE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum AddOutcome {
    Added { sfsc: Sfsc, count: usize },
    Nothing,
}

/// Distinct beliefs reachable from `b` in one step, over every observation
/// and action with positive likelihood.
pub fn forward_beliefs(product: &ProductPomdp, b: &[f64]) -> Vec<Vec<f64>> {
    let (ns, na, no) = (product.n_states(), product.n_actions(), product.n_observations());
    let mut out: Vec<Vec<f64>> = Vec::new();
    for o in 0..no {
        for a in 0..na {
            let mut next = alloc::vec![0.0; ns];
            for s in 0..ns {
                let w = product.observation(s, o) * b[s];
                if w == 0.0 {
                    continue;
                }
                for (sn, &p) in product.transition_row(s, a).iter().enumerate() {
                    next[sn] += w * p;
                }
            }
            let total: f64 = next.iter().sum();
            if total <= 1e-12 {
                continue;
            }
            next.iter_mut().for_each(|p| *p /= total);
            let dup = out.iter().any(|c| {
                c.iter()
                    .zip(&next)
                    .all(|(x, y)| (x - y).abs() <= DUPLICATE_TOL)
            });
            if !dup {
                out.push(next);
            }
        }
    }
    out
}

/// Keeps the `(g, α)` pairs a new steady I-state could commit to without
/// breaking feasibility. Each pair is tested on a phantom steady I-state
/// that always moves to `g` and plays `α`, with the phantom included in the
/// steady-state seed.
pub fn prune_candidates(
    product: &ProductPomdp,
    sfsc: &Sfsc,
    candidates: &[(usize, usize)],
    config: &BpiConfig,
) -> Result<Vec<(usize, usize)>, Error> {
    let slice = steady_state_slice(product)?;
    let ph = sfsc.n_istates();
    let mut kept = Vec::new();
    for &(g, a) in candidates {
        let trial = sfsc.with_deterministic_istate(true, g, a)?;
        let t = build_global_chain(product, &trial, ChainKind::Ssd, 0)?.transition;
        let rewards = LtlRewards::new(product, trial.steady(), config.beta);
        let gains = gain(&t, &rewards.avoid_charge())?;
        let ng = ph + 1;
        let residual: f64 = slice
            .iter()
            .enumerate()
            .map(|(s, &p)| p * gains[s * ng + ph])
            .sum();
        if residual <= config.eps_feas {
            kept.push((g, a));
        }
    }
    Ok(kept)
}

/// Adds deterministic I-states that improve the value at beliefs one step
/// past the tangent beliefs. Source I-states take turns, each contributing
/// its largest remaining improvement. A new I-state joins
/// the partition of the I-state whose tangent produced it. Steady
/// candidates only have to beat the steady I-states, since nothing else can
/// reach them.
pub fn add_istates(
    product: &ProductPomdp,
    sfsc: &Sfsc,
    eval: &Evaluation,
    tangents: &[(usize, Vec<f64>)],
    config: &BpiConfig,
) -> Result<AddOutcome, Error> {
    let ng = sfsc.n_istates();
    let na = product.n_actions();
    let budget = config.n_new.min(config.n_max.saturating_sub(ng));
    if budget == 0 {
        return Ok(AddOutcome::Nothing);
    }
    let all: Vec<(usize, usize)> = (0..ng).flat_map(|g| (0..na).map(move |a| (g, a))).collect();
    let steady_pairs: Vec<(usize, usize)> = all.iter().copied().filter(|&(g, _)| sfsc.is_steady(g)).collect();
    let mut safe: Option<Vec<(usize, usize)>> = None;
    // per source I-state: (gain, partition, successor, action)
    let mut ranked: Vec<Vec<(f64, bool, usize, usize)>> = alloc::vec![Vec::new(); ng];
    for (g, b) in tangents {
        let steady = sfsc.is_steady(*g);
        let candidates: &[(usize, usize)] = if steady {
            if safe.is_none() {
                safe = Some(prune_candidates(product, sfsc, &steady_pairs, config)?);
            }
            safe.as_deref().unwrap_or(&[])
        } else {
            &all
        };
        let r_new = if steady { 1.0 } else { 0.0 };
        for fwd in forward_beliefs(product, b) {
            let current = if steady {
                (0..ng)
                    .filter(|&h| sfsc.is_steady(h))
                    .map(|h| value_at_belief(&eval.values, ng, h, &fwd))
                    .fold(f64::NEG_INFINITY, f64::max)
            } else {
                belief_value(&eval.values, ng, &fwd)
            };
            let mut best: Option<(f64, usize, usize)> = None;
            for &(gs, a) in candidates {
                let v = backup(product, eval, ng, &fwd, r_new, config.beta, gs, a);
                if best.map_or(true, |(bv, _, _)| v > bv) {
                    best = Some((v, gs, a));
                }
            }
            if let Some((v, gs, a)) = best {
                if v > current + config.eps_improve {
                    ranked[*g].push((v - current, steady, gs, a));
                }
            }
        }
    }
    for list in ranked.iter_mut() {
        list.sort_by(|x, y| y.0.total_cmp(&x.0));
    }
    let mut added: Vec<(bool, usize, usize)> = Vec::new();
    let mut next = sfsc.clone();
    let mut cursor = alloc::vec![0usize; ng];
    'rounds: loop {
        let mut progressed = false;
        for (g, list) in ranked.iter().enumerate() {
            while let Some(&(_, steady, gs, a)) = list.get(cursor[g]) {
                cursor[g] += 1;
                if added.contains(&(steady, gs, a)) {
                    continue;
                }
                if added.len() >= budget {
                    break 'rounds;
                }
                next = next.with_deterministic_istate(steady, gs, a)?;
                added.push((steady, gs, a));
                progressed = true;
                break;
            }
        }
        if !progressed {
            break;
        }
    }
    if added.is_empty() {
        Ok(AddOutcome::Nothing)
    } else {
        Ok(AddOutcome::Added {
            sfsc: next,
            count: added.len(),
        })
    }
}

/// Value at `b` of a fresh I-state that plays `a` and moves to `gs`.
#[allow(clippy::too_many_arguments)]
fn backup(
    product: &ProductPomdp,
    eval: &Evaluation,
    ng: usize,
    b: &[f64],
    r_new: f64,
    beta: f64,
    gs: usize,
    a: usize,
) -> f64 {
    let repeat = product.repeat();
    let mut v = 0.0;
    for (s, &p) in b.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        let mut next = 0.0;
        for (sn, &t) in product.transition_row(s, a).iter().enumerate() {
            next += t * eval.values[sn * ng + gs];
        }
        let r = if repeat[s] { r_new } else { 0.0 };
        v += p * (r + beta * next);
    }
    v
}
