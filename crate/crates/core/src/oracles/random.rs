//! Random instance generators for property and acceptance tests.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::controller::{Kappa, Sfsc};
use crate::linalg::Matrix;
use crate::model::{LabeledPomdp, PomdpParts};
use crate::optimize::{LinearProgram, Relation, Sense};
use crate::rabin::{Dra, RabinPair};

/// A probability vector of length `n` with roughly `density·n` nonzeros,
/// always at least one.
pub fn random_distribution(rng: &mut impl Rng, n: usize, density: f64) -> Vec<f64> {
    let mut w: Vec<f64> = (0..n)
        .map(|_| if rng.gen_bool(density) { rng.gen_range(0.05..1.0) } else { 0.0 })
        .collect();
    if w.iter().all(|&x| x == 0.0) {
        w[rng.gen_range(0..n)] = 1.0;
    }
    let z: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= z);
    w
}

fn closed_rows(rng: &mut impl Rng, t: &mut Matrix, members: &[usize]) {
    let periodic = members.len() > 1 && rng.gen_bool(0.25);
    for (k, &i) in members.iter().enumerate() {
        let next = members[(k + 1) % members.len()];
        if periodic {
            t[(i, next)] = 1.0;
            continue;
        }
        // a cycle through the class keeps it irreducible
        let local = random_distribution(rng, members.len(), 0.5);
        let mix = rng.gen_range(0.2..0.8);
        for (c, &j) in members.iter().enumerate() {
            t[(i, j)] += (1.0 - mix) * local[c];
        }
        t[(i, next)] += mix;
    }
}

/// A row-stochastic matrix with one closed class (`multichain == false`) or
/// two to three, plus transient states. Some classes are periodic.
pub fn random_chain(rng: &mut impl Rng, n: usize, multichain: bool) -> Matrix {
    let n_classes = if multichain { rng.gen_range(2..=3.min(n)) } else { 1 };
    let mut role: Vec<Option<usize>> = (0..n)
        .map(|i| {
            if i < n_classes {
                Some(i)
            } else if rng.gen_bool(0.35) {
                None
            } else {
                Some(rng.gen_range(0..n_classes))
            }
        })
        .collect();
    role.shuffle(rng);
    let mut t = Matrix::zeros(n, n);
    let mut recurrent = Vec::new();
    for c in 0..n_classes {
        let members: Vec<usize> = (0..n).filter(|&i| role[i] == Some(c)).collect();
        closed_rows(rng, &mut t, &members);
        recurrent.extend(members);
    }
    for i in (0..n).filter(|&i| role[i].is_none()) {
        let row = random_distribution(rng, n, 0.4);
        let leak = rng.gen_range(0.1..0.6);
        let exit = *recurrent.choose(rng).expect("at least one closed class");
        for j in 0..n {
            t[(i, j)] = (1.0 - leak) * row[j];
        }
        t[(i, exit)] += leak;
    }
    t
}

/// A chain with `n_avoid` absorbing sinks at random positions, marked in
/// the returned mask. The other states form a random chain that may have
/// closed classes of its own.
pub fn random_ssd_chain(rng: &mut impl Rng, n: usize, n_avoid: usize) -> (Matrix, Vec<bool>) {
    let inner = n - n_avoid;
    let multichain = inner >= 2 && rng.gen_bool(0.5);
    let base = random_chain(rng, inner, multichain);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let (sinks, rest) = order.split_at(n_avoid);
    let mut avoid = vec![false; n];
    sinks.iter().for_each(|&i| avoid[i] = true);
    let mut t = Matrix::zeros(n, n);
    for &i in sinks {
        t[(i, i)] = 1.0;
    }
    for (a, &i) in rest.iter().enumerate() {
        let leak = if n_avoid > 0 && rng.gen_bool(0.6) { rng.gen_range(0.05..0.4) } else { 0.0 };
        for (b, &j) in rest.iter().enumerate() {
            t[(i, j)] = (1.0 - leak) * base[(a, b)];
        }
        if leak > 0.0 {
            let w = random_distribution(rng, n_avoid, 0.6);
            for (k, &j) in sinks.iter().enumerate() {
                t[(i, j)] += leak * w[k];
            }
        }
    }
    (t, avoid)
}

fn names(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

/// A labeled POMDP over propositions `a, b, c`.
pub fn random_pomdp(rng: &mut impl Rng, n_states: usize, n_actions: usize, n_obs: usize) -> LabeledPomdp {
    let mut transition = Vec::with_capacity(n_states * n_actions * n_states);
    for _ in 0..n_states * n_actions {
        transition.extend(random_distribution(rng, n_states, 0.5));
    }
    let mut observation = Vec::with_capacity(n_states * n_obs);
    for _ in 0..n_states {
        observation.extend(random_distribution(rng, n_obs, 0.6));
    }
    LabeledPomdp::new(PomdpParts {
        states: names("s", n_states),
        actions: names("a", n_actions),
        observations: names("o", n_obs),
        transition,
        observation,
        initial: random_distribution(rng, n_states, 0.5),
        props: vec!["a".into(), "b".into(), "c".into()],
        labels: (0..n_states).map(|_| rng.gen_range(0..8)).collect(),
        rewards: Vec::new(),
    })
    .expect("generated rows are stochastic")
}

/// A DRA over `a, b, c` with one pair whose Repeat set is nonempty.
pub fn random_dra(rng: &mut impl Rng, n_states: usize) -> Dra {
    let delta = (0..n_states * 8).map(|_| rng.gen_range(0..n_states)).collect();
    let repeat_at = rng.gen_range(0..n_states);
    let mut pair = RabinPair {
        avoid: (0..n_states).map(|_| rng.gen_bool(0.3)).collect(),
        repeat: (0..n_states).map(|_| rng.gen_bool(0.4)).collect(),
    };
    pair.repeat[repeat_at] = true;
    pair.avoid[repeat_at] = false;
    Dra::new(
        names("q", n_states),
        vec!["a".into(), "b".into(), "c".into()],
        delta,
        0,
        vec![pair],
    )
    .expect("generated automaton is total")
}

/// An sFSC with `n_tr` transient and `n_ss` steady I-states obeying the
/// steady-to-transient structure constraint.
pub fn random_sfsc(rng: &mut impl Rng, n_obs: usize, n_actions: usize, n_tr: usize, n_ss: usize) -> Sfsc {
    let mut steady = vec![false; n_tr];
    steady.extend(vec![true; n_ss]);
    let ng = steady.len();
    let mut omega = Vec::with_capacity(ng * n_obs * ng * n_actions);
    for &from_steady in &steady {
        for _ in 0..n_obs {
            let allowed: Vec<usize> = (0..ng).filter(|&g| !from_steady || steady[g]).collect();
            let w = random_distribution(rng, allowed.len() * n_actions, 0.5);
            let mut row = vec![0.0; ng * n_actions];
            for (k, &g) in allowed.iter().enumerate() {
                row[g * n_actions..(g + 1) * n_actions].copy_from_slice(&w[k * n_actions..(k + 1) * n_actions]);
            }
            omega.extend(row);
        }
    }
    Sfsc::new(n_obs, n_actions, steady, omega, Kappa::Argmax).expect("generated controller is valid")
}

/// A feasible LP with finite variable bounds. Constraints are built around
/// an interior point so at least that point is feasible.
pub fn random_lp(rng: &mut impl Rng, n_vars: usize, n_constraints: usize) -> LinearProgram {
    let sense = if rng.gen_bool(0.5) { Sense::Maximize } else { Sense::Minimize };
    let mut lp = LinearProgram::new(sense);
    let mut x0 = Vec::with_capacity(n_vars);
    for j in 0..n_vars {
        let lo = rng.gen_range(-5.0..0.0);
        let hi = rng.gen_range(0.5..5.0);
        lp.add_var(format!("x{j}"), lo, hi);
        x0.push(rng.gen_range(lo..hi));
        lp.add_objective(j, rng.gen_range(-3.0..3.0));
    }
    let mut n_eq = 0;
    for i in 0..n_constraints {
        let mut terms = Vec::new();
        for j in 0..n_vars {
            if rng.gen_bool(0.7) {
                terms.push((j, rng.gen_range(-4.0..4.0)));
            }
        }
        if terms.is_empty() {
            let j = rng.gen_range(0..n_vars);
            terms.push((j, rng.gen_range(0.5..4.0)));
        }
        let at: f64 = terms.iter().map(|&(j, a)| a * x0[j]).sum();
        let slack = rng.gen_range(0.0..2.0);
        let (relation, rhs) = match rng.gen_range(0..5) {
            0 if n_eq + 1 < n_vars => {
                n_eq += 1;
                (Relation::Eq, at)
            }
            1 | 2 => (Relation::Ge, at - slack),
            _ => (Relation::Le, at + slack),
        };
        lp.add_constraint(format!("c{i}"), terms, relation, rhs);
    }
    lp
}
