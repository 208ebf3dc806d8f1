use alloc::vec;
use alloc::vec::Vec;

use crate::controller::Sfsc;
use crate::product::ProductPomdp;

/// Successor lists of the ssd graph restricted to steady I-states, where row
/// `(g, o)` may use exactly the `(g', α)` pairs flagged in `support`.
fn steady_graph(product: &ProductPomdp, sfsc: &Sfsc, support: &[bool]) -> Vec<Vec<usize>> {
    let (ns, ng, na, no) = (
        product.n_states(),
        sfsc.n_istates(),
        product.n_actions(),
        product.n_observations(),
    );
    let mut succ = vec![Vec::new(); ns * ng];
    for s in 0..ns {
        for h in (0..ng).filter(|&h| sfsc.is_steady(h)) {
            let out = &mut succ[s * ng + h];
            for o in (0..no).filter(|&o| product.observation(s, o) > 0.0) {
                let base = (h * no + o) * ng * na;
                for gn in 0..ng {
                    for a in 0..na {
                        if !support[base + gn * na + a] {
                            continue;
                        }
                        for (sn, &p) in product.modified_row(s, a).iter().enumerate() {
                            if p > 0.0 {
                                out.push(sn * ng + gn);
                            }
                        }
                    }
                }
            }
            out.sort_unstable();
            out.dedup();
        }
    }
    succ
}

fn closure(succ: &[Vec<usize>], start: impl Iterator<Item = usize>) -> Vec<bool> {
    let mut seen = vec![false; succ.len()];
    let mut stack: Vec<usize> = start.collect();
    for &i in &stack {
        seen[i] = true;
    }
    while let Some(i) = stack.pop() {
        for &j in &succ[i] {
            if !seen[j] {
                seen[j] = true;
                stack.push(j);
            }
        }
    }
    seen
}

/// Steady global states that reach `Avoid × G^ss` through fixed rows alone.
fn doomed(
    product: &ProductPomdp,
    sfsc: &Sfsc,
    mutable: &[bool],
    succ: &[Vec<usize>],
) -> Vec<bool> {
    let ng = sfsc.n_istates();
    let mut bad: Vec<bool> = (0..succ.len())
        .map(|i| product.avoid()[i / ng] && sfsc.is_steady(i % ng))
        .collect();
    loop {
        let mut changed = false;
        for i in 0..succ.len() {
            if bad[i] || mutable[i % ng] || !sfsc.is_steady(i % ng) {
                continue;
            }
            if succ[i].iter().any(|&j| bad[j]) {
                bad[i] = true;
                changed = true;
            }
        }
        if !changed {
            return bad;
        }
    }
}

/// A support, contained in `support`, under which no global state reachable
/// from `Repeat × G^ss` can reach `Avoid × G^ss`. Pairs that step from a
/// reachable state into Avoid, or into a state whose fixed rows lead there,
/// are dropped until nothing changes.
///
/// Only rows of I-states flagged in `mutable` are pruned. Returns `None` when
/// a reachable row loses every pair or when the fixed rows already reach
/// Avoid. `support` uses the layout of [`Sfsc::omega_table`].
pub fn safe_support(
    product: &ProductPomdp,
    sfsc: &Sfsc,
    mutable: &[bool],
    mut support: Vec<bool>,
) -> Option<Vec<bool>> {
    let (ns, ng, na, no) = (
        product.n_states(),
        sfsc.n_istates(),
        product.n_actions(),
        product.n_observations(),
    );
    let steady_of = |i: usize| sfsc.is_steady(i % ng);
    loop {
        let succ = steady_graph(product, sfsc, &support);
        let reach = closure(
            &succ,
            (0..ns * ng).filter(|&i| product.repeat()[i / ng] && steady_of(i)),
        );
        let bad = doomed(product, sfsc, mutable, &succ);
        let bad = |i: usize| bad[i];
        let mut removed = false;
        for s in 0..ns {
            for h in 0..ng {
                let i = s * ng + h;
                if !reach[i] || !mutable[h] || product.avoid()[s] {
                    continue;
                }
                for o in (0..no).filter(|&o| product.observation(s, o) > 0.0) {
                    let base = (h * no + o) * ng * na;
                    for gn in 0..ng {
                        for a in 0..na {
                            let k = base + gn * na + a;
                            if !support[k] {
                                continue;
                            }
                            let hits = product
                                .modified_row(s, a)
                                .iter()
                                .enumerate()
                                .any(|(sn, &p)| p > 0.0 && bad(sn * ng + gn));
                            if hits {
                                support[k] = false;
                                removed = true;
                            }
                        }
                    }
                    if support[base..base + ng * na].iter().all(|&b| !b) {
                        return None;
                    }
                }
            }
        }
        if !removed {
            let unsafe_left = (0..ns * ng).any(|i| reach[i] && bad(i));
            return if unsafe_left { None } else { Some(support) };
        }
    }
}

/// Pairs `(g', α)` that may carry mass in row `g` without violating the
/// steady structure.
pub(crate) fn admissible(sfsc: &Sfsc, g: usize) -> Vec<bool> {
    let (ng, na, no) = (sfsc.n_istates(), sfsc.n_actions(), sfsc.n_observations());
    let mut out = vec![true; no * ng * na];
    if sfsc.is_steady(g) {
        for o in 0..no {
            for gn in (0..ng).filter(|&gn| !sfsc.is_steady(gn)) {
                for a in 0..na {
                    out[(o * ng + gn) * na + a] = false;
                }
            }
        }
    }
    out
}

/// Full-controller support mask with every admissible pair enabled.
pub(crate) fn admissible_all(sfsc: &Sfsc) -> Vec<bool> {
    (0..sfsc.n_istates()).flat_map(|g| admissible(sfsc, g)).collect()
}

/// Rows proportional to `omega` on the mask, or uniform on it where `omega`
/// puts no mass there.
pub(crate) fn restrict_rows(omega: &[f64], mask: &[bool], width: usize) -> Vec<f64> {
    let mut out = vec![0.0; omega.len()];
    for (k, row) in out.chunks_mut(width).enumerate() {
        let src = &omega[k * width..(k + 1) * width];
        let m = &mask[k * width..(k + 1) * width];
        let mass: f64 = src.iter().zip(m).filter(|(_, &b)| b).map(|(p, _)| p).sum();
        let count = m.iter().filter(|&&b| b).count();
        for j in 0..width {
            if !m[j] {
                continue;
            }
            row[j] = if mass > 1e-12 {
                src[j] / mass
            } else {
                1.0 / count as f64
            };
        }
        if count == 0 {
            row.copy_from_slice(src);
        }
    }
    out
}
