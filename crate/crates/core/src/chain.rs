//! Global Markov chains of a closed loop and their analytics.
//!
//! Global states are ordered product-state major: `[s, g]` has index
//! `s·|G| + g`.

use alloc::vec;
use alloc::vec::Vec;

use crate::controller::Sfsc;
use crate::linalg::{Lu, Matrix};
use crate::product::ProductPomdp;
use crate::Error;

/// Residual tolerance for both parts of the Poisson equation.
pub const POISSON_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainKind {
    /// Every row uses the product transition.
    Plain,
    /// Steady I-states see Avoid states as sinks and never return to
    /// transient I-states.
    Ssd,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GlobalChain {
    pub n_product: usize,
    pub n_istates: usize,
    pub kind: ChainKind,
    pub transition: Matrix,
    pub initial: Vec<f64>,
}

impl GlobalChain {
    /// Wraps an arbitrary row-stochastic matrix as a chain with one I-state.
    pub fn from_matrix(transition: Matrix, initial: Vec<f64>) -> Self {
        Self {
            n_product: transition.rows(),
            n_istates: 1,
            kind: ChainKind::Plain,
            transition,
            initial,
        }
    }

    pub fn n_states(&self) -> usize {
        self.transition.rows()
    }

    pub fn index(&self, s: usize, g: usize) -> usize {
        s * self.n_istates + g
    }
}

/// Builds the closed-loop chain. The initial distribution places the product
/// initial distribution on I-state `g0`.
pub fn build_global_chain(
    product: &ProductPomdp,
    sfsc: &Sfsc,
    kind: ChainKind,
    g0: usize,
) -> Result<GlobalChain, Error> {
    let (ns, ng, na, no) = (
        product.n_states(),
        sfsc.n_istates(),
        product.n_actions(),
        product.n_observations(),
    );
    if sfsc.n_observations() != no || sfsc.n_actions() != na {
        return Err(Error::InvalidController(
            "controller and product disagree on observations or actions".into(),
        ));
    }
    if g0 >= ng {
        return Err(Error::UnknownState(g0));
    }
    let n = ns * ng;
    let mut t = Matrix::zeros(n, n);
    for s in 0..ns {
        for g in 0..ng {
            let steady = kind == ChainKind::Ssd && sfsc.is_steady(g);
            let row = t.row_mut(s * ng + g);
            for o in 0..no {
                let po = product.observation(s, o);
                if po == 0.0 {
                    continue;
                }
                for gn in 0..ng {
                    for a in 0..na {
                        let w = sfsc.omega(g, o, gn, a);
                        if w == 0.0 {
                            continue;
                        }
                        if steady && !sfsc.is_steady(gn) {
                            return Err(Error::StructureViolation { from: g, to: gn });
                        }
                        let next = if steady {
                            product.modified_row(s, a)
                        } else {
                            product.transition_row(s, a)
                        };
                        for (sn, &p) in next.iter().enumerate() {
                            if p != 0.0 {
                                row[sn * ng + gn] += po * w * p;
                            }
                        }
                    }
                }
            }
        }
    }
    let mut initial = vec![0.0; n];
    for (s, &p) in product.initial().iter().enumerate() {
        initial[s * ng + g0] = p;
    }
    Ok(GlobalChain {
        n_product: ns,
        n_istates: ng,
        kind,
        transition: t,
        initial,
    })
}

/// Communicating classes of a chain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassDecomposition {
    pub classes: Vec<Vec<usize>>,
    pub recurrent: Vec<bool>,
    pub class_of: Vec<usize>,
}

impl ClassDecomposition {
    pub fn recurrent_classes(&self) -> impl Iterator<Item = (usize, &[usize])> {
        self.classes
            .iter()
            .enumerate()
            .filter(|&(c, _)| self.recurrent[c])
            .map(|(c, m)| (c, m.as_slice()))
    }

    pub fn transient_states(&self) -> Vec<usize> {
        (0..self.class_of.len())
            .filter(|&i| !self.recurrent[self.class_of[i]])
            .collect()
    }

    pub fn is_recurrent_state(&self, i: usize) -> bool {
        self.recurrent[self.class_of[i]]
    }
}

fn successors(t: &Matrix) -> Vec<Vec<usize>> {
    (0..t.rows())
        .map(|i| {
            t.row(i)
                .iter()
                .enumerate()
                .filter(|&(_, &p)| p > 0.0)
                .map(|(j, _)| j)
                .collect()
        })
        .collect()
}

/// Strongly connected components of the positive-transition digraph; a
/// component is recurrent iff no edge leaves it. Classes are listed in
/// order of their smallest member.
pub fn decompose_classes(t: &Matrix) -> ClassDecomposition {
    let n = t.rows();
    let adj = successors(t);
    // iterative Tarjan
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut comp = vec![usize::MAX; n];
    let mut n_comp = 0;
    let mut counter = 0;
    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        let mut work: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = counter;
        low[root] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut next)) = work.last_mut() {
            if *next < adj[v].len() {
                let w = adj[v][*next];
                *next += 1;
                if index[w] == usize::MAX {
                    index[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    work.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                work.pop();
                if let Some(&(u, _)) = work.last() {
                    low[u] = low[u].min(low[v]);
                }
                if low[v] == index[v] {
                    loop {
                        let w = stack.pop().expect("tarjan stack");
                        on_stack[w] = false;
                        comp[w] = n_comp;
                        if w == v {
                            break;
                        }
                    }
                    n_comp += 1;
                }
            }
        }
    }
    // renumber by smallest member
    let mut order = vec![usize::MAX; n_comp];
    let mut next_id = 0;
    for i in 0..n {
        if order[comp[i]] == usize::MAX {
            order[comp[i]] = next_id;
            next_id += 1;
        }
    }
    let class_of: Vec<usize> = comp.iter().map(|&c| order[c]).collect();
    let mut classes = vec![Vec::new(); n_comp];
    for (i, &c) in class_of.iter().enumerate() {
        classes[c].push(i);
    }
    let mut recurrent = vec![true; n_comp];
    for i in 0..n {
        if adj[i].iter().any(|&j| class_of[j] != class_of[i]) {
            recurrent[class_of[i]] = false;
        }
    }
    ClassDecomposition {
        classes,
        recurrent,
        class_of,
    }
}

/// Unique invariant probability measure of a closed class.
fn invariant_measure(t: &Matrix, class: &[usize]) -> Result<Vec<f64>, Error> {
    let k = class.len();
    // (I − T_C)ᵀ ν = 0 with the last equation replaced by Σν = 1
    let mut a = Matrix::zeros(k, k);
    for (r, &i) in class.iter().enumerate() {
        for (c, &j) in class.iter().enumerate() {
            let delta = if r == c { 1.0 } else { 0.0 };
            a[(c, r)] = delta - t[(i, j)];
        }
    }
    for c in 0..k {
        a[(k - 1, c)] = 1.0;
    }
    let mut b = vec![0.0; k];
    b[k - 1] = 1.0;
    Ok(Lu::factor(a)?.solve(&b))
}

/// Probability of eventual absorption into each recurrent class, per state.
/// Entry `[c][i]` is zero for non-recurrent `c`.
pub fn absorption_matrix(t: &Matrix, dec: &ClassDecomposition) -> Result<Vec<Vec<f64>>, Error> {
    let n = t.rows();
    let transient = dec.transient_states();
    let m = transient.len();
    let lu = if m > 0 {
        let mut a = Matrix::identity(m);
        for (r, &i) in transient.iter().enumerate() {
            for (c, &j) in transient.iter().enumerate() {
                a[(r, c)] -= t[(i, j)];
            }
        }
        Some(Lu::factor(a)?)
    } else {
        None
    };
    let mut out = vec![Vec::new(); dec.classes.len()];
    for (c, members) in dec.recurrent_classes() {
        let mut col = vec![0.0; n];
        members.iter().for_each(|&i| col[i] = 1.0);
        if let Some(lu) = &lu {
            let rhs: Vec<f64> = transient
                .iter()
                .map(|&i| members.iter().map(|&j| t[(i, j)]).sum())
                .collect();
            let x = lu.solve(&rhs);
            for (k, &i) in transient.iter().enumerate() {
                col[i] = x[k];
            }
        }
        out[c] = col;
    }
    Ok(out)
}

/// Cesàro limit `Π` of the powers of `t`, computed from class structure.
pub fn limiting_matrix(t: &Matrix) -> Result<Matrix, Error> {
    let dec = decompose_classes(t);
    limiting_matrix_with(t, &dec)
}

pub fn limiting_matrix_with(t: &Matrix, dec: &ClassDecomposition) -> Result<Matrix, Error> {
    let n = t.rows();
    let absorb = absorption_matrix(t, dec)?;
    let mut pi = Matrix::zeros(n, n);
    for (c, members) in dec.recurrent_classes() {
        let nu = invariant_measure(t, members)?;
        for i in 0..n {
            let a = absorb[c][i];
            if a == 0.0 {
                continue;
            }
            for (k, &j) in members.iter().enumerate() {
                pi[(i, j)] = a * nu[k];
            }
        }
    }
    Ok(pi)
}

/// `Z = (I − T + Π)⁻¹`.
pub fn fundamental_matrix(t: &Matrix, pi: &Matrix) -> Result<Matrix, Error> {
    Matrix::identity(t.rows()).sub(t).add(pi).inverse()
}

/// `H = Z(I − Π)`.
pub fn deviation_matrix(z: &Matrix, pi: &Matrix) -> Matrix {
    z.mul(&Matrix::identity(pi.rows()).sub(pi))
}

/// Solution `(𝔤, 𝔥)` of the Poisson equation `𝔤 = T𝔤`, `𝔥 + 𝔤 = r + T𝔥`
/// with `𝔤 = Πr` and `𝔥 = Hr`.
#[derive(Debug, Clone, PartialEq)]
pub struct PoissonSolution {
    pub gain: Vec<f64>,
    pub bias: Vec<f64>,
    pub charge: Vec<f64>,
    pub limiting: Matrix,
}

impl PoissonSolution {
    pub fn fundamental(&self, t: &Matrix) -> Result<Matrix, Error> {
        fundamental_matrix(t, &self.limiting)
    }

    pub fn deviation(&self, t: &Matrix) -> Result<Matrix, Error> {
        Ok(deviation_matrix(&self.fundamental(t)?, &self.limiting))
    }
}

/// Largest residual over both parts of the Poisson equation.
pub fn poisson_residual(t: &Matrix, charge: &[f64], gain: &[f64], bias: &[f64]) -> f64 {
    let tg = t.mul_vec(gain);
    let th = t.mul_vec(bias);
    let mut worst = 0.0f64;
    for i in 0..gain.len() {
        worst = worst
            .max((gain[i] - tg[i]).abs())
            .max((bias[i] + gain[i] - charge[i] - th[i]).abs());
    }
    worst
}

pub fn poisson_solve(t: &Matrix, charge: &[f64]) -> Result<PoissonSolution, Error> {
    let n = t.rows();
    if charge.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: charge.len(),
        });
    }
    let pi = limiting_matrix(t)?;
    let gain = pi.mul_vec(charge);
    let a = Matrix::identity(n).sub(t).add(&pi);
    let rhs: Vec<f64> = charge.iter().zip(&gain).map(|(r, g)| r - g).collect();
    let bias = Lu::factor(a)?.solve(&rhs);
    let residual = poisson_residual(t, charge, &gain, &bias);
    if !(residual <= POISSON_TOL) {
        return Err(Error::ResidualTooLarge(residual));
    }
    Ok(PoissonSolution {
        gain,
        bias,
        charge: charge.to_vec(),
        limiting: pi,
    })
}

/// Gain `Πr` alone, without the bias solve.
pub fn gain(t: &Matrix, charge: &[f64]) -> Result<Vec<f64>, Error> {
    let dec = decompose_classes(t);
    let absorb = absorption_matrix(t, &dec)?;
    let mut g = vec![0.0; t.rows()];
    for (c, members) in dec.recurrent_classes() {
        let nu = invariant_measure(t, members)?;
        let avg: f64 = members.iter().zip(&nu).map(|(&j, v)| v * charge[j]).sum();
        if avg == 0.0 {
            continue;
        }
        for (gi, a) in g.iter_mut().zip(&absorb[c]) {
            *gi += a * avg;
        }
    }
    Ok(g)
}

/// `ι'ᵀ𝔤` for the Poisson gain of `charge` on an ssd chain: the probability
/// of absorption into the charged sinks.
pub fn absorption_probability(chain: &GlobalChain, initial: &[f64], charge: &[f64]) -> Result<f64, Error> {
    let sol = poisson_solve(&chain.transition, charge)?;
    Ok(initial.iter().zip(&sol.gain).map(|(a, b)| a * b).sum())
}

/// Probability of ever visiting `target`, per start state, by the
/// first-passage linear system.
pub fn reach_probabilities(t: &Matrix, target: &[bool]) -> Result<Vec<f64>, Error> {
    let n = t.rows();
    // states with a positive-probability path into the target
    let mut pred = vec![Vec::new(); n];
    for (i, succ) in successors(t).into_iter().enumerate() {
        for j in succ {
            pred[j].push(i);
        }
    }
    let mut can = target.to_vec();
    let mut stack: Vec<usize> = (0..n).filter(|&i| target[i]).collect();
    while let Some(j) = stack.pop() {
        for &i in &pred[j] {
            if !can[i] {
                can[i] = true;
                stack.push(i);
            }
        }
    }
    let unknown: Vec<usize> = (0..n).filter(|&i| can[i] && !target[i]).collect();
    let mut x: Vec<f64> = target.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
    if unknown.is_empty() {
        return Ok(x);
    }
    let m = unknown.len();
    let mut a = Matrix::identity(m);
    let mut rhs = vec![0.0; m];
    for (r, &i) in unknown.iter().enumerate() {
        for (c, &j) in unknown.iter().enumerate() {
            a[(r, c)] -= t[(i, j)];
        }
        rhs[r] = (0..n).filter(|&j| target[j]).map(|j| t[(i, j)]).sum();
    }
    let sol = Lu::factor(a)?.solve(&rhs);
    for (k, &i) in unknown.iter().enumerate() {
        x[i] = sol[k];
    }
    Ok(x)
}

/// Recurrent classes flagged feasible for some Rabin pair, and the
/// probability of reaching each class from the chain's initial distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiFeasibility {
    pub decomposition: ClassDecomposition,
    /// Per class; always false for transient classes.
    pub flagged: Vec<bool>,
    /// Per class; zero for transient classes.
    pub reach: Vec<f64>,
    pub probability: f64,
}

pub fn phi_feasible_sets(chain: &GlobalChain, product: &ProductPomdp) -> Result<PhiFeasibility, Error> {
    let dec = decompose_classes(&chain.transition);
    let absorb = absorption_matrix(&chain.transition, &dec)?;
    let ng = chain.n_istates;
    let mut flagged = vec![false; dec.classes.len()];
    let mut reach = vec![0.0; dec.classes.len()];
    for (c, members) in dec.recurrent_classes() {
        flagged[c] = product.pairs().iter().any(|p| {
            let hits = |set: &[bool]| members.iter().any(|&i| set[i / ng]);
            hits(&p.repeat) && !hits(&p.avoid)
        });
        reach[c] = chain.initial.iter().zip(&absorb[c]).map(|(a, b)| a * b).sum();
    }
    let probability = reach
        .iter()
        .zip(&flagged)
        .filter(|&(_, &f)| f)
        .map(|(r, _)| r)
        .sum();
    Ok(PhiFeasibility {
        decomposition: dec,
        flagged,
        reach,
        probability,
    })
}

/// Largest deviation of any row sum from one.
pub fn row_sum_error(t: &Matrix) -> f64 {
    (0..t.rows())
        .map(|i| (t.row(i).iter().sum::<f64>() - 1.0).abs())
        .fold(0.0, f64::max)
}

/// `max |ΠT − Π|, |TΠ − Π|, |Π² − Π|`.
pub fn limiting_defect(t: &Matrix, pi: &Matrix) -> f64 {
    pi.mul(t)
        .max_abs_diff(pi)
        .max(t.mul(pi).max_abs_diff(pi))
        .max(pi.mul(pi).max_abs_diff(pi))
}
