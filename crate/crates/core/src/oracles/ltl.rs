//! LTL formulas evaluated directly on lasso words.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use crate::model::Letter;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Ltl {
    True,
    Ap(usize),
    Not(Box<Ltl>),
    And(Box<Ltl>, Box<Ltl>),
    Or(Box<Ltl>, Box<Ltl>),
    Next(Box<Ltl>),
    Until(Box<Ltl>, Box<Ltl>),
}

impl Ltl {
    pub fn not(f: Ltl) -> Ltl {
        Ltl::Not(Box::new(f))
    }
    pub fn and(a: Ltl, b: Ltl) -> Ltl {
        Ltl::And(Box::new(a), Box::new(b))
    }
    pub fn or(a: Ltl, b: Ltl) -> Ltl {
        Ltl::Or(Box::new(a), Box::new(b))
    }
    pub fn next(f: Ltl) -> Ltl {
        Ltl::Next(Box::new(f))
    }
    pub fn until(a: Ltl, b: Ltl) -> Ltl {
        Ltl::Until(Box::new(a), Box::new(b))
    }
    pub fn eventually(f: Ltl) -> Ltl {
        Ltl::until(Ltl::True, f)
    }
    pub fn always(f: Ltl) -> Ltl {
        Ltl::not(Ltl::eventually(Ltl::not(f)))
    }
}

/// `□◇a ∧ □◇b ∧ □¬c` with `a, b, c` as propositions 0, 1, 2.
pub fn recurrence_formula() -> Ltl {
    let gf = |p| Ltl::always(Ltl::eventually(Ltl::Ap(p)));
    Ltl::and(Ltl::and(gf(0), gf(1)), Ltl::always(Ltl::not(Ltl::Ap(2))))
}

/// `◇□b ∧ □¬c` with `b, c` as propositions 1, 2.
pub fn persistence_formula() -> Ltl {
    Ltl::and(
        Ltl::eventually(Ltl::always(Ltl::Ap(1))),
        Ltl::always(Ltl::not(Ltl::Ap(2))),
    )
}

/// Truth of `f` at position 0 of `prefix · cycle^ω`. Panics on an empty cycle.
pub fn holds(f: &Ltl, prefix: &[Letter], cycle: &[Letter]) -> bool {
    assert!(!cycle.is_empty(), "lasso cycle must be nonempty");
    let word: Vec<Letter> = prefix.iter().chain(cycle).copied().collect();
    let succ = |i: usize| if i + 1 < word.len() { i + 1 } else { prefix.len() };
    truth(f, &word, &succ)[0]
}

fn truth(f: &Ltl, word: &[Letter], succ: &dyn Fn(usize) -> usize) -> Vec<bool> {
    let n = word.len();
    match f {
        Ltl::True => vec![true; n],
        Ltl::Ap(p) => word.iter().map(|&l| l & (1 << p) != 0).collect(),
        Ltl::Not(a) => truth(a, word, succ).into_iter().map(|b| !b).collect(),
        Ltl::And(a, b) => {
            let (x, y) = (truth(a, word, succ), truth(b, word, succ));
            x.iter().zip(&y).map(|(p, q)| *p && *q).collect()
        }
        Ltl::Or(a, b) => {
            let (x, y) = (truth(a, word, succ), truth(b, word, succ));
            x.iter().zip(&y).map(|(p, q)| *p || *q).collect()
        }
        Ltl::Next(a) => {
            let x = truth(a, word, succ);
            (0..n).map(|i| x[succ(i)]).collect()
        }
        Ltl::Until(a, b) => {
            let (x, y) = (truth(a, word, succ), truth(b, word, succ));
            // least fixpoint of u = y ∨ (x ∧ u∘succ)
            let mut u = y.clone();
            for _ in 0..=n {
                u = (0..n).map(|i| y[i] || (x[i] && u[succ(i)])).collect();
            }
            u
        }
    }
}

/// Every lasso with `|prefix| ≤ max_prefix` and `1 ≤ |cycle| ≤ max_cycle`
/// over `n_letters` letters.
pub fn all_lassos(n_letters: Letter, max_prefix: usize, max_cycle: usize) -> Vec<(Vec<Letter>, Vec<Letter>)> {
    let words = |len: usize| -> Vec<Vec<Letter>> {
        let mut out = vec![Vec::new()];
        for _ in 0..len {
            out = out
                .into_iter()
                .flat_map(|w| {
                    (0..n_letters).map(move |l| {
                        let mut w = w.clone();
                        w.push(l);
                        w
                    })
                })
                .collect();
        }
        out
    };
    let mut out = Vec::new();
    for p in 0..=max_prefix {
        let prefixes = words(p);
        for c in 1..=max_cycle {
            for cycle in words(c) {
                for prefix in &prefixes {
                    out.push((prefix.clone(), cycle.clone()));
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn until_and_always_on_small_words() {
        let a = Ltl::Ap(0);
        assert!(holds(&Ltl::eventually(a.clone()), &[0, 0], &[1]));
        assert!(!holds(&Ltl::eventually(a.clone()), &[0, 0], &[0]));
        assert!(holds(&Ltl::always(Ltl::eventually(a.clone())), &[0], &[0, 1]));
        assert!(!holds(&Ltl::always(Ltl::eventually(a.clone())), &[1, 1], &[0]));
        assert!(holds(&Ltl::next(a.clone()), &[0, 1], &[0]));
    }

    #[test]
    fn lasso_count() {
        // prefixes 1 + 2 + 4, cycles 2 + 4
        assert_eq!(all_lassos(2, 2, 2).len(), 7 * 6);
    }
}
