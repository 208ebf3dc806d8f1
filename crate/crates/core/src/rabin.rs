//! Deterministic Rabin automata over the alphabet `2^AP`.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::model::{Letter, MAX_PROPS};
use crate::Error;

/// One acceptance pair: a run accepts through this pair if it visits `avoid`
/// finitely often and `repeat` infinitely often.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RabinPair {
    pub avoid: Vec<bool>,
    pub repeat: Vec<bool>,
}

impl RabinPair {
    pub fn from_sets(n_states: usize, avoid: &[usize], repeat: &[usize]) -> Self {
        let mut p = Self {
            avoid: vec![false; n_states],
            repeat: vec![false; n_states],
        };
        avoid.iter().for_each(|&q| p.avoid[q] = true);
        repeat.iter().for_each(|&q| p.repeat[q] = true);
        p
    }
}

/// A deterministic Rabin automaton with a total transition function.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dra {
    states: Vec<String>,
    props: Vec<String>,
    /// `[state][letter]`.
    delta: Vec<usize>,
    initial: usize,
    pairs: Vec<RabinPair>,
}

impl Dra {
    /// Validates and builds an automaton. `delta` is indexed `[state][letter]`
    /// with `2^|props|` letters per state.
    pub fn new(
        states: Vec<String>,
        props: Vec<String>,
        delta: Vec<usize>,
        initial: usize,
        pairs: Vec<RabinPair>,
    ) -> Result<Self, Error> {
        let n = states.len();
        if props.len() > MAX_PROPS {
            return Err(Error::InvalidModel("too many atomic propositions".into()));
        }
        let letters = 1usize << props.len();
        if n == 0 || delta.len() != n * letters {
            return Err(Error::InvalidModel("transition function is not total".into()));
        }
        if let Some(&bad) = delta.iter().find(|&&q| q >= n) {
            return Err(Error::UnknownState(bad));
        }
        if initial >= n {
            return Err(Error::UnknownState(initial));
        }
        if pairs.is_empty() {
            return Err(Error::InvalidModel("at least one Rabin pair is required".into()));
        }
        if pairs.iter().any(|p| p.avoid.len() != n || p.repeat.len() != n) {
            return Err(Error::InvalidModel("Rabin pair sets must range over Q".into()));
        }
        Ok(Self {
            states,
            props,
            delta,
            initial,
            pairs,
        })
    }

    pub fn n_states(&self) -> usize {
        self.states.len()
    }
    pub fn state_names(&self) -> &[String] {
        &self.states
    }
    pub fn props(&self) -> &[String] {
        &self.props
    }
    pub fn n_letters(&self) -> usize {
        1 << self.props.len()
    }
    pub fn initial(&self) -> usize {
        self.initial
    }
    pub fn pairs(&self) -> &[RabinPair] {
        &self.pairs
    }

    /// `δ(q, letter)`.
    pub fn step(&self, q: usize, letter: Letter) -> Result<usize, Error> {
        if q >= self.n_states() {
            return Err(Error::UnknownState(q));
        }
        if letter as usize >= self.n_letters() {
            return Err(Error::UnknownLetter(letter));
        }
        Ok(self.delta[q * self.n_letters() + letter as usize])
    }

    /// Unchecked variant of [`Dra::step`] for validated inputs.
    pub(crate) fn next(&self, q: usize, letter: Letter) -> usize {
        self.delta[q * self.n_letters() + letter as usize]
    }

    /// States visited infinitely often by the run on `prefix · cycle^ω`.
    pub fn infinitely_visited(&self, prefix: &[Letter], cycle: &[Letter]) -> Result<Vec<bool>, Error> {
        assert!(!cycle.is_empty(), "lasso cycle must be nonempty");
        let mut q = self.initial;
        for &l in prefix {
            q = self.step(q, l)?;
        }
        // the state at the start of each cycle iteration is eventually periodic
        let mut seen_at: Vec<Option<usize>> = vec![None; self.n_states()];
        let mut starts = Vec::new();
        let mut round = 0;
        let loop_start = loop {
            if let Some(r) = seen_at[q] {
                break r;
            }
            seen_at[q] = Some(round);
            starts.push(q);
            for &l in cycle {
                q = self.step(q, l)?;
            }
            round += 1;
        };
        let mut inf = vec![false; self.n_states()];
        for &start in &starts[loop_start..] {
            let mut p = start;
            for &l in cycle {
                inf[p] = true;
                p = self.next(p, l);
            }
        }
        Ok(inf)
    }

    /// Rabin acceptance of the ultimately periodic word `prefix · cycle^ω`.
    pub fn accepts_lasso(&self, prefix: &[Letter], cycle: &[Letter]) -> Result<bool, Error> {
        let inf = self.infinitely_visited(prefix, cycle)?;
        Ok(self.pairs.iter().any(|p| {
            let hits_avoid = inf.iter().zip(&p.avoid).any(|(&i, &a)| i && a);
            let hits_repeat = inf.iter().zip(&p.repeat).any(|(&i, &r)| i && r);
            !hits_avoid && hits_repeat
        }))
    }
}

const PROP_A: Letter = 1;
const PROP_B: Letter = 2;
const PROP_C: Letter = 4;

fn abc() -> Vec<String> {
    ["a", "b", "c"].iter().map(|s| s.to_string()).collect()
}

fn build(names: &[&str], step: impl Fn(usize, Letter) -> usize, pairs: Vec<RabinPair>) -> Dra {
    let n = names.len();
    let mut delta = Vec::with_capacity(n * 8);
    for q in 0..n {
        for l in 0..8 {
            delta.push(step(q, l));
        }
    }
    Dra::new(names.iter().map(|s| s.to_string()).collect(), abc(), delta, 0, pairs)
        .expect("builtin automaton is well formed")
}

/// Hand-built automata for the two grid-world objectives over `AP = {a, b, c}`:
///
/// * `case1`: `◇□b ∧ □¬c` (eventually always `b`, never `c`).
/// * `case2`: `□◇a ∧ □◇b ∧ □¬c` (infinitely often `a` and `b`, never `c`).
pub fn builtin_dra(name: &str) -> Result<Dra, Error> {
    match name {
        "case1" => {
            // 0: last letter not b, 1: last letter b, 2: c seen
            let step = |q: usize, l: Letter| {
                if q == 2 || l & PROP_C != 0 {
                    2
                } else if l & PROP_B != 0 {
                    1
                } else {
                    0
                }
            };
            Ok(build(
                &["wait", "hold_b", "reject"],
                step,
                vec![RabinPair::from_sets(3, &[0, 2], &[1])],
            ))
        }
        "case2" => {
            // 0: waiting for a, 1: waiting for b, 2: round completed, 3: c seen
            let step = |q: usize, l: Letter| {
                if q == 3 || l & PROP_C != 0 {
                    return 3;
                }
                let (a, b) = (l & PROP_A != 0, l & PROP_B != 0);
                match q {
                    1 if b => 2,
                    1 => 1,
                    _ if a && b => 2,
                    _ if a => 1,
                    _ => 0,
                }
            };
            Ok(build(
                &["want_a", "want_b", "round", "reject"],
                step,
                vec![RabinPair::from_sets(4, &[3], &[2])],
            ))
        }
        other => Err(Error::UnknownName(other.into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trivial() -> Dra {
        Dra::new(
            vec!["q".into()],
            abc(),
            vec![0; 8],
            0,
            vec![RabinPair::from_sets(1, &[], &[0])],
        )
        .unwrap()
    }

    #[test]
    fn single_state_self_loops() {
        let d = trivial();
        for l in 0..8 {
            assert_eq!(d.step(0, l).unwrap(), 0);
        }
        assert!(d.accepts_lasso(&[PROP_C], &[0, PROP_A]).unwrap());
    }

    #[test]
    fn domain_errors() {
        let d = trivial();
        assert_eq!(d.step(1, 0), Err(Error::UnknownState(1)));
        assert_eq!(d.step(0, 8), Err(Error::UnknownLetter(8)));
        assert!(matches!(builtin_dra("case3"), Err(Error::UnknownName(_))));
    }

    #[test]
    fn case1_examples() {
        let d = builtin_dra("case1").unwrap();
        assert_eq!(d.step(d.initial(), PROP_C).unwrap(), 2);
        assert!(d.accepts_lasso(&[0], &[PROP_B]).unwrap());
        assert!(!d.accepts_lasso(&[PROP_C], &[PROP_B]).unwrap());
        assert!(!d.accepts_lasso(&[], &[PROP_B, 0]).unwrap());
    }

    #[test]
    fn case2_examples() {
        let d = builtin_dra("case2").unwrap();
        assert_eq!(d.step(d.initial(), 0).unwrap(), d.initial());
        assert!(d.accepts_lasso(&[], &[PROP_A, 0, PROP_B]).unwrap());
        assert!(d.accepts_lasso(&[], &[PROP_A | PROP_B]).unwrap());
        assert!(!d.accepts_lasso(&[], &[PROP_A]).unwrap());
        assert!(!d.accepts_lasso(&[PROP_C], &[PROP_A, PROP_B]).unwrap());
    }

    #[test]
    fn invalid_automata_rejected() {
        assert!(Dra::new(vec!["q".into()], abc(), vec![0; 7], 0, vec![RabinPair::from_sets(1, &[], &[0])]).is_err());
        assert!(Dra::new(vec!["q".into()], abc(), vec![0; 8], 0, vec![]).is_err());
        assert_eq!(
            Dra::new(vec!["q".into()], abc(), vec![1; 8], 0, vec![RabinPair::from_sets(1, &[], &[0])]),
            Err(Error::UnknownState(1))
        );
    }
}
