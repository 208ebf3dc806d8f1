//! Labeled POMDPs and belief updates.
//!
//! Distributions are stored dense over the ordered state, action and
//! observation sets. Transition rows are indexed `[state][action][next]`,
//! observation rows `[state][observation]`. Labels are bitmasks over the
//! declared atomic propositions (bit `i` set iff proposition `i` holds).

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::{Error, STOCHASTIC_TOL};

/// Set of atomic propositions encoded as a bitmask.
pub type Letter = u32;

/// Maximum number of atomic propositions a [`Letter`] can carry.
pub const MAX_PROPS: usize = 16;

/// A labeled POMDP. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledPomdp {
    states: Vec<String>,
    actions: Vec<String>,
    observations: Vec<String>,
    transition: Vec<f64>,
    observation: Vec<f64>,
    initial: Vec<f64>,
    props: Vec<String>,
    labels: Vec<Letter>,
    rewards: Vec<f64>,
}

/// Raw parts of a model, used to build a [`LabeledPomdp`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PomdpParts {
    pub states: Vec<String>,
    pub actions: Vec<String>,
    pub observations: Vec<String>,
    /// `[state][action][next]`, length `|S|·|Act|·|S|`.
    pub transition: Vec<f64>,
    /// `[state][observation]`, length `|S|·|O|`.
    pub observation: Vec<f64>,
    pub initial: Vec<f64>,
    pub props: Vec<String>,
    pub labels: Vec<Letter>,
    /// Optional state rewards; carried through but unused by synthesis.
    pub rewards: Vec<f64>,
}

/// Which probabilistic component a violation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowRef {
    Transition { state: usize, action: usize },
    Observation { state: usize },
    Initial,
    Labeling { state: usize },
    Shape,
}

/// One failed stochasticity or labeling check.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub row: RowRef,
    /// `|row sum - 1|`, or the distance of an out-of-range entry from `[0, 1]`.
    pub deviation: f64,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}: {} (deviation {:e})", self.row, self.message, self.deviation)
    }
}

impl LabeledPomdp {
    /// Builds a model and rejects it unless [`validate_pomdp`] reports nothing.
    pub fn new(parts: PomdpParts) -> Result<Self, Error> {
        let model = Self::from_parts_unchecked(parts);
        let report = validate_pomdp(&model);
        if let Some(v) = report.first() {
            return Err(Error::InvalidModel(alloc::format!(
                "{} violation(s), first: {v}",
                report.len()
            )));
        }
        Ok(model)
    }

    /// Builds a model without checking it; see [`validate_pomdp`].
    pub fn from_parts_unchecked(parts: PomdpParts) -> Self {
        let mut rewards = parts.rewards;
        rewards.resize(parts.states.len(), 0.0);
        Self {
            states: parts.states,
            actions: parts.actions,
            observations: parts.observations,
            transition: parts.transition,
            observation: parts.observation,
            initial: parts.initial,
            props: parts.props,
            labels: parts.labels,
            rewards,
        }
    }

    pub fn into_parts(self) -> PomdpParts {
        PomdpParts {
            states: self.states,
            actions: self.actions,
            observations: self.observations,
            transition: self.transition,
            observation: self.observation,
            initial: self.initial,
            props: self.props,
            labels: self.labels,
            rewards: self.rewards,
        }
    }

    pub fn n_states(&self) -> usize {
        self.states.len()
    }
    pub fn n_actions(&self) -> usize {
        self.actions.len()
    }
    pub fn n_observations(&self) -> usize {
        self.observations.len()
    }
    pub fn state_names(&self) -> &[String] {
        &self.states
    }
    pub fn action_names(&self) -> &[String] {
        &self.actions
    }
    pub fn observation_names(&self) -> &[String] {
        &self.observations
    }
    pub fn props(&self) -> &[String] {
        &self.props
    }

    /// `T(next | state, action)`.
    pub fn transition(&self, state: usize, action: usize, next: usize) -> f64 {
        self.transition[self.t_offset(state, action) + next]
    }

    pub fn transition_row(&self, state: usize, action: usize) -> &[f64] {
        let o = self.t_offset(state, action);
        &self.transition[o..o + self.n_states()]
    }

    /// `O(obs | state)`.
    pub fn observation(&self, state: usize, obs: usize) -> f64 {
        self.observation[state * self.n_observations() + obs]
    }

    pub fn observation_row(&self, state: usize) -> &[f64] {
        let no = self.n_observations();
        &self.observation[state * no..(state + 1) * no]
    }

    pub fn initial(&self) -> &[f64] {
        &self.initial
    }

    pub fn label(&self, state: usize) -> Letter {
        self.labels[state]
    }

    pub fn labels(&self) -> &[Letter] {
        &self.labels
    }

    pub fn rewards(&self) -> &[f64] {
        &self.rewards
    }

    fn t_offset(&self, state: usize, action: usize) -> usize {
        (state * self.n_actions() + action) * self.n_states()
    }
}

fn check_row(row: &[f64], which: RowRef, out: &mut Vec<Violation>) {
    let mut sum = 0.0;
    for &p in row {
        if !(0.0..=1.0).contains(&p) {
            let dev = if p.is_nan() { f64::INFINITY } else { (p - p.clamp(0.0, 1.0)).abs() };
            out.push(Violation {
                row: which,
                deviation: dev,
                message: alloc::format!("entry {p} outside [0, 1]"),
            });
            return;
        }
        sum += p;
    }
    let dev = (sum - 1.0).abs();
    if dev > STOCHASTIC_TOL {
        out.push(Violation {
            row: which,
            deviation: dev,
            message: alloc::format!("row sums to {sum}"),
        });
    }
}

/// Reports every stochasticity and labeling violation; empty iff the model is valid.
pub fn validate_pomdp(model: &LabeledPomdp) -> Vec<Violation> {
    let mut out = Vec::new();
    let ns = model.n_states();
    if ns == 0 || model.n_actions() == 0 || model.n_observations() == 0 {
        out.push(Violation {
            row: RowRef::Shape,
            deviation: 0.0,
            message: "states, actions and observations must be nonempty".into(),
        });
        return out;
    }
    let (na, no) = (model.n_actions(), model.n_observations());
    if model.transition.len() != ns * na * ns
        || model.observation.len() != ns * no
        || model.initial.len() != ns
        || model.labels.len() != ns
    {
        out.push(Violation {
            row: RowRef::Shape,
            deviation: 0.0,
            message: "array lengths do not match the declared sets".into(),
        });
        return out;
    }
    if model.props.len() > MAX_PROPS {
        out.push(Violation {
            row: RowRef::Shape,
            deviation: 0.0,
            message: alloc::format!("at most {MAX_PROPS} atomic propositions supported"),
        });
    }
    for s in 0..ns {
        for a in 0..model.n_actions() {
            check_row(model.transition_row(s, a), RowRef::Transition { state: s, action: a }, &mut out);
        }
    }
    for s in 0..ns {
        check_row(model.observation_row(s), RowRef::Observation { state: s }, &mut out);
    }
    check_row(&model.initial, RowRef::Initial, &mut out);
    let full: Letter = if model.props.len() >= 32 { u32::MAX } else { (1u32 << model.props.len()) - 1 };
    for s in 0..ns {
        if model.labels[s] & !full != 0 {
            out.push(Violation {
                row: RowRef::Labeling { state: s },
                deviation: 0.0,
                message: "label mentions undeclared propositions".into(),
            });
        }
    }
    out
}

/// Probability distribution over an ordered state set.
#[derive(Debug, Clone, PartialEq)]
pub struct Belief(Vec<f64>);

impl Belief {
    /// Wraps a distribution, normalizing it. Fails if the mass is not positive.
    pub fn from_weights(mut w: Vec<f64>) -> Result<Self, Error> {
        let total: f64 = w.iter().sum();
        if !(total > 0.0) || w.iter().any(|&x| x < 0.0) {
            return Err(Error::ZeroLikelihood);
        }
        w.iter_mut().for_each(|x| *x /= total);
        Ok(Self(w))
    }

    pub fn point(n: usize, at: usize) -> Self {
        let mut v = vec![0.0; n];
        v[at] = 1.0;
        Self(v)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// `b0(s) ∝ ι(s)·O(o0|s)`.
pub fn belief_init(model: &LabeledPomdp, o0: usize) -> Result<Belief, Error> {
    let w = (0..model.n_states())
        .map(|s| model.initial[s] * model.observation(s, o0))
        .collect();
    Belief::from_weights(w)
}

/// `b'(s) ∝ O(o|s)·Σ_{s'} T(s|s',α)·b(s')`.
pub fn belief_update(
    model: &LabeledPomdp,
    prev: &Belief,
    action: usize,
    obs: usize,
) -> Result<Belief, Error> {
    let ns = model.n_states();
    if prev.len() != ns {
        return Err(Error::DimensionMismatch {
            expected: ns,
            found: prev.len(),
        });
    }
    let mut pushed = vec![0.0; ns];
    for (sp, &b) in prev.as_slice().iter().enumerate() {
        if b == 0.0 {
            continue;
        }
        for (s, t) in model.transition_row(sp, action).iter().enumerate() {
            pushed[s] += t * b;
        }
    }
    for (s, p) in pushed.iter_mut().enumerate() {
        *p *= model.observation(s, obs);
    }
    Belief::from_weights(pushed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn names(prefix: &str, n: usize) -> Vec<String> {
        (0..n).map(|i| alloc::format!("{prefix}{i}")).collect()
    }

    fn two_state(t: [[f64; 2]; 2], obs: [[f64; 2]; 2], init: [f64; 2]) -> PomdpParts {
        PomdpParts {
            states: names("s", 2),
            actions: vec!["go".to_string()],
            observations: names("o", 2),
            transition: t.iter().flatten().copied().collect(),
            observation: obs.iter().flatten().copied().collect(),
            initial: init.to_vec(),
            props: vec![],
            labels: vec![0, 0],
            rewards: vec![],
        }
    }

    #[test]
    fn valid_model_has_empty_report() {
        let m = LabeledPomdp::new(two_state([[0.0, 1.0], [0.0, 1.0]], [[0.5, 0.5], [0.5, 0.5]], [1.0, 0.0]));
        assert!(m.is_ok());
    }

    #[test]
    fn short_row_is_reported_with_deviation() {
        let m = LabeledPomdp::from_parts_unchecked(two_state(
            [[0.0, 0.9], [0.0, 1.0]],
            [[0.5, 0.5], [0.5, 0.5]],
            [1.0, 0.0],
        ));
        let r = validate_pomdp(&m);
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].row, RowRef::Transition { state: 0, action: 0 });
        assert!((r[0].deviation - 0.1).abs() < 1e-12);
        assert!(LabeledPomdp::new(m.into_parts()).is_err());
    }

    #[test]
    fn init_belief_is_proportional() {
        let m = LabeledPomdp::new(two_state(
            [[1.0, 0.0], [0.0, 1.0]],
            [[0.2, 0.8], [0.8, 0.2]],
            [0.5, 0.5],
        ))
        .unwrap();
        let b = belief_init(&m, 0).unwrap();
        assert!((b.as_slice()[0] - 0.2).abs() < 1e-12);
        assert!((b.as_slice()[1] - 0.8).abs() < 1e-12);
    }

    #[test]
    fn zero_likelihood_is_an_error() {
        let m = LabeledPomdp::new(two_state(
            [[1.0, 0.0], [0.0, 1.0]],
            [[1.0, 0.0], [0.0, 1.0]],
            [1.0, 0.0],
        ))
        .unwrap();
        assert_eq!(belief_init(&m, 1), Err(Error::ZeroLikelihood));
        let b = Belief::point(2, 0);
        assert_eq!(belief_update(&m, &b, 0, 1), Err(Error::ZeroLikelihood));
    }

    #[test]
    fn deterministic_push_forward() {
        let m = LabeledPomdp::new(two_state(
            [[0.0, 1.0], [0.0, 1.0]],
            [[0.5, 0.5], [0.5, 0.5]],
            [1.0, 0.0],
        ))
        .unwrap();
        let b = belief_update(&m, &Belief::point(2, 0), 0, 1).unwrap();
        assert_eq!(b.as_slice(), &[0.0, 1.0]);
    }

    #[test]
    fn identity_dynamics_keep_belief() {
        let m = LabeledPomdp::new(two_state(
            [[1.0, 0.0], [0.0, 1.0]],
            [[1.0, 0.0], [0.0, 1.0]],
            [1.0, 0.0],
        ))
        .unwrap();
        let b = Belief::point(2, 1);
        assert_eq!(belief_update(&m, &b, 0, 1).unwrap(), b);
    }
}
