//! Products of labeled POMDPs with Rabin automata, sink-modified transitions
//! and the LTL reward schemes.
//!
//! Product states are ordered model-state major: the unpruned index of
//! `⟨s, q⟩` is `s·|Q| + q`. Pruning keeps the relative order.

use alloc::collections::VecDeque;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::model::{LabeledPomdp, Letter, PomdpParts};
use crate::rabin::Dra;
use crate::Error;

/// Which model-state label advances the automaton on a product transition
/// `⟨s, q⟩ → ⟨s', q'⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LabelConvention {
    /// `q' = δ(q, h(s))`.
    #[default]
    Source,
    /// `q' = δ(q, h(s'))`, so the automaton component of every product state
    /// has already read that state's own label.
    Destination,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ProductOptions {
    pub convention: LabelConvention,
    /// Drop product states unreachable from the initial distribution under
    /// any action sequence.
    pub prune_unreachable: bool,
}

/// A Rabin pair lifted to product states.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProductPair {
    pub avoid: Vec<bool>,
    pub repeat: Vec<bool>,
}

/// The product of a labeled POMDP and a Rabin automaton, with one selected
/// acceptance pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductPomdp {
    pomdp: LabeledPomdp,
    components: Vec<(usize, usize)>,
    n_dra_states: usize,
    pairs: Vec<ProductPair>,
    rabin_index: usize,
    options: ProductOptions,
    modified: Vec<f64>,
}

/// Maps model letters onto the automaton's proposition order.
fn letter_map(model: &LabeledPomdp, dra: &Dra) -> Result<Vec<usize>, Error> {
    if model.props().len() != dra.props().len() {
        return Err(Error::AlphabetMismatch);
    }
    model
        .props()
        .iter()
        .map(|p| dra.props().iter().position(|d| d == p).ok_or(Error::AlphabetMismatch))
        .collect()
}

fn translate(letter: Letter, map: &[usize]) -> Letter {
    map.iter()
        .enumerate()
        .filter(|&(i, _)| letter & (1 << i) != 0)
        .fold(0, |acc, (_, &j)| acc | (1 << j))
}

pub fn build_product(model: &LabeledPomdp, dra: &Dra) -> Result<ProductPomdp, Error> {
    build_product_with(model, dra, ProductOptions::default())
}

pub fn build_product_with(
    model: &LabeledPomdp,
    dra: &Dra,
    options: ProductOptions,
) -> Result<ProductPomdp, Error> {
    let map = letter_map(model, dra)?;
    let (nm, nq, na) = (model.n_states(), dra.n_states(), model.n_actions());
    let letters: Vec<Letter> = model.labels().iter().map(|&l| translate(l, &map)).collect();
    let full = nm * nq;
    let succ_q = |s: usize, q: usize, s_next: usize| match options.convention {
        LabelConvention::Source => dra.next(q, letters[s]),
        LabelConvention::Destination => dra.next(q, letters[s_next]),
    };

    let mut init_full = vec![0.0; full];
    for (s, &p) in model.initial().iter().enumerate() {
        if p > 0.0 {
            init_full[s * nq + dra.next(dra.initial(), letters[s])] += p;
        }
    }

    let keep: Vec<bool> = if options.prune_unreachable {
        let mut seen = vec![false; full];
        let mut queue: VecDeque<usize> = VecDeque::new();
        for (i, &p) in init_full.iter().enumerate() {
            if p > 0.0 {
                seen[i] = true;
                queue.push_back(i);
            }
        }
        while let Some(i) = queue.pop_front() {
            let (s, q) = (i / nq, i % nq);
            for a in 0..na {
                for (sn, &t) in model.transition_row(s, a).iter().enumerate() {
                    let j = sn * nq + succ_q(s, q, sn);
                    if t > 0.0 && !seen[j] {
                        seen[j] = true;
                        queue.push_back(j);
                    }
                }
            }
        }
        seen
    } else {
        vec![true; full]
    };
    let mut index = vec![usize::MAX; full];
    let mut components = Vec::new();
    for i in (0..full).filter(|&i| keep[i]) {
        index[i] = components.len();
        components.push((i / nq, i % nq));
    }
    let n = components.len();

    let mut transition = vec![0.0; n * na * n];
    for (k, &(s, q)) in components.iter().enumerate() {
        for a in 0..na {
            let row = &mut transition[(k * na + a) * n..(k * na + a + 1) * n];
            for (sn, &t) in model.transition_row(s, a).iter().enumerate() {
                if t > 0.0 {
                    row[index[sn * nq + succ_q(s, q, sn)]] += t;
                }
            }
        }
    }
    let no = model.n_observations();
    let mut observation = Vec::with_capacity(n * no);
    for &(s, _) in &components {
        observation.extend_from_slice(model.observation_row(s));
    }
    let initial: Vec<f64> = components.iter().map(|&(s, q)| init_full[s * nq + q]).collect();
    let states = components
        .iter()
        .map(|&(s, q)| format!("{}.{}", model.state_names()[s], dra.state_names()[q]))
        .collect();
    let labels = components.iter().map(|&(s, _)| model.label(s)).collect();
    let rewards = components.iter().map(|&(s, _)| model.rewards()[s]).collect();
    let pomdp = LabeledPomdp::from_parts_unchecked(PomdpParts {
        states,
        actions: model.action_names().to_vec(),
        observations: model.observation_names().to_vec(),
        transition,
        observation,
        initial,
        props: model.props().to_vec(),
        labels,
        rewards,
    });
    let pairs = dra
        .pairs()
        .iter()
        .map(|p| ProductPair {
            avoid: components.iter().map(|&(_, q)| p.avoid[q]).collect(),
            repeat: components.iter().map(|&(_, q)| p.repeat[q]).collect(),
        })
        .collect();
    let mut product = ProductPomdp {
        pomdp,
        components,
        n_dra_states: nq,
        pairs,
        rabin_index: 0,
        options,
        modified: Vec::new(),
    };
    product.modified = modified_transition(&product);
    Ok(product)
}

impl ProductPomdp {
    /// Assembles a product from an explicit POMDP over product states and
    /// lifted pairs. Used by the product dump reader and by tests.
    pub fn from_parts(
        pomdp: LabeledPomdp,
        components: Vec<(usize, usize)>,
        n_dra_states: usize,
        pairs: Vec<ProductPair>,
        rabin_index: usize,
    ) -> Result<Self, Error> {
        let n = pomdp.n_states();
        if components.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: components.len(),
            });
        }
        if pairs.is_empty() || pairs.iter().any(|p| p.avoid.len() != n || p.repeat.len() != n) {
            return Err(Error::InvalidModel("pairs must range over product states".into()));
        }
        if rabin_index >= pairs.len() {
            return Err(Error::InvalidConfig(format!("no Rabin pair {rabin_index}")));
        }
        let mut product = Self {
            pomdp,
            components,
            n_dra_states,
            pairs,
            rabin_index,
            options: ProductOptions::default(),
            modified: Vec::new(),
        };
        product.modified = modified_transition(&product);
        Ok(product)
    }

    /// Same product, recording `options` as the ones it was built with.
    pub fn with_options(mut self, options: ProductOptions) -> Self {
        self.options = options;
        self
    }

    /// Same product with a different acceptance pair selected.
    pub fn with_rabin_index(mut self, r: usize) -> Result<Self, Error> {
        if r >= self.pairs.len() {
            return Err(Error::InvalidConfig(format!("no Rabin pair {r}")));
        }
        self.rabin_index = r;
        self.modified = modified_transition(&self);
        Ok(self)
    }

    pub fn pomdp(&self) -> &LabeledPomdp {
        &self.pomdp
    }
    pub fn n_states(&self) -> usize {
        self.pomdp.n_states()
    }
    pub fn n_actions(&self) -> usize {
        self.pomdp.n_actions()
    }
    pub fn n_observations(&self) -> usize {
        self.pomdp.n_observations()
    }
    pub fn n_dra_states(&self) -> usize {
        self.n_dra_states
    }
    /// `(model state, automaton state)` of each product state.
    pub fn components(&self) -> &[(usize, usize)] {
        &self.components
    }
    pub fn index_of(&self, model_state: usize, dra_state: usize) -> Option<usize> {
        self.components
            .iter()
            .position(|&c| c == (model_state, dra_state))
    }
    pub fn options(&self) -> ProductOptions {
        self.options
    }
    pub fn transition_row(&self, s: usize, a: usize) -> &[f64] {
        self.pomdp.transition_row(s, a)
    }
    /// Row of the sink-modified transition for the selected pair.
    pub fn modified_row(&self, s: usize, a: usize) -> &[f64] {
        let n = self.n_states();
        let k = s * self.n_actions() + a;
        &self.modified[k * n..(k + 1) * n]
    }
    pub fn observation(&self, s: usize, o: usize) -> f64 {
        self.pomdp.observation(s, o)
    }
    pub fn initial(&self) -> &[f64] {
        self.pomdp.initial()
    }
    pub fn pairs(&self) -> &[ProductPair] {
        &self.pairs
    }
    pub fn rabin_index(&self) -> usize {
        self.rabin_index
    }
    pub fn avoid(&self) -> &[bool] {
        &self.pairs[self.rabin_index].avoid
    }
    pub fn repeat(&self) -> &[bool] {
        &self.pairs[self.rabin_index].repeat
    }
}

/// Transition table `[s][α][s']` in which every Avoid state of the selected
/// pair is an absorbing sink.
pub fn modified_transition(product: &ProductPomdp) -> Vec<f64> {
    let (n, na) = (product.n_states(), product.n_actions());
    let mut out = Vec::with_capacity(n * na * n);
    for s in 0..n {
        for a in 0..na {
            if product.avoid()[s] {
                let mut row = vec![0.0; n];
                row[s] = 1.0;
                out.extend_from_slice(&row);
            } else {
                out.extend_from_slice(product.transition_row(s, a));
            }
        }
    }
    out
}

/// The repeat, avoid and I-state reward indicators for the selected pair.
#[derive(Debug, Clone, PartialEq)]
pub struct LtlRewards {
    pub repeat: Vec<f64>,
    pub avoid: Vec<f64>,
    pub istate: Vec<f64>,
    pub discount: f64,
}

impl LtlRewards {
    pub fn new(product: &ProductPomdp, steady: &[bool], discount: f64) -> Self {
        let ind = |v: &[bool]| v.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
        Self {
            repeat: ind(product.repeat()),
            avoid: ind(product.avoid()),
            istate: ind(steady),
            discount,
        }
    }

    /// `r^β(s)·r^G(g)` over global states `s·|G| + g`.
    pub fn discounted_charge(&self) -> Vec<f64> {
        outer(&self.repeat, &self.istate)
    }

    /// `r^av(s)·r^G(g)` over global states.
    pub fn avoid_charge(&self) -> Vec<f64> {
        outer(&self.avoid, &self.istate)
    }

    /// `r^β(s)·r^G(g)` used as a Poisson charge for Repeat visit frequency.
    pub fn repeat_charge(&self) -> Vec<f64> {
        self.discounted_charge()
    }
}

fn outer(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().flat_map(|&x| b.iter().map(move |&y| x * y)).collect()
}

/// Uniform distribution over `Repeat × G^ss`, indexed `s·|G| + g`.
pub fn steady_state_seed(product: &ProductPomdp, steady: &[bool]) -> Result<Vec<f64>, Error> {
    let slice = steady_state_slice(product)?;
    let n_ss = steady.iter().filter(|&&b| b).count();
    if n_ss == 0 {
        return Err(Error::EmptySteadyPartition);
    }
    let mut out = Vec::with_capacity(slice.len() * steady.len());
    for &p in &slice {
        out.extend(steady.iter().map(|&ss| if ss { p / n_ss as f64 } else { 0.0 }));
    }
    Ok(out)
}

/// Uniform distribution over the selected pair's Repeat states; the
/// restriction of [`steady_state_seed`] to any single steady I-state.
pub fn steady_state_slice(product: &ProductPomdp) -> Result<Vec<f64>, Error> {
    let n_rep = product.repeat().iter().filter(|&&b| b).count();
    if n_rep == 0 {
        return Err(Error::EmptyRepeat);
    }
    Ok(product
        .repeat()
        .iter()
        .map(|&r| if r { 1.0 / n_rep as f64 } else { 0.0 })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rabin::{builtin_dra, RabinPair};
    use alloc::string::ToString;

    fn two_state_model() -> LabeledPomdp {
        LabeledPomdp::new(PomdpParts {
            states: vec!["x".into(), "y".into()],
            actions: vec!["go".into(), "stay".into()],
            observations: vec!["o".into()],
            transition: vec![0.3, 0.7, 0.0, 1.0, 0.6, 0.4, 0.0, 1.0],
            observation: vec![1.0, 1.0],
            initial: vec![1.0, 0.0],
            props: vec!["a".into(), "b".into(), "c".into()],
            labels: vec![0b001, 0b010],
            rewards: vec![],
        })
        .unwrap()
    }

    fn toggle_dra() -> Dra {
        // flips state on letters containing b
        let mut delta = Vec::new();
        for q in 0..2 {
            for l in 0..8u32 {
                delta.push(if l & 2 != 0 { 1 - q } else { q });
            }
        }
        Dra::new(
            vec!["p".into(), "r".into()],
            vec!["a".into(), "b".into(), "c".into()],
            delta,
            0,
            vec![RabinPair::from_sets(2, &[0], &[1])],
        )
        .unwrap()
    }

    #[test]
    fn trivial_automaton_is_isomorphic() {
        let model = two_state_model();
        let dra = Dra::new(
            vec!["q".into()],
            model.props().to_vec(),
            vec![0; 8],
            0,
            vec![RabinPair::from_sets(1, &[], &[0])],
        )
        .unwrap();
        let p = build_product(&model, &dra).unwrap();
        assert_eq!(p.n_states(), 2);
        for s in 0..2 {
            for a in 0..2 {
                assert_eq!(p.transition_row(s, a), model.transition_row(s, a));
            }
        }
        assert_eq!(p.initial(), model.initial());
    }

    #[test]
    fn rows_match_case_split() {
        let model = two_state_model();
        let dra = toggle_dra();
        for convention in [LabelConvention::Source, LabelConvention::Destination] {
            let opts = ProductOptions {
                convention,
                prune_unreachable: false,
            };
            let p = build_product_with(&model, &dra, opts).unwrap();
            for i in 0..4 {
                let (si, qk) = (i / 2, i % 2);
                for a in 0..2 {
                    for j in 0..4 {
                        let (sj, ql) = (j / 2, j % 2);
                        let read = match convention {
                            LabelConvention::Source => model.label(si),
                            LabelConvention::Destination => model.label(sj),
                        };
                        let expect = if ql == dra.step(qk, read).unwrap() {
                            model.transition(si, a, sj)
                        } else {
                            0.0
                        };
                        assert_eq!(p.transition_row(i, a)[j], expect);
                    }
                }
            }
        }
    }

    #[test]
    fn initial_reads_first_label() {
        let model = two_state_model();
        let p = build_product(&model, &toggle_dra()).unwrap();
        assert_eq!(p.initial(), &[1.0, 0.0, 0.0, 0.0]);
        let mut parts = model.into_parts();
        parts.initial = vec![0.0, 1.0];
        let p = build_product(&LabeledPomdp::new(parts).unwrap(), &toggle_dra()).unwrap();
        assert_eq!(p.initial(), &[0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn alphabet_mismatch() {
        let mut parts = two_state_model().into_parts();
        parts.props = vec!["a".into(), "b".into(), "d".into()];
        let model = LabeledPomdp::new(parts).unwrap();
        assert_eq!(
            build_product(&model, &builtin_dra("case1").unwrap()),
            Err(Error::AlphabetMismatch)
        );
    }

    #[test]
    fn permuted_props_are_remapped() {
        let mut parts = two_state_model().into_parts();
        parts.props = ["c", "b", "a"].iter().map(|s| s.to_string()).collect();
        // x carries c, y carries b
        parts.labels = vec![0b001, 0b010];
        let model = LabeledPomdp::new(parts).unwrap();
        let dra = builtin_dra("case1").unwrap();
        let p = build_product(&model, &dra).unwrap();
        // x reads c first: the automaton lands in its rejecting state
        assert_eq!(p.initial()[2], 1.0);
    }

    #[test]
    fn modified_rows() {
        let p = build_product(&two_state_model(), &toggle_dra()).unwrap();
        for s in 0..p.n_states() {
            for a in 0..p.n_actions() {
                if p.avoid()[s] {
                    let mut unit = vec![0.0; p.n_states()];
                    unit[s] = 1.0;
                    assert_eq!(p.modified_row(s, a), unit.as_slice());
                } else {
                    assert_eq!(p.modified_row(s, a), p.transition_row(s, a));
                }
            }
        }
    }

    #[test]
    fn pruning_keeps_reachable_only() {
        let model = two_state_model();
        let opts = ProductOptions {
            convention: LabelConvention::Destination,
            prune_unreachable: true,
        };
        // no state carries c, so the rejecting automaton state is unreachable
        let p = build_product_with(&model, &builtin_dra("case1").unwrap(), opts).unwrap();
        assert_eq!(p.components(), &[(0, 0), (1, 1)]);
        for s in 0..p.n_states() {
            for a in 0..p.n_actions() {
                let sum: f64 = p.transition_row(s, a).iter().sum();
                assert!((sum - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn seed_masses() {
        let p = build_product(&two_state_model(), &toggle_dra()).unwrap();
        let seed = steady_state_seed(&p, &[false, true, true]).unwrap();
        let repeat = p.repeat().iter().filter(|&&r| r).count();
        assert_eq!(repeat, 2);
        let atoms: Vec<f64> = seed.iter().copied().filter(|&v| v > 0.0).collect();
        assert_eq!(atoms.len(), 4);
        assert!(atoms.iter().all(|&v| v == 0.25));
        assert_eq!(
            steady_state_seed(&p, &[false, false]),
            Err(Error::EmptySteadyPartition)
        );
    }
}
