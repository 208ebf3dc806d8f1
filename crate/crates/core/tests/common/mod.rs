#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ltlsynth_core::model::LabeledPomdp;
use ltlsynth_core::oracles::random::{random_dra, random_pomdp};
use ltlsynth_core::product::{build_product, ProductPomdp};
use ltlsynth_core::rabin::Dra;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub struct Instance {
    pub model: LabeledPomdp,
    pub dra: Dra,
    pub product: ProductPomdp,
}

/// A small random POMDP, automaton and their unpruned product.
pub fn instance(rng: &mut impl Rng, max_states: usize, max_dra: usize) -> Instance {
    let ns = rng.gen_range(1..=max_states);
    let na = rng.gen_range(1..=2);
    let no = rng.gen_range(1..=2);
    let model = random_pomdp(rng, ns, na, no);
    let nq = rng.gen_range(1..=max_dra);
    let dra = random_dra(rng, nq);
    let product = build_product(&model, &dra).unwrap();
    Instance { model, dra, product }
}
