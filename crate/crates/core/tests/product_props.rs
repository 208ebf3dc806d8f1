mod common;

use proptest::prelude::*;
use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;

use ltlsynth_core::chain::decompose_classes;
use ltlsynth_core::linalg::Matrix;
use ltlsynth_core::oracles::random::{random_dra, random_pomdp};
use ltlsynth_core::product::{build_product_with, modified_transition, LabelConvention, ProductOptions};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn product_paths_drive_the_automaton(seed in any::<u64>(), destination in any::<bool>(), prune in any::<bool>()) {
        let mut rng = common::rng(seed);
        let ns = rng.gen_range(1..=5);
        let model = random_pomdp(&mut rng, ns, 2, 2);
        let nq = rng.gen_range(1..=4);
        let dra = random_dra(&mut rng, nq);
        let convention = if destination { LabelConvention::Destination } else { LabelConvention::Source };
        let product = build_product_with(&model, &dra, ProductOptions { convention, prune_unreachable: prune }).unwrap();
        let pick = |w: &[f64], rng: &mut rand_chacha::ChaCha8Rng| WeightedIndex::new(w).unwrap().sample(rng);
        let mut i = pick(product.initial(), &mut rng);
        let (s0, q0) = product.components()[i];
        prop_assert_eq!(q0, dra.step(dra.initial(), model.label(s0)).unwrap());
        for _ in 0..rng.gen_range(1..=30) {
            let a = rng.gen_range(0..model.n_actions());
            let j = pick(product.transition_row(i, a), &mut rng);
            let ((s, q), (sn, qn)) = (product.components()[i], product.components()[j]);
            prop_assert!(model.transition(s, a, sn) > 0.0);
            let read = if destination { sn } else { s };
            prop_assert_eq!(qn, dra.step(q, model.label(read)).unwrap());
            i = j;
        }
    }

    #[test]
    fn avoid_states_become_recurrent_sinks(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let inst = common::instance(&mut rng, 4, 3);
        let p = &inst.product;
        let (n, na) = (p.n_states(), p.n_actions());
        let t = modified_transition(p);
        for s in 0..n {
            for a in 0..na {
                let row = &t[(s * na + a) * n..(s * na + a + 1) * n];
                prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-10);
                if p.avoid()[s] {
                    prop_assert_eq!(row[s], 1.0);
                }
            }
        }
        let a = rng.gen_range(0..na);
        let rows: Vec<Vec<f64>> = (0..n).map(|s| t[(s * na + a) * n..(s * na + a + 1) * n].to_vec()).collect();
        let dec = decompose_classes(&Matrix::from_rows(&rows));
        for s in (0..n).filter(|&s| p.avoid()[s]) {
            prop_assert!(dec.is_recurrent_state(s));
        }
    }
}
