mod common;

use proptest::prelude::*;
use rand::Rng;

use ltlsynth_core::model::{belief_init, belief_update, LabeledPomdp, PomdpParts};
use ltlsynth_core::oracles::belief::belief_by_paths;
use ltlsynth_core::oracles::random::{random_distribution, random_pomdp};

fn history(rng: &mut impl Rng, model: &LabeledPomdp, len: usize) -> (Vec<usize>, Vec<usize>) {
    let obs = (0..=len).map(|_| rng.gen_range(0..model.n_observations())).collect();
    let acts = (0..len).map(|_| rng.gen_range(0..model.n_actions())).collect();
    (obs, acts)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn recursive_update_matches_path_enumeration(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let n = rng.gen_range(1..=6);
        let (na, no) = (rng.gen_range(1..=2), rng.gen_range(1..=3));
        let model = random_pomdp(&mut rng, n, na, no);
        let len = rng.gen_range(0..=3);
        let (obs, acts) = history(&mut rng, &model, len);
        let oracle = belief_by_paths(&model, &obs, &acts);
        let mut b = belief_init(&model, obs[0]).ok();
        for k in 0..acts.len() {
            b = b.and_then(|b| belief_update(&model, &b, acts[k], obs[k + 1]).ok());
        }
        match (b, oracle) {
            (Some(b), Some(o)) => {
                prop_assert!((b.as_slice().iter().sum::<f64>() - 1.0).abs() < 1e-10);
                for (x, y) in b.as_slice().iter().zip(&o) {
                    prop_assert!((x - y).abs() < 1e-10);
                }
            }
            (None, None) => {}
            (b, o) => prop_assert!(false, "support disagreement: {:?} vs {:?}", b, o),
        }
    }

    #[test]
    fn noiseless_observations_pin_the_state(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let n = rng.gen_range(2..=6);
        let mut perm: Vec<usize> = (0..n).collect();
        rand::seq::SliceRandom::shuffle(perm.as_mut_slice(), &mut rng);
        let mut observation = vec![0.0; n * n];
        for s in 0..n {
            observation[s * n + perm[s]] = 1.0;
        }
        let mut transition = Vec::new();
        for _ in 0..n {
            transition.extend(random_distribution(&mut rng, n, 0.5));
        }
        let model = LabeledPomdp::new(PomdpParts {
            states: (0..n).map(|i| format!("s{i}")).collect(),
            actions: vec!["go".into()],
            observations: (0..n).map(|i| format!("o{i}")).collect(),
            transition,
            observation,
            initial: random_distribution(&mut rng, n, 0.7),
            props: vec![],
            labels: vec![0; n],
            rewards: vec![],
        }).unwrap();
        let prior = belief_init(&model, perm[(0..n).find(|&s| model.initial()[s] > 0.0).unwrap()]).unwrap();
        for o in 0..n {
            if let Ok(b) = belief_update(&model, &prior, 0, o) {
                let s = perm.iter().position(|&x| x == o).unwrap();
                prop_assert_eq!(b.as_slice()[s], 1.0);
            }
        }
    }
}
