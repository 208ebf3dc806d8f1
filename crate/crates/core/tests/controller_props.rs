mod common;

use proptest::prelude::*;
use rand::Rng;

use ltlsynth_core::chain::{build_global_chain, ChainKind};
use ltlsynth_core::controller::{best_istate, discounted_values, EvalMethod};
use ltlsynth_core::oracles::random::{random_chain, random_sfsc};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn values_are_monotone_in_rewards(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let n = rng.gen_range(1..=10);
        let multi = n >= 2 && rng.gen_bool(0.5);
        let t = random_chain(&mut rng, n, multi);
        let r: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
        let bumped: Vec<f64> = r.iter().map(|x| x + rng.gen_range(0.0..0.5)).collect();
        let v = discounted_values(&t, &r, 0.9, EvalMethod::Direct, 1e-9).unwrap();
        let w = discounted_values(&t, &bumped, 0.9, EvalMethod::Direct, 1e-9).unwrap();
        prop_assert!(v.iter().zip(&w).all(|(a, b)| *a <= *b + 1e-12));
    }

    #[test]
    fn scaling_rewards_scales_values(seed in any::<u64>(), c in 0.1f64..10.0) {
        let mut rng = common::rng(seed);
        let inst = common::instance(&mut rng, 3, 2);
        let p = &inst.product;
        let (n_tr, n_ss) = (rng.gen_range(0..=2), rng.gen_range(1..=2));
        let sfsc = random_sfsc(&mut rng, p.n_observations(), p.n_actions(), n_tr, n_ss);
        let chain = build_global_chain(p, &sfsc, ChainKind::Plain, 0).unwrap();
        let r: Vec<f64> = (0..chain.n_states()).map(|_| rng.gen_range(0.0..1.0)).collect();
        let scaled: Vec<f64> = r.iter().map(|x| c * x).collect();
        let v = discounted_values(&chain.transition, &r, 0.95, EvalMethod::Direct, 1e-9).unwrap();
        let w = discounted_values(&chain.transition, &scaled, 0.95, EvalMethod::Direct, 1e-9).unwrap();
        for (a, b) in v.iter().zip(&w) {
            prop_assert!((c * a - b).abs() < 1e-9 * (1.0 + b.abs()));
        }
        let ng = sfsc.n_istates();
        let b = p.initial();
        prop_assert_eq!(best_istate(&v, ng, b), best_istate(&w, ng, b));
    }

    #[test]
    fn richardson_agrees_with_direct_solve(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let inst = common::instance(&mut rng, 3, 3);
        let p = &inst.product;
        let sfsc = random_sfsc(&mut rng, p.n_observations(), p.n_actions(), 1, 1);
        let chain = build_global_chain(p, &sfsc, ChainKind::Plain, 0).unwrap();
        let r: Vec<f64> = (0..chain.n_states()).map(|_| f64::from(u8::from(rng.gen_bool(0.5)))).collect();
        let eps = 1e-9;
        let d = discounted_values(&chain.transition, &r, 0.95, EvalMethod::Direct, eps).unwrap();
        let i = discounted_values(&chain.transition, &r, 0.95, EvalMethod::Richardson, eps).unwrap();
        for (a, b) in d.iter().zip(&i) {
            prop_assert!((a - b).abs() < 10.0 * eps, "{} vs {}", a, b);
            prop_assert!(*a >= -1e-12 && *a <= 1.0 / 0.05 + 1e-9);
        }
    }
}
