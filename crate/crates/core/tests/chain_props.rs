mod common;

use proptest::prelude::*;
use rand::Rng;

use ltlsynth_core::chain::{
    absorption_matrix, absorption_probability, build_global_chain, decompose_classes, limiting_matrix,
    poisson_solve, reach_probabilities, row_sum_error, ChainKind, GlobalChain,
};
use ltlsynth_core::linalg::Matrix;
use ltlsynth_core::oracles::markov::{
    cesaro_average, first_hit_paths, first_passage, gauss_jordan, max_abs_diff, path_probability,
    recurrent_classes, structural_limit, to_dense,
};
use ltlsynth_core::oracles::random::{random_chain, random_sfsc, random_ssd_chain};

fn charge(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| if rng.gen_bool(0.5) { 1.0 } else { 0.0 }).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn poisson_solution_matches_structural_oracle(seed in any::<u64>(), multichain in any::<bool>()) {
        let mut rng = common::rng(seed);
        let n = rng.gen_range(if multichain { 2 } else { 1 }..=12);
        let t = random_chain(&mut rng, n, multichain);
        let r = charge(&mut rng, n);
        let sol = poisson_solve(&t, &r).unwrap();
        let g_t = t.mul_vec(&sol.gain);
        let h_t = t.mul_vec(&sol.bias);
        for i in 0..n {
            prop_assert!((sol.gain[i] - g_t[i]).abs() < 1e-8);
            prop_assert!((sol.gain[i] + sol.bias[i] - r[i] - h_t[i]).abs() < 1e-8);
            prop_assert!((-1e-12..=1.0 + 1e-12).contains(&sol.gain[i]));
        }
        let pi = structural_limit(&to_dense(&t));
        prop_assert!(max_abs_diff(&pi, &sol.limiting) < 1e-9);
        for (i, row) in pi.iter().enumerate() {
            let g: f64 = row.iter().zip(&r).map(|(p, x)| p * x).sum();
            prop_assert!((g - sol.gain[i]).abs() < 1e-8);
        }
        prop_assert!(row_sum_error(&sol.limiting) < 1e-10);
    }

    #[test]
    fn cesaro_average_converges_to_the_limit(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let n = rng.gen_range(2..=8);
        let multi = rng.gen_bool(0.5);
        let t = random_chain(&mut rng, n, multi);
        let pi = limiting_matrix(&t).unwrap();
        prop_assert!(max_abs_diff(&cesaro_average(&t, 17), &pi) < 1e-4);
    }

    #[test]
    fn class_decomposition_matches_reachability(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let n = rng.gen_range(1..=12);
        let multi = n >= 2 && rng.gen_bool(0.5);
        let t = random_chain(&mut rng, n, multi);
        let dec = decompose_classes(&t);
        let mut ours: Vec<Vec<usize>> = dec.recurrent_classes().map(|(_, c)| {
            let mut c = c.to_vec();
            c.sort_unstable();
            c
        }).collect();
        ours.sort();
        prop_assert_eq!(ours, recurrent_classes(&to_dense(&t)));
        let absorb = absorption_matrix(&t, &dec).unwrap();
        for i in 0..n {
            let total: f64 = dec.recurrent_classes().map(|(c, _)| absorb[c][i]).sum();
            prop_assert!((total - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn unichain_gain_is_the_scalar_average(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let n = rng.gen_range(1..=10);
        let t = random_chain(&mut rng, n, false);
        let r = charge(&mut rng, n);
        let sol = poisson_solve(&t, &r).unwrap();
        // unknowns (η, h_1..h_{n-1}) with h_0 = 0: η + h_i − Σ_j T_ij h_j = r_i
        let a: Vec<Vec<f64>> = (0..n).map(|i| {
            let mut row = vec![1.0];
            row.extend((1..n).map(|j| f64::from(u8::from(i == j)) - t[(i, j)]));
            row
        }).collect();
        let eta = gauss_jordan(a, r.clone()).unwrap()[0];
        for g in &sol.gain {
            prop_assert!((g - eta).abs() < 1e-8);
        }
    }

    #[test]
    fn sink_gain_is_first_passage_probability(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let n = rng.gen_range(2..=12);
        let n_avoid = rng.gen_range(1..n);
        let (t, avoid) = random_ssd_chain(&mut rng, n, n_avoid);
        let r: Vec<f64> = avoid.iter().map(|&b| f64::from(u8::from(b))).collect();
        let sol = poisson_solve(&t, &r).unwrap();
        let oracle = first_passage(&to_dense(&t), &avoid);
        let ours = reach_probabilities(&t, &avoid).unwrap();
        for i in 0..n {
            prop_assert!((sol.gain[i] - oracle[i]).abs() < 1e-8);
            prop_assert!((ours[i] - oracle[i]).abs() < 1e-8);
        }
    }

    #[test]
    fn sink_modification_preserves_avoid_reach(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let inst = common::instance(&mut rng, 3, 3);
        let p = &inst.product;
        if !p.avoid().iter().any(|&b| b) {
            return Ok(());
        }
        let n_ss = rng.gen_range(1..=2);
        let sfsc = random_sfsc(&mut rng, p.n_observations(), p.n_actions(), 0, n_ss);
        let plain = build_global_chain(p, &sfsc, ChainKind::Plain, 0).unwrap();
        let ssd = build_global_chain(p, &sfsc, ChainKind::Ssd, 0).unwrap();
        let target: Vec<bool> = (0..plain.n_states()).map(|i| p.avoid()[i / n_ss]).collect();
        let reach = reach_probabilities(&plain.transition, &target).unwrap();
        let reach: f64 = plain.initial.iter().zip(&reach).map(|(a, b)| a * b).sum();
        let charge: Vec<f64> = target.iter().map(|&b| f64::from(u8::from(b))).collect();
        let eta = absorption_probability(&ssd, &ssd.initial, &charge).unwrap();
        prop_assert!((reach - eta).abs() < 1e-8);
        if plain.n_states() <= 5 {
            let (tp, ts) = (to_dense(&plain.transition), to_dense(&ssd.transition));
            for k in 0..=6 {
                for path in first_hit_paths(plain.n_states(), &target, k) {
                    let a = path_probability(&tp, &plain.initial, &path);
                    let b = path_probability(&ts, &ssd.initial, &path);
                    prop_assert!((a - b).abs() < 1e-15);
                }
            }
        }
    }
}

#[test]
fn periodic_chain_has_averaged_limit() {
    let t = Matrix::from_rows(&[vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0], vec![1.0, 0.0, 0.0]]);
    let pi = limiting_matrix(&t).unwrap();
    assert!((0..3).all(|i| (0..3).all(|j| (pi[(i, j)] - 1.0 / 3.0).abs() < 1e-12)));
    let chain = GlobalChain::from_matrix(t, vec![1.0, 0.0, 0.0]);
    assert_eq!(chain.n_states(), 3);
}
