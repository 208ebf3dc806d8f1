use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ltlsynth::case_study::{case1_seed, case_setup, sim_config, CaseConfig};
use ltlsynth::simulate::{simulate, std_error, write_stats, SimConfig};
use ltlsynth_core::controller::Sfsc;
use ltlsynth_core::model::LabeledPomdp;
use ltlsynth_core::oracles::random::{random_dra, random_pomdp, random_sfsc};

/// Exact probability that the model visits `cylinder` at times `0..len`,
/// by forward propagation of the joint law of state and I-state.
fn cylinder_probability(model: &LabeledPomdp, sfsc: &Sfsc, g0: usize, cylinder: &[usize]) -> f64 {
    let (ng, no, na) = (sfsc.n_istates(), sfsc.n_observations(), sfsc.n_actions());
    let mut joint = vec![0.0; ng];
    joint[g0] = model.initial()[cylinder[0]];
    for w in cylinder.windows(2) {
        let (s, sn) = (w[0], w[1]);
        let mut next = vec![0.0; ng];
        for g in 0..ng {
            for o in 0..no {
                for gn in 0..ng {
                    for a in 0..na {
                        next[gn] += joint[g] * model.observation(s, o) * sfsc.omega(g, o, gn, a) * model.transition(s, a, sn);
                    }
                }
            }
        }
        joint = next;
    }
    joint.iter().sum()
}

#[test]
fn cylinder_frequencies_follow_the_closed_loop_law() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..5 {
        let model = random_pomdp(&mut rng, 3, 2, 2);
        let dra = random_dra(&mut rng, 2);
        let sfsc = random_sfsc(&mut rng, 2, 2, 1, 1);
        let mut config = SimConfig::new(&model, 3, 20_000, rng.gen());
        for k in 0..27 {
            config.cylinders.push(vec![k / 9, (k / 3) % 3, k % 3]);
        }
        let stats = simulate(&model, &dra, &sfsc, &config).unwrap();
        for (cyl, &f) in config.cylinders.iter().zip(&stats.cylinder_frequencies) {
            let p = cylinder_probability(&model, &sfsc, 0, cyl);
            if p == 0.0 {
                assert_eq!(f, 0.0);
            } else {
                let sigma = std_error(p, stats.n_traces);
                assert!((f - p).abs() <= 5.0 * sigma + 1e-4, "cylinder {cyl:?}: {f} vs {p}");
            }
        }
    }
}

#[test]
fn every_sampled_step_has_positive_probability() {
    let setup = case_setup(1, 2).unwrap();
    let sfsc = case1_seed(&setup.product).unwrap();
    let mut config = sim_config(&setup, &CaseConfig::new(1), 0);
    config.n_traces = 200;
    config.keep_traces = true;
    let stats = simulate(&setup.model, &setup.dra, &sfsc, &config).unwrap();
    let m = &setup.model;
    for trace in &stats.traces {
        let states: Vec<usize> = trace.states().collect();
        for (t, step) in trace.steps.iter().enumerate() {
            assert!(m.observation(step.state, step.observation) > 0.0);
            let next_g = trace.steps.get(t + 1).map_or(trace.final_istate, |s| s.istate);
            assert!(sfsc.omega(step.istate, step.observation, next_g, step.action) > 0.0);
            assert!(m.transition(step.state, step.action, states[t + 1]) > 0.0);
        }
    }
}

#[test]
fn same_seed_same_traces() {
    let setup = case_setup(2, 3).unwrap();
    let sfsc = random_sfsc(
        &mut ChaCha8Rng::seed_from_u64(5),
        setup.product.n_observations(),
        setup.product.n_actions(),
        1,
        2,
    );
    let mut config = sim_config(&setup, &CaseConfig::new(2), 0);
    config.n_traces = 50;
    config.keep_traces = true;
    let a = simulate(&setup.model, &setup.dra, &sfsc, &config).unwrap();
    let b = simulate(&setup.model, &setup.dra, &sfsc, &config).unwrap();
    assert_eq!(a, b);
    assert_eq!(write_stats(&a), write_stats(&b));
    config.seed += 1;
    let c = simulate(&setup.model, &setup.dra, &sfsc, &config).unwrap();
    assert_ne!(a.traces, c.traces);
}
