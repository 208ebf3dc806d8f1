mod common;

use proptest::prelude::*;

use ltlsynth_core::bpi::{evaluate, repair_steady_rows, run_bpi_with, uniform_seed, BpiConfig};
use ltlsynth_core::controller::Sfsc;
use ltlsynth_core::optimize::DenseSimplex;

fn structure_holds(c: &Sfsc) -> bool {
    let (ng, no, na) = (c.n_istates(), c.n_observations(), c.n_actions());
    (0..ng).filter(|&g| c.is_steady(g)).all(|g| {
        (0..no).all(|o| (0..ng).filter(|&gn| !c.is_steady(gn)).all(|gn| (0..na).all(|a| c.omega(g, o, gn, a) == 0.0)))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn runs_stay_feasible_monotone_and_within_budget(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let inst = common::instance(&mut rng, 3, 2);
        let p = &inst.product;
        let config = BpiConfig { n_max: 5, n_new: 2, max_iterations: 8, ..BpiConfig::default() };
        let uniform = uniform_seed(p, 1, 1).unwrap();
        let Some(seed_fsc) = repair_steady_rows(p, &uniform).unwrap() else { return Ok(()) };
        let mut steps = Vec::new();
        let report = run_bpi_with(p, &seed_fsc, &config, &DenseSimplex::default(), &mut |rec, fsc, eval| {
            steps.push((rec.value, eval.residual, fsc.n_istates(), structure_holds(fsc)));
        });
        let Ok(report) = report else { return Ok(()) };
        for w in steps.windows(2) {
            prop_assert!(w[1].0 >= w[0].0 - 1e-9, "value fell from {} to {}", w[0].0, w[1].0);
        }
        for &(_, residual, n, structured) in &steps {
            prop_assert!(residual <= config.eps_feas);
            prop_assert!(n <= config.n_max);
            prop_assert!(structured);
        }
        for pair in report.records.windows(2) {
            prop_assert!(pair[1].n_istates - pair[0].n_istates <= config.n_new);
        }
        let eval = evaluate(p, &report.controller, &config).unwrap();
        prop_assert!(eval.residual <= config.eps_feas);
    }
}
