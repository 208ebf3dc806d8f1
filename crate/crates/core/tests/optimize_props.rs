mod common;

use proptest::prelude::*;
use rand::Rng;

use ltlsynth_core::optimize::{dualize, relax_bilinear, BilinearProgram, DenseSimplex, LpSolver, Relation, Sense};
use ltlsynth_core::oracles::lp::vertex_optimum;
use ltlsynth_core::oracles::random::random_lp;

fn small_bilinear(rng: &mut impl Rng) -> (BilinearProgram, Vec<(f64, f64)>) {
    let mut bp = BilinearProgram::new(Sense::Maximize);
    let n = rng.gen_range(2..=4);
    let mut boxes = Vec::new();
    for j in 0..n {
        let lo = rng.gen_range(-2.0..1.0);
        let hi = lo + rng.gen_range(0.1..3.0);
        bp.lp.add_var(format!("x{j}"), lo, hi);
        bp.lp.add_objective(j, rng.gen_range(-1.0..1.0));
        boxes.push((lo, hi));
    }
    let p = bp.add_product(0, 1);
    let q = bp.add_product(rng.gen_range(0..n), rng.gen_range(0..n));
    bp.objective_products.push((p, rng.gen_range(-1.0..1.0)));
    bp.add_constraint("c", vec![(0, 1.0)], &[(q, rng.gen_range(-1.0..1.0))], Relation::Le, rng.gen_range(0.0..3.0));
    (bp, boxes)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn simplex_reaches_the_best_vertex(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let n = rng.gen_range(1..=8);
        let m = rng.gen_range(1..=5);
        let lp = random_lp(&mut rng, n, m);
        let sol = DenseSimplex::default().solve(&lp, true).unwrap();
        let best = vertex_optimum(&lp).unwrap();
        prop_assert!((sol.value - best).abs() < 1e-6, "{} vs {}", sol.value, best);
        prop_assert!(lp.max_violation(&sol.x) < 1e-9);
        prop_assert!((lp.objective_value(&sol.x) - sol.value).abs() < 1e-9);
    }

    #[test]
    fn dual_program_has_the_same_optimum(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let n = rng.gen_range(1..=5);
        let lp = random_lp(&mut rng, n, 3);
        let primal = DenseSimplex::default().solve(&lp, false).unwrap();
        let dual = DenseSimplex::default().solve(&dualize(&lp), false).unwrap();
        // a minimization is dualized as the maximization of its negation
        let flip = if lp.sense == Sense::Maximize { 1.0 } else { -1.0 };
        prop_assert!((flip * primal.value - dual.value).abs() < 1e-6);
    }

    #[test]
    fn feasible_points_extend_to_the_relaxation(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let (bp, boxes) = small_bilinear(&mut rng);
        let relax = relax_bilinear(&bp).unwrap();
        let mut best_true = f64::NEG_INFINITY;
        for _ in 0..200 {
            let x: Vec<f64> = boxes.iter().map(|&(l, u)| rng.gen_range(l..=u)).collect();
            if bp.max_violation(&x) > 0.0 {
                continue;
            }
            let mut lifted = x.clone();
            lifted.extend(bp.products.iter().map(|p| x[p.x] * x[p.y]));
            prop_assert!(relax.lp.max_violation(&lifted) < 1e-12);
            let linear = bp.lp.objective_value(&x);
            let bilinear: f64 = bp.objective_products.iter().map(|&(p, c)| c * lifted[relax.product_vars[p]]).sum();
            best_true = best_true.max(linear + bilinear);
        }
        if best_true.is_finite() {
            let relaxed = DenseSimplex::default().solve(&relax.lp, false).unwrap();
            prop_assert!(relaxed.value >= best_true - 1e-9);
        }
    }
}
