//! Solvers checked against brute-force oracles on small fixed instances and
//! against full scans on simulated ones.

mod common;

use bmax_core::experiments::{check_oracle_inequality, generate_scenario, min_omega_sq, ScenarioSpec};
use bmax_core::solvers::GreedyBmax;
use bmax_core::{
    gma_0, gma_bmax, solve_bmax_exact, solve_saddle, AggregationParams, Entropy, ExactMethod, ExactSolveOptions,
    Problem, SaddleOptions, SimplexWeights,
};
use common::{max_abs_diff, small_fixed};

/// Minimizes `f` over a square grid centred at `centre`, half-width `radius`.
fn grid_min(f: impl Fn(&[f64]) -> f64, centre: [f64; 2], radius: f64, step: f64) -> ([f64; 2], f64) {
    let count = (2.0 * radius / step).round() as usize;
    let mut best = (centre, f64::INFINITY);
    for i in 0..=count {
        let x = centre[0] - radius + i as f64 * step;
        for j in 0..=count {
            let p = [x, centre[1] - radius + j as f64 * step];
            let v = f(&p);
            if v < best.1 {
                best = (p, v);
            }
        }
    }
    best
}

#[test]
fn exact_solver_agrees_with_grid_search() {
    for (nu, omega_sq) in [(0.5, 1.0), (0.2, 0.5), (0.8, 4.0)] {
        let inst = small_fixed(nu, omega_sq, Entropy::Kl);
        let p = Problem::new(&inst.dict, &inst.obs, &inst.params).unwrap();
        let f = |x: &[f64]| p.log_j(x).unwrap();
        let (coarse, _) = grid_min(f, [0.0, 0.0], 2.0, 1e-3);
        let (fine, _) = grid_min(f, coarse, 2e-3, 1e-5);
        for method in [
            ExactMethod::Newton,
            ExactMethod::FixedPoint,
            ExactMethod::GradientDescent,
        ] {
            let opts = ExactSolveOptions {
                method,
                ..Default::default()
            };
            let sol = solve_bmax_exact(&p, &opts).unwrap().require_converged().unwrap();
            assert!(
                max_abs_diff(&sol.psi, &fine) <= 1e-4,
                "{method:?}: {:?} vs {fine:?}",
                sol.psi
            );
        }
    }
}

#[test]
fn greedy_bmax_approaches_the_exact_minimizer() {
    let inst = small_fixed(0.5, 1.0, Entropy::Kl);
    let p = Problem::new(&inst.dict, &inst.obs, &inst.params).unwrap();
    let exact = solve_bmax_exact(&p, &ExactSolveOptions::default()).unwrap();
    let run = gma_bmax(&p, 200).unwrap();
    let dist = run
        .estimate
        .iter()
        .zip(&exact.psi)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt();
    assert!(dist <= 2e-2, "{dist}");
}

#[test]
fn gma0_approaches_the_simplex_grid_minimum() {
    let inst = small_fixed(0.5, 1.0, Entropy::Linear);
    let p = Problem::new(&inst.dict, &inst.obs, &inst.params).unwrap();
    let steps = 200;
    let mut grid_best = f64::INFINITY;
    for a in 0..=steps {
        for b in 0..=(steps - a) {
            let w = vec![a as f64 / 200.0, b as f64 / 200.0, (steps - a - b) as f64 / 200.0];
            grid_best = grid_best.min(p.q_objective(&SimplexWeights::new(w).unwrap()).unwrap());
        }
    }
    let run = gma_0(&p, 200).unwrap();
    let q = p.q_objective(&run.weights).unwrap();
    assert!((q - grid_best).abs() <= 1e-2, "{q} vs {grid_best}");
}

#[test]
fn dual_objective_peaks_at_the_saddle() {
    for (nu, omega_sq) in [(0.5, 1.0), (0.3, 2.0)] {
        let inst = small_fixed(nu, omega_sq, Entropy::Kl);
        let p = Problem::new(&inst.dict, &inst.obs, &inst.params).unwrap();
        let rep = solve_saddle(&p, &SaddleOptions::default()).unwrap();
        assert!(rep.passes());
        let neg_t = |h: &[f64]| -p.t_objective(h).unwrap();
        let (_, best) = grid_min(neg_t, [rep.h_hat[0], rep.h_hat[1]], 3.0, 1e-2);
        assert!(rep.t_value >= -best - 1e-9);
        assert!(rep.t_value + best <= 1e-3, "{} vs {}", rep.t_value, -best);
        // the primal value matches the grid maximum of the dual
        assert!((rep.q_value + best).abs() <= 1e-3);
    }
}

#[test]
fn pruned_greedy_selection_matches_full_scan_on_simulated_data() {
    let (dict, obs) = generate_scenario(&ScenarioSpec::exp1(11), 0).unwrap();
    let gram = dict.gram();
    for omega_sq in [2.0, 8.0, 60.0] {
        let params = AggregationParams::flat(dict.m(), 0.5, omega_sq, Entropy::Kl).unwrap();
        let p = Problem::new(&dict, &obs, &params).unwrap();
        let mut g = GreedyBmax::new(&p, &gram).unwrap();
        for _ in 0..150 {
            let values = g.candidate_values();
            let first_min = (0..values.len()).fold(0, |b, j| if values[j] < values[b] { j } else { b });
            let (chosen, value) = g.select().unwrap();
            assert_eq!(chosen, first_min);
            assert_eq!(value, values[first_min]);
            g.step().unwrap();
        }
    }
}

#[test]
fn oracle_inequality_holds_on_both_presets() {
    for spec in [ScenarioSpec::exp1(3), ScenarioSpec::exp2(3)] {
        let params = AggregationParams::flat(spec.m, 0.5, min_omega_sq(spec.sigma, 0.5), Entropy::Kl).unwrap();
        let rep = check_oracle_inequality(&spec, &params, 60, 0.1, 2).unwrap();
        assert!(rep.passes, "{rep:?}");
        assert!(rep.mean_loss <= rep.mean_expectation_bound);
    }
}
