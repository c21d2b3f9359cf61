//! Estimators: the exact BMAX minimizer, the two greedy schemes, and the
//! EWMA, STAR and projection baselines.

mod baselines;
mod exact;
mod greedy_bmax;
mod greedy_q;

use serde::Serialize;

use crate::simplex::SimplexWeights;

pub use baselines::{solve_ewma, solve_star, EwmaFit, StarFit, STAR_CLAMP};
pub use exact::{solve_bmax_exact, ExactMethod, ExactSolution, ExactSolveOptions};
pub use greedy_bmax::{gma_bmax, GreedyBmax};
pub use greedy_q::{gma_0, solve_proj, GreedyQ, DEFAULT_PROJ_ITERATIONS};

/// One iteration of an iterative solver.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationRecord {
    pub k: usize,
    /// Candidate added at this step (greedy solvers only).
    pub chosen: Option<usize>,
    pub step: f64,
    /// Objective after the step.
    pub objective: f64,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct SolveTrace {
    pub iterations: Vec<IterationRecord>,
    pub final_objective: f64,
    pub final_weights: Option<SimplexWeights>,
}

/// Output of a greedy run.
#[derive(Debug, Clone)]
pub struct GreedyRun {
    pub estimate: Vec<f64>,
    pub weights: SimplexWeights,
    pub trace: SolveTrace,
}

/// `α_k = 2/(k+1)`.
pub fn greedy_step_size(k: usize) -> f64 {
    2.0 / (k as f64 + 1.0)
}

/// First index of the minimum; NaN never wins.
pub(crate) fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    let mut best_value = f64::INFINITY;
    for (j, &v) in values.iter().enumerate() {
        if v < best_value {
            best_value = v;
            best = j;
        }
    }
    best
}
