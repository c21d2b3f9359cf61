//! Model averaging with the BMAX estimator.
//!
//! BMAX is the minimizer of `log J(ψ)`, a strongly convex function whose dual
//! is Q-aggregation over the simplex. The crate provides
//!
//! * the domain types ([`Dictionary`], [`Observation`], [`SimplexWeights`],
//!   [`AggregationParams`]) and error metrics,
//! * the objectives `log J`, `Q`, `T`, `S` ([`Problem`]),
//! * exact and greedy solvers plus the EWMA, STAR and projection baselines
//!   ([`solvers`]),
//! * a saddle-point certificate for the primal/dual pair ([`duality`]),
//! * a reproducible Monte-Carlo harness ([`experiments`]).

pub mod dictionary;
pub mod duality;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod lse;
pub mod metrics;
pub mod objectives;
pub mod params;
pub mod simplex;
pub mod solvers;

pub use dictionary::{load_csv, read_csv, write_csv, Dictionary, Gram, Observation};
pub use duality::{h_from_lambda, lambda_from_h, solve_saddle, SaddleOptions, SaddleReport};
pub use error::{Error, Result};
pub use metrics::{mse, oracle_index, regret};
pub use objectives::{curvature, CurvatureConstants, Problem};
pub use params::AggregationParams;
pub use simplex::{kl_divergence, rho_entropy, Entropy, SimplexWeights};
pub use solvers::{
    gma_0, gma_bmax, solve_bmax_exact, solve_ewma, solve_proj, solve_star, ExactMethod, ExactSolution,
    ExactSolveOptions, GreedyRun, SolveTrace,
};
