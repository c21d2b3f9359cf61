//! The saddle point of `S(λ, h)` and the primal/dual certificate built from
//! the exact BMAX minimizer.
//!
//! With the KL entropy, `min_λ max_h S = max_h min_λ S`: the max over `h` is
//! `Q(λ)` and the min over `λ` is `T(h)`. The saddle lies on the two
//! hypersurfaces
//!
//! ```text
//! A: h = Y/ν - ((1-ν)/ν) f_λ
//! B: λ_j ∝ π_j exp(-ν ||f_j - h||²/(2ω²))
//! ```
//!
//! and `T(h(ψ)) = -2ω² log J(ψ)` links it to the primal problem.

use serde::Serialize;

use crate::error::{check_len, Error, Result};
use crate::linalg::{norm, sub};
use crate::objectives::Problem;
use crate::simplex::{Entropy, SimplexWeights};
use crate::solvers::{solve_bmax_exact, ExactSolveOptions};

/// Below this `ν` the map onto `A` amplifies errors by `(1-ν)/ν > 999`.
pub const SMALL_NU: f64 = 1e-3;

/// `Y/ν - ((1-ν)/ν) m` for a mixture `m = f_λ` (or any primal point).
pub fn h_from_mean(mean: &[f64], problem: &Problem<'_>) -> Result<Vec<f64>> {
    check_len("mean", problem.n(), mean.len())?;
    let nu = problem.params().nu();
    if !(nu > 0.0 && nu < 1.0) {
        return Err(Error::InvalidParameter(format!("nu must lie in (0, 1), got {nu}")));
    }
    let c = (1.0 - nu) / nu;
    Ok(problem
        .obs()
        .y()
        .iter()
        .zip(mean)
        .map(|(y, m)| y / nu - c * m)
        .collect())
}

/// The point of `A` above `λ`.
pub fn h_from_lambda(lambda: &SimplexWeights, problem: &Problem<'_>) -> Result<Vec<f64>> {
    h_from_mean(&problem.dict().mix(lambda)?, problem)
}

/// The point of `B` above `h`: the minimizer of `S(·, h)`.
pub fn lambda_from_h(h: &[f64], problem: &Problem<'_>) -> Result<SimplexWeights> {
    if problem.params().entropy() != Entropy::Kl {
        return Err(Error::RequiresKl("the dual weight map"));
    }
    SimplexWeights::from_log_weights(&problem.dual_logits(h)?)
}

#[derive(Debug, Clone, Serialize)]
pub struct SaddleOptions {
    /// Absolute tolerance on residuals; the gap is held to `tolerance (1 + |T|)`.
    pub tolerance: f64,
    pub exact: ExactSolveOptions,
}

impl Default for SaddleOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-8,
            exact: ExactSolveOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SaddleReport {
    /// Posterior weights at the primal minimizer.
    pub lambda_hat: SimplexWeights,
    pub h_hat: Vec<f64>,
    pub psi_star: Vec<f64>,
    pub q_value: f64,
    pub t_value: f64,
    /// `Q(λ̂) - T(ĥ)`; nonnegative up to rounding.
    pub gap: f64,
    /// Distance from `ĥ` to the point of `A` above `λ̂`.
    pub a_residual: f64,
    /// Total variation between `λ̂` and the point of `B` above `ĥ`.
    pub b_residual: f64,
    /// `||f_λ̂ - ψ*||₂`.
    pub primal_dual_distance: f64,
    pub tolerance: f64,
    pub solver_iterations: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

impl SaddleReport {
    pub fn passes(&self) -> bool {
        self.gap.abs() <= self.tolerance * (1.0 + self.t_value.abs())
            && self.a_residual <= self.tolerance
            && self.b_residual <= self.tolerance
            && self.primal_dual_distance <= self.tolerance
    }
}

/// Certifies the saddle point from the exact primal minimizer `ψ*`.
///
/// `λ̂` is the posterior at `ψ*` and `ĥ` the dual point paired with `ψ*`, so
/// both residuals and the gap measure how far the solver's answer is from a
/// true saddle.
pub fn solve_saddle(problem: &Problem<'_>, opts: &SaddleOptions) -> Result<SaddleReport> {
    if problem.params().entropy() != Entropy::Kl {
        return Err(Error::RequiresKl("the saddle function S"));
    }
    if opts.tolerance.is_nan() || opts.tolerance <= 0.0 {
        return Err(Error::InvalidParameter("tolerance must be positive".into()));
    }
    let nu = problem.params().nu();
    let warning = (nu < SMALL_NU).then(|| {
        format!(
            "nu = {nu} is small: residuals on the dual side are amplified by (1-nu)/nu = {:.3e}",
            (1.0 - nu) / nu
        )
    });

    let sol = solve_bmax_exact(problem, &opts.exact)?.require_converged()?;
    let lambda_hat = sol.posterior;
    let h_hat = h_from_mean(&sol.psi, problem)?;
    let mean = problem.dict().mix(&lambda_hat)?;
    let q_value = problem.q_objective(&lambda_hat)?;
    let t_value = problem.t_objective(&h_hat)?;
    let a_residual = norm(&sub(&h_hat, &h_from_mean(&mean, problem)?));
    let b_residual = lambda_hat.total_variation(&lambda_from_h(&h_hat, problem)?)?;
    Ok(SaddleReport {
        primal_dual_distance: norm(&sub(&mean, &sol.psi)),
        lambda_hat,
        h_hat,
        psi_star: sol.psi,
        q_value,
        t_value,
        gap: q_value - t_value,
        a_residual,
        b_residual,
        tolerance: opts.tolerance,
        solver_iterations: sol.iterations,
        warning,
    })
}
