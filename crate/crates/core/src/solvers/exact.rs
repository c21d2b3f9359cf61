//! Exact minimization of `log J` over `R^n`.
//!
//! The stationarity condition `ψ = f_{λ(ψ)}` suggests iterating the map
//! `ψ ← Σ λ_j(ψ) f_j`. That map is a gradient step of length `1/A1`, which can
//! overshoot when the posterior is spread over distant candidates, so the
//! step is halved until `log J` decreases sufficiently (or, at rounding level,
//! the gradient shrinks without `log J` rising). `GradientDescent` takes the
//! fixed step `1/A2`, which is guaranteed to converge by strong convexity and
//! smoothness.
//!
//! Both converge linearly, and slowly when `A1 Cov_λ(f)` is large. `Newton`
//! uses the Hessian `A1 (I + A1 Cov_λ(f))`, solving for the step by conjugate
//! gradients on Hessian-vector products, with the same safeguarded step.

use serde::{Deserialize, Serialize};

use super::{IterationRecord, SolveTrace};
use crate::error::{check_len, Error, Result};
use crate::linalg::{dot, norm};
use crate::objectives::Problem;
use crate::simplex::SimplexWeights;

const ARMIJO: f64 = 1e-4;
const MAX_HALVINGS: usize = 60;
const HESSIAN_WEIGHT_FLOOR: f64 = 1e-16;
const ROUNDING: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExactMethod {
    Newton,
    FixedPoint,
    GradientDescent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactSolveOptions {
    /// Stop once `||∇ log J||₂` is at most this.
    pub grad_tolerance: f64,
    pub max_iterations: usize,
    pub method: ExactMethod,
    /// Starting point; the origin when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<Vec<f64>>,
}

impl Default for ExactSolveOptions {
    fn default() -> Self {
        Self {
            grad_tolerance: 1e-10,
            max_iterations: 100_000,
            method: ExactMethod::Newton,
            initial: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExactSolution {
    pub psi: Vec<f64>,
    /// Posterior weights at `psi`; `f_posterior ≈ psi` at convergence.
    pub posterior: SimplexWeights,
    pub objective: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    pub trace: SolveTrace,
}

impl ExactSolution {
    /// Turns a non-converged run into [`Error::NotConverged`].
    pub fn require_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NotConverged {
                iterations: self.iterations,
                grad_norm: self.grad_norm,
            })
        }
    }
}

pub fn solve_bmax_exact(problem: &Problem<'_>, opts: &ExactSolveOptions) -> Result<ExactSolution> {
    if opts.grad_tolerance.is_nan() || opts.grad_tolerance <= 0.0 || opts.max_iterations == 0 {
        return Err(Error::InvalidParameter(
            "exact solver needs a positive tolerance and at least one iteration".into(),
        ));
    }
    let mut psi = match &opts.initial {
        Some(start) => {
            check_len("initial point", problem.n(), start.len())?;
            start.clone()
        }
        None => vec![0.0; problem.n()],
    };
    let a1 = problem.a1();
    let a2 = problem.curvature().a2;

    let (mut value, mut grad, mut posterior) = problem.log_j_with_grad(&psi)?;
    let mut grad_norm = norm(&grad);
    let mut trace = SolveTrace::default();
    let mut converged = grad_norm <= opts.grad_tolerance;
    let mut iterations = 0;

    while !converged && iterations < opts.max_iterations {
        iterations += 1;
        // descent direction and its step scale
        let (direction, base_step) = match opts.method {
            ExactMethod::FixedPoint => (grad.iter().map(|g| -g).collect(), 1.0 / a1),
            ExactMethod::GradientDescent => (grad.iter().map(|g| -g).collect(), 1.0 / a2),
            ExactMethod::Newton => (newton_direction(problem, &grad, &posterior, grad_norm)?, 1.0),
        };
        let slope = dot(&grad, &direction);
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let step = t * base_step;
            let candidate: Vec<f64> = psi.iter().zip(&direction).map(|(p, d)| p + step * d).collect();
            let (v, g, post) = problem.log_j_with_grad(&candidate)?;
            let gn = norm(&g);
            // near the optimum log J stops resolving the decrease, so a
            // shrinking gradient also counts as long as log J did not rise
            let flat = v <= value + ROUNDING * (1.0 + value.abs());
            let sufficient = v <= value + ARMIJO * step * slope || (flat && gn <= (1.0 - ARMIJO * t) * grad_norm);
            if opts.method == ExactMethod::GradientDescent || sufficient {
                accepted = Some((candidate, v, g, post, gn, step));
                break;
            }
            t *= 0.5;
        }
        let Some((candidate, v, g, post, gn, step)) = accepted else {
            // no step length makes progress: stalled at rounding level
            break;
        };
        psi = candidate;
        value = v;
        grad = g;
        posterior = post;
        grad_norm = gn;
        trace.iterations.push(IterationRecord {
            k: iterations,
            chosen: None,
            step,
            objective: value,
        });
        converged = grad_norm <= opts.grad_tolerance;
    }

    trace.final_objective = value;
    trace.final_weights = Some(posterior.clone());
    Ok(ExactSolution {
        psi,
        posterior,
        objective: value,
        grad_norm,
        iterations,
        converged,
        trace,
    })
}

/// Solves `(I + A1 Cov_λ(f)) d = -grad/A1` by conjugate gradients.
///
/// The system matrix is never formed: a product costs one pass over the
/// candidates with nonzero posterior mass.
fn newton_direction(
    problem: &Problem<'_>,
    grad: &[f64],
    posterior: &SimplexWeights,
    grad_norm: f64,
) -> Result<Vec<f64>> {
    let a1 = problem.a1();
    let n = problem.n();
    let dict = problem.dict();
    let mean = dict.mix(posterior)?;
    // centred candidates with their weights; negligible weights only bend the
    // search direction, never the gradient or the line search
    let floor = HESSIAN_WEIGHT_FLOOR * posterior.as_slice().iter().copied().fold(0.0, f64::max);
    let mut centred = Vec::new();
    let mut weights = Vec::new();
    for (f, &l) in dict.candidates().zip(posterior.as_slice()) {
        if l > floor {
            centred.extend(f.iter().zip(&mean).map(|(x, m)| x - m));
            weights.push(l);
        }
    }
    let apply = |v: &[f64], out: &mut [f64]| {
        out.copy_from_slice(v);
        for (c, &l) in centred.chunks_exact(n).zip(&weights) {
            let s = a1 * l * dot(c, v);
            for (o, x) in out.iter_mut().zip(c) {
                *o += s * x;
            }
        }
    };

    let b: Vec<f64> = grad.iter().map(|g| -g / a1).collect();
    let b_norm = norm(&b);
    // inexact Newton: forcing term shrinks with the gradient
    let target = b_norm * (0.5f64).min(grad_norm.sqrt());
    let mut x = vec![0.0; n];
    let mut r = b.clone();
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    let mut rr = dot(&r, &r);
    for _ in 0..n.max(1) * 2 {
        if rr.sqrt() <= target {
            break;
        }
        apply(&p, &mut ap);
        let alpha = rr / dot(&p, &ap);
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rr_next = dot(&r, &r);
        let beta = rr_next / rr;
        rr = rr_next;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
    }
    Ok(x)
}
