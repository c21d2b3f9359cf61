//! Non-iterative baselines: exponential weighting and the two-point STAR
//! aggregate.

use serde::Serialize;

use super::argmin;
use crate::dictionary::{Dictionary, Observation};
use crate::error::{check_len, Result};
use crate::linalg::{dot, sq_dist};
use crate::objectives::Problem;
use crate::simplex::SimplexWeights;

/// STAR's mixing coefficient lives in the open interval; it is clamped to
/// `[STAR_CLAMP, 1 - STAR_CLAMP]`.
pub const STAR_CLAMP: f64 = 1e-12;

#[derive(Debug, Clone, Serialize)]
pub struct EwmaFit {
    pub estimate: Vec<f64>,
    pub weights: SimplexWeights,
}

/// Weights `λ_j ∝ π_j exp(-||f_j - Y||²/(2ω²))` and their mixture.
pub fn solve_ewma(problem: &Problem<'_>) -> Result<EwmaFit> {
    let weights = SimplexWeights::from_log_weights(&problem.ewma_logits())?;
    let estimate = problem.dict().mix(&weights)?;
    Ok(EwmaFit { estimate, weights })
}

#[derive(Debug, Clone, Serialize)]
pub struct StarFit {
    pub estimate: Vec<f64>,
    /// Empirical risk minimizer.
    pub k1: usize,
    pub k2: usize,
    /// Weight on `f_{k2}`.
    pub alpha: f64,
}

/// `(1-α) f_{k1} + α f_{k2}` with `k1` the empirical risk minimizer and
/// `(α, k2)` minimizing the empirical risk of the segment.
pub fn solve_star(dict: &Dictionary, obs: &Observation) -> Result<StarFit> {
    check_len("observation", dict.n(), obs.n())?;
    let y = obs.y();
    let k1 = argmin(&dict.sq_distances(y));
    let base = dict.candidate(k1);
    let residual: Vec<f64> = base.iter().zip(y).map(|(f, y)| f - y).collect();

    let mut best = (f64::INFINITY, 0, STAR_CLAMP);
    let mut dir = vec![0.0; dict.n()];
    for (j, f) in dict.candidates().enumerate() {
        for (d, (a, b)) in dir.iter_mut().zip(f.iter().zip(base)) {
            *d = a - b;
        }
        let dd = dot(&dir, &dir);
        let rd = dot(&residual, &dir);
        let alpha = if dd > 0.0 {
            (-rd / dd).clamp(STAR_CLAMP, 1.0 - STAR_CLAMP)
        } else {
            STAR_CLAMP
        };
        // ||r + α d||² expanded
        let value = dot(&residual, &residual) + 2.0 * alpha * rd + alpha * alpha * dd;
        if value < best.0 {
            best = (value, j, alpha);
        }
    }
    let (_, k2, alpha) = best;
    let estimate = base
        .iter()
        .zip(dict.candidate(k2))
        .map(|(a, b)| (1.0 - alpha) * a + alpha * b)
        .collect::<Vec<_>>();
    debug_assert!(sq_dist(&estimate, y).is_finite());
    Ok(StarFit {
        estimate,
        k1,
        k2,
        alpha,
    })
}
