//! K-fold cross-validation of the temperature `ω²`.
//!
//! Design points are shuffled once and cut into contiguous folds. For each
//! grid value the aggregate is fitted on the training rows, its weights are
//! applied to the held-out rows, and the per-fold mean squared prediction
//! error is averaged over folds.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::rng::{stream_rng, Stream};
use crate::dictionary::{Dictionary, Observation};
use crate::error::{Error, Result};
use crate::objectives::Problem;
use crate::params::AggregationParams;
use crate::simplex::SimplexWeights;
use crate::solvers::{solve_bmax_exact, solve_ewma, ExactSolveOptions};

pub const DEFAULT_FOLDS: usize = 10;
/// Gradient tolerance of the exact fits inside cross-validation.
pub const CV_GRAD_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CvMethod {
    Ewma,
    /// Scored with the weights of the exact BMAX minimizer, the limit of the
    /// greedy iterates.
    GmaBmax,
}

/// `points` log-spaced values from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..points)
                .map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp())
                .collect()
        }
    }
}

/// Twelve values of `ω²` from `σ²/2` to `50σ²`.
pub fn default_omega_sq_grid(sigma: f64) -> Vec<f64> {
    let s2 = sigma * sigma;
    log_grid(0.5 * s2, 50.0 * s2, 12)
}

/// Held-out index sets, one per fold, from a shuffle of `0..n`.
pub fn fold_indices<R: Rng + ?Sized>(n: usize, folds: usize, rng: &mut R) -> Vec<Vec<usize>> {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    (0..folds)
        .map(|f| {
            let mut block = perm[f * n / folds..(f + 1) * n / folds].to_vec();
            block.sort_unstable();
            block
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct CvResult {
    pub omega_sq: f64,
    /// Mean held-out error for every grid value, in grid order.
    pub scores: Vec<f64>,
}

/// Selects `ω²` from `grid` by `folds`-fold cross-validation, shuffling with
/// the fold stream of `seed`.
pub fn cross_validate_omega(
    dict: &Dictionary,
    obs: &Observation,
    base: &AggregationParams,
    grid: &[f64],
    folds: usize,
    method: CvMethod,
    seed: u64,
) -> Result<CvResult> {
    let mut rng = stream_rng(seed, 0, Stream::FoldShuffle);
    cross_validate_omega_with(dict, obs, base, grid, folds, method, &mut rng)
}

/// As [`cross_validate_omega`] with a caller-supplied shuffle generator.
pub fn cross_validate_omega_with<R: Rng + ?Sized>(
    dict: &Dictionary,
    obs: &Observation,
    base: &AggregationParams,
    grid: &[f64],
    folds: usize,
    method: CvMethod,
    rng: &mut R,
) -> Result<CvResult> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("empty omega grid".into()));
    }
    if folds < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 folds, got {folds}")));
    }
    let n = dict.n();
    if n < folds {
        return Err(Error::InvalidParameter(format!(
            "{n} design points cannot fill {folds} folds"
        )));
    }
    if grid.len() == 1 {
        return Ok(CvResult {
            omega_sq: grid[0],
            scores: vec![f64::NAN],
        });
    }

    let mut scores = vec![0.0; grid.len()];
    for held_out in fold_indices(n, folds, rng) {
        let mut is_held = vec![false; n];
        for &i in &held_out {
            is_held[i] = true;
        }
        let train: Vec<usize> = (0..n).filter(|&i| !is_held[i]).collect();
        let train_dict = dict.restrict_rows(&train)?;
        let train_obs = obs.restrict_rows(&train)?;
        let test_dict = dict.restrict_rows(&held_out)?;
        let test_y: Vec<f64> = held_out.iter().map(|&i| obs.y()[i]).collect();

        let mut warm: Option<Vec<f64>> = None;
        for (score, &omega_sq) in scores.iter_mut().zip(grid) {
            let params = base.with_omega_sq(omega_sq)?;
            let problem = Problem::new(&train_dict, &train_obs, &params)?;
            let weights = fit_weights(&problem, method, &mut warm)?;
            let pred = test_dict.mix(&weights)?;
            let err: f64 = pred.iter().zip(&test_y).map(|(p, y)| (p - y) * (p - y)).sum();
            *score += err / held_out.len() as f64;
        }
    }
    for s in &mut scores {
        *s /= folds as f64;
    }

    // smallest score; among equal scores the smallest ω², then the first index
    let mut best = 0;
    for i in 1..grid.len() {
        if scores[i] < scores[best] || (scores[i] == scores[best] && grid[i] < grid[best]) {
            best = i;
        }
    }
    Ok(CvResult {
        omega_sq: grid[best],
        scores,
    })
}

fn fit_weights(problem: &Problem<'_>, method: CvMethod, warm: &mut Option<Vec<f64>>) -> Result<SimplexWeights> {
    match method {
        CvMethod::Ewma => Ok(solve_ewma(problem)?.weights),
        CvMethod::GmaBmax => {
            let opts = ExactSolveOptions {
                grad_tolerance: CV_GRAD_TOLERANCE,
                initial: warm.take(),
                ..Default::default()
            };
            let sol = solve_bmax_exact(problem, &opts)?.require_converged()?;
            *warm = Some(sol.psi);
            Ok(sol.posterior)
        }
    }
}
