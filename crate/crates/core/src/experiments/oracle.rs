//! Monte-Carlo check of the deviation oracle inequality for the exact BMAX
//! estimator:
//!
//! ```text
//! ||ψ* - η||² ≤ min_j { ||f_j - η||² + 2ω² log(1/(π_j δ)) }   w.p. ≥ 1 - δ
//! ```
//!
//! valid when `ω² ≥ σ²/min(ν, 1-ν)`.

use rayon::prelude::*;
use serde::Serialize;

use super::scenario::{generate_scenario, ScenarioSpec};
use crate::error::{Error, Result};
use crate::linalg::sq_dist;
use crate::objectives::Problem;
use crate::params::AggregationParams;
use crate::solvers::{solve_bmax_exact, ExactSolveOptions};

/// Relative slack on the `ω²` precondition so `ω² = σ²/min(ν,1-ν)` computed
/// in floating point is accepted.
const PRECONDITION_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    pub replicates: usize,
    pub delta: f64,
    /// Replicates in which the deviation bound held.
    pub successes: usize,
    pub frequency: f64,
    /// `1 - δ - 2 sqrt(δ(1-δ)/R)`.
    pub threshold: f64,
    pub passes: bool,
    /// Mean of `||ψ* - η||²` over replicates.
    pub mean_loss: f64,
    /// Mean of `min_j {||f_j - η||² + 2ω² log(1/π_j)}`, the expectation bound.
    pub mean_expectation_bound: f64,
}

/// Minimal `ω²` allowed by the oracle inequality.
pub fn min_omega_sq(sigma: f64, nu: f64) -> f64 {
    sigma * sigma / nu.min(1.0 - nu)
}

pub fn check_oracle_inequality(
    spec: &ScenarioSpec,
    params: &AggregationParams,
    replicates: usize,
    delta: f64,
    workers: usize,
) -> Result<OracleReport> {
    spec.validate()?;
    if replicates == 0 || workers == 0 {
        return Err(Error::InvalidParameter(
            "replicates and workers must be at least 1".into(),
        ));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!("delta must lie in (0,1), got {delta}")));
    }
    if params.prior().len() != spec.m {
        return Err(Error::InvalidParameter(
            "prior length differs from the scenario's m".into(),
        ));
    }
    let floor = min_omega_sq(spec.sigma, params.nu());
    if params.omega_sq() < floor * (1.0 - PRECONDITION_SLACK) {
        return Err(Error::InvalidParameter(format!(
            "omega^2 = {} is below sigma^2/min(nu,1-nu) = {floor}",
            params.omega_sq()
        )));
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    let rows: Vec<(bool, f64, f64)> = pool.install(|| {
        (0..replicates)
            .into_par_iter()
            .map(|r| one_replicate(spec, params, r as u64, delta))
            .collect::<Result<Vec<_>>>()
    })?;

    let successes = rows.iter().filter(|r| r.0).count();
    let frequency = successes as f64 / replicates as f64;
    let threshold = 1.0 - delta - 2.0 * (delta * (1.0 - delta) / replicates as f64).sqrt();
    let count = replicates as f64;
    Ok(OracleReport {
        replicates,
        delta,
        successes,
        frequency,
        threshold,
        passes: frequency >= threshold,
        mean_loss: rows.iter().map(|r| r.1).sum::<f64>() / count,
        mean_expectation_bound: rows.iter().map(|r| r.2).sum::<f64>() / count,
    })
}

fn one_replicate(spec: &ScenarioSpec, params: &AggregationParams, r: u64, delta: f64) -> Result<(bool, f64, f64)> {
    let (dict, obs) = generate_scenario(spec, r)?;
    let truth = obs.truth().expect("generated scenarios carry the truth");
    let problem = Problem::new(&dict, &obs, params)?;
    let sol = solve_bmax_exact(&problem, &ExactSolveOptions::default())?.require_converged()?;
    let loss = sq_dist(&sol.psi, truth);
    let two_w2 = 2.0 * params.omega_sq();
    let mut deviation_bound = f64::INFINITY;
    let mut expectation_bound = f64::INFINITY;
    for (f, p) in dict.candidates().zip(params.prior().as_slice()) {
        let d = sq_dist(f, truth);
        deviation_bound = deviation_bound.min(d + two_w2 * (1.0 / (p * delta)).ln());
        expectation_bound = expectation_bound.min(d + two_w2 * (1.0 / p).ln());
    }
    Ok((loss <= deviation_bound, loss, expectation_bound))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::scenario::Scale;
    use crate::simplex::Entropy;

    fn small() -> ScenarioSpec {
        ScenarioSpec {
            n: 10,
            m: 6,
            m1: 2,
            s: Scale::Fixed(1.0),
            ..ScenarioSpec::exp1(5)
        }
    }

    #[test]
    fn noiseless_and_single_candidate_always_hold() {
        let spec = ScenarioSpec { sigma: 0.0, ..small() };
        let p = AggregationParams::flat(6, 0.5, 1.0, Entropy::Kl).unwrap();
        let r = check_oracle_inequality(&spec, &p, 10, 0.1, 1).unwrap();
        assert_eq!(r.successes, 10);

        let spec = ScenarioSpec { m: 1, m1: 1, ..small() };
        let p = AggregationParams::flat(1, 0.5, min_omega_sq(2.0, 0.5), Entropy::Kl).unwrap();
        let r = check_oracle_inequality(&spec, &p, 10, 0.1, 2).unwrap();
        assert_eq!(r.frequency, 1.0);
        assert!(r.passes);
    }

    #[test]
    fn rejects_small_omega() {
        let p = AggregationParams::flat(6, 0.5, 7.9, Entropy::Kl).unwrap();
        assert!(check_oracle_inequality(&small(), &p, 5, 0.1, 1).is_err());
        let p = AggregationParams::flat(6, 0.5, 8.0, Entropy::Kl).unwrap();
        assert!(check_oracle_inequality(&small(), &p, 5, 0.1, 1).is_ok());
    }
}
