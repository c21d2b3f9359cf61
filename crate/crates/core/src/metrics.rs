//! Error and regret measured against the (simulated) truth.

use crate::dictionary::Dictionary;
use crate::error::{check_len, Error, Result};
use crate::linalg::sq_dist;

/// `(1/n) ||estimate - truth||²`.
pub fn mse(estimate: &[f64], truth: &[f64]) -> Result<f64> {
    check_len("estimate", truth.len(), estimate.len())?;
    if truth.is_empty() {
        return Err(Error::Data("mse of empty vectors".into()));
    }
    Ok(sq_dist(estimate, truth) / truth.len() as f64)
}

/// Index of the candidate with the smallest true MSE (first on ties).
pub fn oracle_index(dict: &Dictionary, truth: &[f64]) -> Result<usize> {
    check_len("truth", dict.n(), truth.len())?;
    let mut best = (f64::INFINITY, 0);
    for (j, f) in dict.candidates().enumerate() {
        let d = sq_dist(f, truth);
        if d < best.0 {
            best = (d, j);
        }
    }
    Ok(best.1)
}

/// MSE of the estimate minus the MSE of the oracle model. Can be negative.
pub fn regret(estimate: &[f64], truth: &[f64], dict: &Dictionary) -> Result<f64> {
    let k = oracle_index(dict, truth)?;
    Ok(mse(estimate, truth)? - mse(dict.candidate(k), truth)?)
}
