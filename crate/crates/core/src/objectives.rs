//! Scalar objectives of the primal (log J) and dual (Q, T, S) formulations.
//!
//! A [`Problem`] binds a dictionary, an observation and the aggregation
//! parameters, and caches the data-fit distances `||f_j - Y||²` which every
//! evaluation of `log J` reuses.

use serde::Serialize;

use crate::dictionary::{Dictionary, Observation};
use crate::error::{check_len, Error, Result};
use crate::linalg::{dot, sq_dist};
use crate::lse::log_sum_exp;
use crate::params::AggregationParams;
use crate::simplex::{kl_divergence, rho_entropy, Entropy, SimplexWeights};

/// Strong convexity (`a1`), smoothness (`a2`) and greedy-rate (`a3`)
/// constants of `log J`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvatureConstants {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
}

impl CurvatureConstants {
    /// Constants for parameters `(ν, ω²)` and candidate norm bound `l`.
    pub fn new(nu: f64, omega_sq: f64, l: f64) -> Self {
        let a1 = (1.0 - nu) / omega_sq;
        let l2 = l * l;
        Self {
            a1,
            a2: a1 + a1 * a1 * l2,
            a3: a1 * l2 + a1 * a1 * l2 * l2,
        }
    }
}

pub fn curvature(dict: &Dictionary, params: &AggregationParams) -> CurvatureConstants {
    CurvatureConstants::new(params.nu(), params.omega_sq(), dict.l2_bound())
}

#[derive(Debug, Clone)]
pub struct Problem<'a> {
    dict: &'a Dictionary,
    obs: &'a Observation,
    params: &'a AggregationParams,
    log_prior: Vec<f64>,
    data_fit: Vec<f64>,
}

impl<'a> Problem<'a> {
    pub fn new(dict: &'a Dictionary, obs: &'a Observation, params: &'a AggregationParams) -> Result<Self> {
        check_len("observation", dict.n(), obs.n())?;
        check_len("prior", dict.m(), params.prior().len())?;
        let log_prior = params.prior().as_slice().iter().map(|p| p.ln()).collect();
        let data_fit = dict.sq_distances(obs.y());
        Ok(Self {
            dict,
            obs,
            params,
            log_prior,
            data_fit,
        })
    }

    pub fn dict(&self) -> &'a Dictionary {
        self.dict
    }

    pub fn obs(&self) -> &'a Observation {
        self.obs
    }

    pub fn params(&self) -> &'a AggregationParams {
        self.params
    }

    pub fn n(&self) -> usize {
        self.dict.n()
    }

    pub fn m(&self) -> usize {
        self.dict.m()
    }

    /// `log π_j`.
    pub fn log_prior(&self) -> &[f64] {
        &self.log_prior
    }

    /// `||f_j - Y||²`.
    pub fn data_fit(&self) -> &[f64] {
        &self.data_fit
    }

    pub fn a1(&self) -> f64 {
        (1.0 - self.params.nu()) / self.params.omega_sq()
    }

    pub fn curvature(&self) -> CurvatureConstants {
        curvature(self.dict, self.params)
    }

    /// `log π_j - ||f_j - Y||²/(2ω²)`: the EWMA log-weights.
    pub fn ewma_logits(&self) -> Vec<f64> {
        let scale = 0.5 / self.params.omega_sq();
        self.log_prior
            .iter()
            .zip(&self.data_fit)
            .map(|(lp, d)| lp - scale * d)
            .collect()
    }

    /// Per-candidate terms of `log J(ψ)` before the log-sum-exp; their softmax
    /// is the posterior under the exponentiated loss.
    pub fn posterior_logits(&self, psi: &[f64]) -> Result<Vec<f64>> {
        check_len("psi", self.n(), psi.len())?;
        let scale = 0.5 / self.params.omega_sq();
        let half_a1 = 0.5 * self.a1();
        Ok(self
            .dict
            .candidates()
            .zip(self.log_prior.iter().zip(&self.data_fit))
            .map(|(f, (lp, d))| lp - scale * d + half_a1 * sq_dist(psi, f))
            .collect())
    }

    pub fn log_j(&self, psi: &[f64]) -> Result<f64> {
        let value = log_sum_exp(&self.posterior_logits(psi)?);
        finite(value, "log J")
    }

    /// Gradient of `log J` at `ψ`, `A1 (ψ - f_λ)`, with the posterior `λ`.
    pub fn grad_log_j(&self, psi: &[f64]) -> Result<(Vec<f64>, SimplexWeights)> {
        let (_, grad, posterior) = self.log_j_with_grad(psi)?;
        Ok((grad, posterior))
    }

    /// `log J`, its gradient and the posterior from a single pass.
    pub fn log_j_with_grad(&self, psi: &[f64]) -> Result<(f64, Vec<f64>, SimplexWeights)> {
        let logits = self.posterior_logits(psi)?;
        let value = finite(log_sum_exp(&logits), "log J")?;
        let posterior = SimplexWeights::from_log_weights(&logits)?;
        let mean = self.dict.mix(&posterior)?;
        let a1 = self.a1();
        let grad = psi.iter().zip(&mean).map(|(p, m)| a1 * (p - m)).collect();
        Ok((value, grad, posterior))
    }

    /// `Q(λ) = ||f_λ - Y||² + ν Σ λ_j ||f_j - f_λ||² + 2ω² K_ρ(λ, π)`.
    pub fn q_objective(&self, lambda: &SimplexWeights) -> Result<f64> {
        let f_lambda = self.dict.mix(lambda)?;
        let fit = sq_dist(&f_lambda, self.obs.y());
        let spread: f64 = lambda
            .as_slice()
            .iter()
            .zip(self.dict.candidates())
            .filter(|(l, _)| **l > 0.0)
            .map(|(l, f)| l * sq_dist(f, &f_lambda))
            .sum();
        let entropy = rho_entropy(lambda, self.params.prior(), self.params.entropy())?;
        finite(
            fit + self.params.nu() * spread + 2.0 * self.params.omega_sq() * entropy,
            "Q",
        )
    }

    /// `log π_j - ν ||f_j - h||²/(2ω²)`, whose softmax minimizes `S(·, h)`.
    pub fn dual_logits(&self, h: &[f64]) -> Result<Vec<f64>> {
        check_len("h", self.n(), h.len())?;
        let scale = 0.5 * self.params.nu() / self.params.omega_sq();
        Ok(self
            .dict
            .candidates()
            .zip(&self.log_prior)
            .map(|(f, lp)| lp - scale * sq_dist(f, h))
            .collect())
    }

    /// `T(h) = -ν/(1-ν) ||h - Y||² - 2ω² log Σ π_j exp(-ν ||f_j - h||²/(2ω²))`.
    pub fn t_objective(&self, h: &[f64]) -> Result<f64> {
        self.require_kl("T")?;
        let nu = self.params.nu();
        let lse = log_sum_exp(&self.dual_logits(h)?);
        finite(
            -nu / (1.0 - nu) * sq_dist(h, self.obs.y()) - 2.0 * self.params.omega_sq() * lse,
            "T",
        )
    }

    /// `S(λ, h) = -ν/(1-ν) ||h - Y||² + ν Σ λ_j ||f_j - h||² + 2ω² K(λ, π)`.
    pub fn s_objective(&self, lambda: &SimplexWeights, h: &[f64]) -> Result<f64> {
        self.require_kl("S")?;
        check_len("lambda", self.m(), lambda.len())?;
        check_len("h", self.n(), h.len())?;
        let nu = self.params.nu();
        let spread: f64 = lambda
            .as_slice()
            .iter()
            .zip(self.dict.candidates())
            .map(|(l, f)| l * sq_dist(f, h))
            .sum();
        let kl = kl_divergence(lambda, self.params.prior())?;
        finite(
            -nu / (1.0 - nu) * sq_dist(h, self.obs.y()) + nu * spread + 2.0 * self.params.omega_sq() * kl,
            "S",
        )
    }

    fn require_kl(&self, what: &'static str) -> Result<()> {
        match self.params.entropy() {
            Entropy::Kl => Ok(()),
            Entropy::Linear => Err(Error::RequiresKl(what)),
        }
    }

    /// `<f_j, Y>` for every candidate.
    pub(crate) fn y_products(&self) -> Vec<f64> {
        self.dict.candidates().map(|f| dot(f, self.obs.y())).collect()
    }
}

fn finite(x: f64, what: &'static str) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::NonFinite(what))
    }
}
