//! Greedy minimization of the linear-entropy `Q` over the simplex (GMA-0),
//! and the projection estimator it yields at `ν = 0`.
//!
//! Trial points `λ' = (1-α)λ + α e_j` are scored in `O(1)` each from
//! `u_j = <f_λ, f_j>`, which is updated with one Gram row per step.

use super::{argmin, greedy_step_size, GreedyRun, IterationRecord, SolveTrace};
use crate::dictionary::{Dictionary, Gram, Observation};
use crate::error::{check_len, Error, Result};
use crate::linalg::dot;
use crate::objectives::Problem;
use crate::params::AggregationParams;
use crate::simplex::{Entropy, SimplexWeights};

/// Iterations used by [`solve_proj`] unless told otherwise.
pub const DEFAULT_PROJ_ITERATIONS: usize = 200;

pub struct GreedyQ<'p, 'a> {
    problem: &'p Problem<'a>,
    gram: &'p Gram,
    flat_prior: bool,
    y_products: Vec<f64>,
    y_sq: f64,
    /// `-log π_j`
    penalties: Vec<f64>,
    weights: Vec<f64>,
    f_lambda: Vec<f64>,
    /// `<f_λ, f_j>`
    inner: Vec<f64>,
    /// `Σ λ_i ||f_i||²`
    weighted_sq: f64,
    /// `Σ λ_i log(1/π_i)`
    entropy: f64,
    k: usize,
    trace: SolveTrace,
}

impl<'p, 'a> GreedyQ<'p, 'a> {
    /// Starts from `λ⁽⁰⁾ = 0`. Only the linear entropy is supported.
    pub fn new(problem: &'p Problem<'a>, gram: &'p Gram) -> Result<Self> {
        if problem.params().entropy() != Entropy::Linear {
            return Err(Error::RequiresLinear("GMA-0"));
        }
        check_len("gram", problem.m(), gram.m())?;
        let y = problem.obs().y();
        Ok(Self {
            problem,
            gram,
            flat_prior: problem.params().prior().is_uniform(),
            y_products: problem.y_products(),
            y_sq: dot(y, y),
            penalties: problem.log_prior().iter().map(|lp| -lp).collect(),
            weights: vec![0.0; problem.m()],
            f_lambda: vec![0.0; problem.n()],
            inner: vec![0.0; problem.m()],
            weighted_sq: 0.0,
            entropy: 0.0,
            k: 0,
            trace: SolveTrace::default(),
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn estimate(&self) -> &[f64] {
        &self.f_lambda
    }

    /// Current weights; all zero before the first step.
    pub fn raw_weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn trace(&self) -> &SolveTrace {
        &self.trace
    }

    /// `Q((1-α)λ + α e_j)` for every `j`, with `α` the next step size.
    pub fn candidate_values(&self) -> Vec<f64> {
        let alpha = greedy_step_size(self.k + 1);
        let keep = 1.0 - alpha;
        let nu = self.problem.params().nu();
        let two_w2 = 2.0 * self.problem.params().omega_sq();
        let fl_sq = dot(&self.f_lambda, &self.f_lambda);
        let fl_y = dot(&self.f_lambda, self.problem.obs().y());
        (0..self.problem.m())
            .map(|j| {
                let gjj = self.gram.get(j, j);
                let trial_sq = keep * keep * fl_sq + 2.0 * alpha * keep * self.inner[j] + alpha * alpha * gjj;
                let trial_y = keep * fl_y + alpha * self.y_products[j];
                let fit = trial_sq - 2.0 * trial_y + self.y_sq;
                let spread = keep * self.weighted_sq + alpha * gjj - trial_sq;
                let entropy = keep * self.entropy + alpha * self.penalties[j];
                fit + nu * spread + two_w2 * entropy
            })
            .collect()
    }

    /// `||f_j - Y||² - (1-ν)(1-α)||f_λ - f_j||²`: a positive multiple of
    /// `Q(λ')` minus a constant when the prior is flat.
    pub fn simplified_scores(&self) -> Vec<f64> {
        let alpha = greedy_step_size(self.k + 1);
        let coef = (1.0 - self.problem.params().nu()) * (1.0 - alpha);
        let fl_sq = dot(&self.f_lambda, &self.f_lambda);
        (0..self.problem.m())
            .map(|j| {
                let dist = fl_sq - 2.0 * self.inner[j] + self.gram.get(j, j);
                self.problem.data_fit()[j] - coef * dist
            })
            .collect()
    }

    pub fn step(&mut self) -> Result<IterationRecord> {
        let chosen = if self.flat_prior {
            argmin(&self.simplified_scores())
        } else {
            argmin(&self.candidate_values())
        };
        self.k += 1;
        let alpha = greedy_step_size(self.k);
        let keep = 1.0 - alpha;

        for (p, f) in self.f_lambda.iter_mut().zip(self.problem.dict().candidate(chosen)) {
            *p = keep * *p + alpha * f;
        }
        for (u, g) in self.inner.iter_mut().zip(self.gram.row(chosen)) {
            *u = keep * *u + alpha * g;
        }
        for w in &mut self.weights {
            *w *= keep;
        }
        self.weights[chosen] += alpha;
        self.weighted_sq = keep * self.weighted_sq + alpha * self.gram.get(chosen, chosen);
        self.entropy = keep * self.entropy + alpha * self.penalties[chosen];

        let record = IterationRecord {
            k: self.k,
            chosen: Some(chosen),
            step: alpha,
            objective: self.current_value(),
        };
        if !record.objective.is_finite() {
            return Err(Error::NonFinite("Q"));
        }
        self.trace.iterations.push(record.clone());
        self.trace.final_objective = record.objective;
        Ok(record)
    }

    fn current_value(&self) -> f64 {
        let fl_sq = dot(&self.f_lambda, &self.f_lambda);
        let fit = fl_sq - 2.0 * dot(&self.f_lambda, self.problem.obs().y()) + self.y_sq;
        let params = self.problem.params();
        fit + params.nu() * (self.weighted_sq - fl_sq) + 2.0 * params.omega_sq() * self.entropy
    }

    pub fn weights(&self) -> Result<SimplexWeights> {
        SimplexWeights::new(self.weights.clone())
    }

    pub fn finish(mut self) -> Result<GreedyRun> {
        let weights = self.weights()?;
        self.trace.final_weights = Some(weights.clone());
        Ok(GreedyRun {
            estimate: self.f_lambda,
            weights,
            trace: self.trace,
        })
    }
}

/// `k_max` greedy steps on the linear-entropy `Q`.
pub fn gma_0(problem: &Problem<'_>, k_max: usize) -> Result<GreedyRun> {
    if k_max == 0 {
        return Err(Error::InvalidParameter("k_max must be at least 1".into()));
    }
    let gram = problem.dict().gram();
    let mut run = GreedyQ::new(problem, &gram)?;
    for _ in 0..k_max {
        run.step()?;
    }
    run.finish()
}

/// Approximate least-squares projection of `Y` onto the convex hull of the
/// candidates.
pub fn solve_proj(dict: &Dictionary, obs: &Observation, max_iter: usize) -> Result<GreedyRun> {
    let params = AggregationParams::projection(dict.m());
    let problem = Problem::new(dict, obs, &params)?;
    gma_0(&problem, max_iter)
}
