use std::fs::File;

use bmax_core::dictionary::fmt_f64;
use bmax_core::solvers::{SolveTrace, DEFAULT_PROJ_ITERATIONS};
use bmax_core::{
    gma_0, gma_bmax, mse, regret, solve_bmax_exact, solve_ewma, solve_proj, solve_star, Entropy, ExactSolveOptions,
    Problem, SimplexWeights,
};
use serde::Serialize;

use crate::args::{ExactArgs, Method, SolveArgs};
use crate::failure::{CliResult, Failure, Status};
use crate::output::{prepare, write_json};
use crate::source::{self, DataOrigin};

const DEFAULT_K: usize = 150;

#[derive(Serialize)]
struct SolveConfig<'a> {
    command: &'static str,
    method: Method,
    data: &'a DataOrigin,
    nu: f64,
    omega_sq: f64,
    entropy: Entropy,
    #[serde(skip_serializing_if = "Option::is_none")]
    prior: Option<&'a [f64]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    exact: Option<ExactSolveOptions>,
}

#[derive(Serialize)]
struct StarSummary {
    k1: usize,
    k2: usize,
    alpha: f64,
}

#[derive(Serialize)]
struct SolveSummary<'a> {
    config: SolveConfig<'a>,
    n: usize,
    m: usize,
    converged: bool,
    iterations: usize,
    /// `log J` for bmax-exact and gma-bmax, the linear-entropy `Q` for gma-0 and proj.
    objective: Option<f64>,
    grad_norm: Option<f64>,
    estimate: Vec<f64>,
    weights: Option<SimplexWeights>,
    /// `||estimate - y||² / n`
    empirical_mse: f64,
    /// Against the truth, when the data carries it.
    mse: Option<f64>,
    regret: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    star: Option<StarSummary>,
}

fn exact_options(a: &ExactArgs) -> ExactSolveOptions {
    ExactSolveOptions {
        grad_tolerance: a.grad_tolerance,
        max_iterations: a.max_iterations,
        method: a.exact_method.into(),
        initial: None,
    }
}

struct Fit {
    estimate: Vec<f64>,
    weights: Option<SimplexWeights>,
    objective: Option<f64>,
    grad_norm: Option<f64>,
    converged: bool,
    trace: SolveTrace,
    star: Option<StarSummary>,
}

pub fn run(a: &SolveArgs) -> CliResult<()> {
    let (dict, obs, origin) = source::load(&a.source, &a.draw)?;
    let entropy = a
        .model
        .entropy
        .map(Entropy::from)
        .unwrap_or(if a.method == Method::Gma0 {
            Entropy::Linear
        } else {
            Entropy::Kl
        });
    let params = source::params(&a.model, dict.m(), entropy)?;
    let k = match a.method {
        Method::GmaBmax | Method::Gma0 => Some(a.k.unwrap_or(DEFAULT_K)),
        Method::Proj => Some(a.k.unwrap_or(DEFAULT_PROJ_ITERATIONS)),
        _ => None,
    };
    if k == Some(0) {
        return Err(Failure::config("--k must be at least 1"));
    }
    let exact = (a.method == Method::BmaxExact).then(|| exact_options(&a.exact));
    let config = SolveConfig {
        command: "solve",
        method: a.method,
        data: &origin,
        nu: params.nu(),
        omega_sq: params.omega_sq(),
        entropy,
        prior: a.model.prior.as_deref(),
        k,
        exact: exact.clone(),
    };
    let mut files = prepare(&a.out, &["summary.json", "trace.csv"])?.into_iter();
    let (summary_file, trace_file) = (files.next().unwrap(), files.next().unwrap());

    let problem = Problem::new(&dict, &obs, &params)?;
    let fit = match a.method {
        Method::BmaxExact => {
            let sol = solve_bmax_exact(&problem, exact.as_ref().unwrap())?;
            Fit {
                estimate: sol.psi,
                weights: Some(sol.posterior),
                objective: Some(sol.objective),
                grad_norm: Some(sol.grad_norm),
                converged: sol.converged,
                trace: sol.trace,
                star: None,
            }
        }
        Method::GmaBmax | Method::Gma0 | Method::Proj => {
            let k = k.unwrap();
            let run = match a.method {
                Method::GmaBmax => gma_bmax(&problem, k)?,
                Method::Gma0 => gma_0(&problem, k)?,
                _ => solve_proj(&dict, &obs, k)?,
            };
            Fit {
                estimate: run.estimate,
                weights: Some(run.weights),
                objective: Some(run.trace.final_objective),
                grad_norm: None,
                converged: true,
                trace: run.trace,
                star: None,
            }
        }
        Method::Ewma => {
            let fit = solve_ewma(&problem)?;
            Fit {
                estimate: fit.estimate,
                weights: Some(fit.weights),
                objective: None,
                grad_norm: None,
                converged: true,
                trace: SolveTrace::default(),
                star: None,
            }
        }
        Method::Star => {
            let fit = solve_star(&dict, &obs)?;
            Fit {
                estimate: fit.estimate,
                weights: None,
                objective: None,
                grad_norm: None,
                converged: true,
                trace: SolveTrace::default(),
                star: Some(StarSummary {
                    k1: fit.k1,
                    k2: fit.k2,
                    alpha: fit.alpha,
                }),
            }
        }
    };

    write_trace(trace_file, &fit.trace)?;
    let truth = obs.truth();
    let summary = SolveSummary {
        config,
        n: dict.n(),
        m: dict.m(),
        converged: fit.converged,
        iterations: fit.trace.iterations.len(),
        objective: fit.objective,
        grad_norm: fit.grad_norm,
        empirical_mse: mse(&fit.estimate, obs.y())?,
        mse: truth.map(|t| mse(&fit.estimate, t)).transpose()?,
        regret: truth.map(|t| regret(&fit.estimate, t, &dict)).transpose()?,
        estimate: fit.estimate,
        weights: fit.weights,
        star: fit.star,
    };
    write_json(summary_file, &summary)?;
    if !summary.converged {
        return Err(Failure {
            status: Status::NotConverged,
            message: format!(
                "exact solver stopped after {} iterations with gradient norm {:e}; diagnostics in {}",
                summary.iterations,
                summary.grad_norm.unwrap_or(f64::NAN),
                a.out.join("summary.json").display()
            ),
        });
    }
    Ok(())
}

/// `k,chosen,alpha,objective`, one row per iteration; `alpha` is the step length.
fn write_trace(file: File, trace: &SolveTrace) -> CliResult<()> {
    let io = |e: csv::Error| Failure::data(format!("writing trace: {e}"));
    let mut w = csv::Writer::from_writer(file);
    w.write_record(["k", "chosen", "alpha", "objective"]).map_err(io)?;
    for rec in &trace.iterations {
        w.write_record([
            rec.k.to_string(),
            rec.chosen.map(|c| c.to_string()).unwrap_or_default(),
            fmt_f64(rec.step),
            fmt_f64(rec.objective),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| Failure::data(format!("writing trace: {e}")))
}
