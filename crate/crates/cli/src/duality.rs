use bmax_core::{solve_saddle, Entropy, ExactSolveOptions, Problem, SaddleOptions, SaddleReport};
use serde::Serialize;

use crate::args::DualityArgs;
use crate::failure::{CliResult, Failure, Status};
use crate::output::{prepare, write_json};
use crate::source::{self, DataOrigin};

#[derive(Serialize)]
struct DualityConfig<'a> {
    command: &'static str,
    data: &'a DataOrigin,
    nu: f64,
    omega_sq: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    prior: Option<&'a [f64]>,
    options: &'a SaddleOptions,
}

#[derive(Serialize)]
struct DualitySummary<'a> {
    config: DualityConfig<'a>,
    passes: bool,
    report: &'a SaddleReport,
}

pub fn run(a: &DualityArgs) -> CliResult<()> {
    let entropy = a.model.entropy.map(Entropy::from).unwrap_or(Entropy::Kl);
    if entropy != Entropy::Kl {
        return Err(Failure::config(
            "the dual objective T is defined only for the KL entropy; drop --entropy linear",
        ));
    }
    if a.tolerance.is_nan() || a.tolerance <= 0.0 {
        return Err(Failure::config("--tolerance must be positive"));
    }
    let (dict, obs, origin) = source::load(&a.source, &a.draw)?;
    let params = source::params(&a.model, dict.m(), entropy)?;
    let file = match &a.out {
        Some(dir) => prepare(dir, &["summary.json"])?.pop(),
        None => None,
    };

    let options = SaddleOptions {
        tolerance: a.tolerance,
        exact: ExactSolveOptions {
            grad_tolerance: a.exact.grad_tolerance,
            max_iterations: a.exact.max_iterations,
            method: a.exact.exact_method.into(),
            initial: None,
        },
    };
    let problem = Problem::new(&dict, &obs, &params)?;
    let report = solve_saddle(&problem, &options)?;
    let summary = DualitySummary {
        config: DualityConfig {
            command: "duality-check",
            data: &origin,
            nu: params.nu(),
            omega_sq: params.omega_sq(),
            prior: a.model.prior.as_deref(),
            options: &options,
        },
        passes: report.passes(),
        report: &report,
    };
    println!("{}", serde_json::to_string_pretty(&summary).expect("report serializes"));
    if let Some(warning) = &report.warning {
        eprintln!("bmax: warning: {warning}");
    }
    if let Some(file) = file {
        write_json(file, &summary)?;
    }
    if summary.passes {
        Ok(())
    } else {
        Err(Failure {
            status: Status::CheckFailed,
            message: format!(
                "saddle check failed at tolerance {:e}: gap {:e}, a_residual {:e}, b_residual {:e}, distance {:e}",
                a.tolerance, report.gap, report.a_residual, report.b_residual, report.primal_dual_distance
            ),
        })
    }
}
