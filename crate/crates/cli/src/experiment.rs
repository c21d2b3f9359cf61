use std::io::BufWriter;

use bmax_core::experiments::{
    check_oracle_inequality, min_omega_sq, run_replications, summarize, write_replicates_csv, ExperimentConfig,
    OracleReport, ScenarioSpec,
};
use bmax_core::{AggregationParams, Entropy};
use serde::Serialize;

use crate::args::{ExperimentArgs, OracleArgs};
use crate::failure::{CliResult, Failure, Status};
use crate::output::{prepare, write_json};
use crate::source::{read_json, scenario};

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Accepts a bare configuration or the `config` member of an earlier summary.
fn load_config(path: &std::path::Path) -> CliResult<ExperimentConfig> {
    let value: serde_json::Value = read_json(path)?;
    let value = match value {
        serde_json::Value::Object(mut map) if !map.contains_key("scenario") && map.contains_key("config") => {
            map.remove("config").expect("checked")
        }
        other => other,
    };
    serde_json::from_value(value).map_err(|e| Failure::config(format!("{}: {e}", path.display())))
}

pub fn run(a: &ExperimentArgs) -> CliResult<()> {
    let mut config = match (&a.source.preset, &a.source.config) {
        (Some(name), _) => ExperimentConfig::preset(name, 0)
            .ok_or_else(|| Failure::config(format!("unknown preset '{name}'; expected exp1 or exp2")))?,
        (None, Some(path)) => load_config(path)?,
        (None, None) => return Err(Failure::config("no experiment given")),
    };
    if let Some(r) = a.replicates {
        config.replicates = r;
    }
    if let Some(seed) = a.seed {
        config.scenario.seed = seed;
    }
    if let Some(nu) = a.nu {
        config.nu = nu;
    }
    config.validate()?;
    let workers = a.workers.unwrap_or_else(default_workers);
    if workers == 0 {
        return Err(Failure::config("--workers must be at least 1"));
    }
    let mut files = prepare(&a.out, &["summary.json", "replicates.csv"])?.into_iter();
    let (summary_file, csv_file) = (files.next().unwrap(), files.next().unwrap());

    let result = run_replications(&config, workers)?;
    let summary = summarize(&config, &result)?;
    for s in &summary.regret {
        let k = s.k.map(|k| format!(" k={k}")).unwrap_or_default();
        eprintln!("{}{k}: regret {:.4} +/- {:.4}", s.method, s.mean, s.sd);
    }
    write_replicates_csv(BufWriter::new(csv_file), &result)?;
    write_json(summary_file, &summary)
}

#[derive(Serialize)]
struct OracleConfig<'a> {
    command: &'static str,
    scenario: &'a ScenarioSpec,
    nu: f64,
    omega_sq: f64,
    delta: f64,
    replicates: usize,
}

#[derive(Serialize)]
struct OracleSummary<'a> {
    config: OracleConfig<'a>,
    report: &'a OracleReport,
}

pub fn run_oracle(a: &OracleArgs) -> CliResult<()> {
    let spec = scenario(a.source.preset.as_deref(), a.source.scenario.as_deref(), a.seed)?;
    if !(a.nu > 0.0 && a.nu < 1.0) {
        return Err(Failure::config(format!("--nu must lie in (0,1), got {}", a.nu)));
    }
    let omega_sq = a.omega_sq.unwrap_or_else(|| min_omega_sq(spec.sigma, a.nu));
    let params = AggregationParams::flat(spec.m, a.nu, omega_sq, Entropy::Kl)?;
    let workers = a.workers.unwrap_or_else(default_workers);
    let file = match &a.out {
        Some(dir) => prepare(dir, &["summary.json"])?.pop(),
        None => None,
    };

    let report = check_oracle_inequality(&spec, &params, a.replicates, a.delta, workers)?;
    let summary = OracleSummary {
        config: OracleConfig {
            command: "oracle-check",
            scenario: &spec,
            nu: a.nu,
            omega_sq,
            delta: a.delta,
            replicates: a.replicates,
        },
        report: &report,
    };
    println!("{}", serde_json::to_string_pretty(&summary).expect("report serializes"));
    if let Some(file) = file {
        write_json(file, &summary)?;
    }
    if report.passes {
        Ok(())
    } else {
        Err(Failure {
            status: Status::CheckFailed,
            message: format!(
                "bound held in {}/{} replicates, below the threshold {:.3}",
                report.successes, report.replicates, report.threshold
            ),
        })
    }
}
