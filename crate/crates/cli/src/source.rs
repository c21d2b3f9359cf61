use std::path::Path;

use bmax_core::experiments::{generate_scenario, ScenarioSpec};
use bmax_core::{load_csv, AggregationParams, Dictionary, Entropy, Observation, SimplexWeights};
use serde::Serialize;

use crate::args::{Draw, Model, Source};
use crate::failure::{CliResult, Failure};

/// Where the data of a run came from, as recorded in its summary.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DataOrigin {
    Input(String),
    Scenario { spec: ScenarioSpec, replicate: u64 },
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::config(format!("{}: {e}", path.display())))
}

pub fn scenario(preset: Option<&str>, file: Option<&Path>, seed: Option<u64>) -> CliResult<ScenarioSpec> {
    let mut spec = match (preset, file) {
        (Some(name), _) => ScenarioSpec::preset(name, 0)
            .ok_or_else(|| Failure::config(format!("unknown preset '{name}'; expected exp1 or exp2")))?,
        (None, Some(path)) => read_json(path)?,
        (None, None) => return Err(Failure::config("no scenario given")),
    };
    if let Some(seed) = seed {
        spec.seed = seed;
    }
    spec.validate()?;
    Ok(spec)
}

pub fn load(source: &Source, draw: &Draw) -> CliResult<(Dictionary, Observation, DataOrigin)> {
    if let Some(path) = &source.input {
        let (dict, obs) = load_csv(path).map_err(|e| Failure::data(format!("{}: {e}", path.display())))?;
        return Ok((dict, obs, DataOrigin::Input(path.display().to_string())));
    }
    let spec = scenario(source.preset.as_deref(), source.scenario.as_deref(), draw.seed)?;
    let (dict, obs) = generate_scenario(&spec, draw.replicate)?;
    Ok((
        dict,
        obs,
        DataOrigin::Scenario {
            spec,
            replicate: draw.replicate,
        },
    ))
}

pub fn params(model: &Model, m: usize, entropy: Entropy) -> CliResult<AggregationParams> {
    let prior = match &model.prior {
        None => SimplexWeights::uniform(m),
        Some(w) if w.len() != m => {
            return Err(Failure::config(format!(
                "--prior has {} weights for {m} candidates",
                w.len()
            )))
        }
        Some(w) => SimplexWeights::new(w.clone())?,
    };
    Ok(AggregationParams::new(model.nu, model.omega_sq, prior, entropy)?)
}
