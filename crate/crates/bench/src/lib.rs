//! Fixtures shared by the benchmarks in `benches/`.

use bmax_core::experiments::{generate_scenario, ScenarioSpec};
use bmax_core::{AggregationParams, Dictionary, Entropy, Observation};

/// One replicate of a preset scenario (`"exp1"` or `"exp2"`).
pub fn preset_data(name: &str, replicate: u64) -> (Dictionary, Observation) {
    let spec = ScenarioSpec::preset(name, 0).expect("known preset");
    generate_scenario(&spec, replicate).expect("valid preset")
}

/// Flat-prior parameters with `ν = 1/2`.
pub fn flat_params(m: usize, omega_sq: f64, entropy: Entropy) -> AggregationParams {
    AggregationParams::flat(m, 0.5, omega_sq, entropy).expect("valid parameters")
}
