//! Synthetic experiments: scenario generation, cross-validation of `ω²`,
//! replicated regret comparisons and the oracle-inequality check.

pub mod cv;
pub mod oracle;
pub mod replicate;
pub mod rng;
pub mod scenario;

pub use cv::{cross_validate_omega, default_omega_sq_grid, CvMethod, CvResult};
pub use oracle::{check_oracle_inequality, min_omega_sq, OracleReport};
pub use replicate::{
    cumulative_frequency, frequency_table, run_replications, summarize, write_replicates_csv, CvConfig,
    ExperimentConfig, ExperimentSummary, MethodConfig, OmegaChoice, RegretSeries, ReplicationResult,
};
pub use scenario::{generate_scenario, Scale, ScenarioSpec, TruthKind};
