//! Monte-Carlo replication of a scenario across several estimators.

use std::collections::BTreeSet;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cv::{cross_validate_omega_with, default_omega_sq_grid, CvMethod, DEFAULT_FOLDS};
use super::rng::{stream_rng, Stream};
use super::scenario::{generate_scenario, ScenarioSpec};
use crate::dictionary::{fmt_f64, Dictionary, Gram, Observation};
use crate::error::{Error, Result};
use crate::metrics::{oracle_index, regret};
use crate::objectives::Problem;
use crate::params::AggregationParams;
use crate::simplex::Entropy;
use crate::solvers::{
    solve_bmax_exact, solve_ewma, solve_star, ExactSolveOptions, GreedyBmax, GreedyQ, DEFAULT_PROJ_ITERATIONS,
};

/// Iteration counts at which greedy regrets are recorded by default.
pub const DEFAULT_CHECKPOINTS: [usize; 6] = [1, 5, 15, 60, 100, 150];
pub const DEFAULT_K_MAX: usize = 150;
pub const EXP1_BOUNDARIES: [f64; 8] = [0.0, 0.3, 0.6, 0.9, 1.2, 1.5, 1.8, 2.1];
pub const EXP2_BOUNDARIES: [f64; 8] = [0.0, 0.031, 0.063, 0.094, 0.126, 0.157, 0.189, 0.220];

/// How a method obtains `ω²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OmegaChoice {
    /// Cross-validated over the configured grid.
    Cv,
    Fixed(f64),
    /// A multiple of the scenario's `σ²`.
    SigmaSq(f64),
}

fn cv_choice() -> OmegaChoice {
    OmegaChoice::Cv
}

fn unit_sigma_sq() -> OmegaChoice {
    OmegaChoice::SigmaSq(1.0)
}

fn default_proj_iterations() -> usize {
    DEFAULT_PROJ_ITERATIONS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MethodConfig {
    /// The candidate with the smallest true error; regret zero by definition.
    OracleModel,
    Ewma {
        #[serde(default = "cv_choice")]
        omega_sq: OmegaChoice,
    },
    Star,
    Proj {
        #[serde(default = "default_proj_iterations")]
        iterations: usize,
    },
    GmaBmax {
        k_max: usize,
        #[serde(default = "cv_choice")]
        omega_sq: OmegaChoice,
    },
    /// Runs with the linear entropy; under a flat prior `ω²` has no effect.
    #[serde(rename = "gma-0")]
    Gma0 {
        k_max: usize,
        #[serde(default = "unit_sigma_sq")]
        omega_sq: OmegaChoice,
    },
    BmaxExact {
        #[serde(default = "cv_choice")]
        omega_sq: OmegaChoice,
    },
}

impl MethodConfig {
    pub fn name(&self) -> &'static str {
        match self {
            MethodConfig::OracleModel => "oracle",
            MethodConfig::Ewma { .. } => "ewma",
            MethodConfig::Star => "star",
            MethodConfig::Proj { .. } => "proj",
            MethodConfig::GmaBmax { .. } => "gma-bmax",
            MethodConfig::Gma0 { .. } => "gma-0",
            MethodConfig::BmaxExact { .. } => "bmax-exact",
        }
    }

    fn k_max(&self) -> Option<usize> {
        match self {
            MethodConfig::GmaBmax { k_max, .. } | MethodConfig::Gma0 { k_max, .. } => Some(*k_max),
            _ => None,
        }
    }

    fn omega_choice(&self) -> Option<OmegaChoice> {
        match self {
            MethodConfig::Ewma { omega_sq }
            | MethodConfig::GmaBmax { omega_sq, .. }
            | MethodConfig::Gma0 { omega_sq, .. }
            | MethodConfig::BmaxExact { omega_sq } => Some(*omega_sq),
            _ => None,
        }
    }

    /// The method whose fit scores the cross-validation folds.
    fn cv_method(&self) -> CvMethod {
        match self {
            MethodConfig::Ewma { .. } => CvMethod::Ewma,
            _ => CvMethod::GmaBmax,
        }
    }

    pub fn default_set() -> Vec<Self> {
        vec![
            MethodConfig::OracleModel,
            MethodConfig::Ewma {
                omega_sq: OmegaChoice::Cv,
            },
            MethodConfig::Star,
            MethodConfig::Proj {
                iterations: DEFAULT_PROJ_ITERATIONS,
            },
            MethodConfig::GmaBmax {
                k_max: DEFAULT_K_MAX,
                omega_sq: OmegaChoice::Cv,
            },
            MethodConfig::Gma0 {
                k_max: DEFAULT_K_MAX,
                omega_sq: OmegaChoice::SigmaSq(1.0),
            },
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CvConfig {
    #[serde(default = "default_folds")]
    pub folds: usize,
    /// Candidate `ω²` values; twelve log-spaced multiples of `σ²` from 0.5 to
    /// 50 when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<Vec<f64>>,
}

fn default_folds() -> usize {
    DEFAULT_FOLDS
}

impl Default for CvConfig {
    fn default() -> Self {
        Self {
            folds: DEFAULT_FOLDS,
            grid: None,
        }
    }
}

fn default_replicates() -> usize {
    100
}

fn default_nu() -> f64 {
    0.5
}

fn default_checkpoints() -> Vec<usize> {
    DEFAULT_CHECKPOINTS.to_vec()
}

fn default_boundaries() -> Vec<f64> {
    EXP1_BOUNDARIES.to_vec()
}

/// Everything that determines an experiment's output. The worker count is
/// deliberately absent: it never changes results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: ScenarioSpec,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default = "default_nu")]
    pub nu: f64,
    #[serde(default = "MethodConfig::default_set")]
    pub methods: Vec<MethodConfig>,
    #[serde(default = "default_checkpoints")]
    pub checkpoints: Vec<usize>,
    #[serde(default)]
    pub cv: CvConfig,
    /// Upper boundaries of the cumulative-frequency table.
    #[serde(default = "default_boundaries")]
    pub boundaries: Vec<f64>,
}

impl ExperimentConfig {
    pub fn new(scenario: ScenarioSpec) -> Self {
        Self {
            scenario,
            replicates: default_replicates(),
            nu: default_nu(),
            methods: MethodConfig::default_set(),
            checkpoints: default_checkpoints(),
            cv: CvConfig::default(),
            boundaries: default_boundaries(),
        }
    }

    pub fn exp1(seed: u64) -> Self {
        Self::new(ScenarioSpec::exp1(seed))
    }

    pub fn exp2(seed: u64) -> Self {
        Self {
            boundaries: EXP2_BOUNDARIES.to_vec(),
            ..Self::new(ScenarioSpec::exp2(seed))
        }
    }

    pub fn preset(name: &str, seed: u64) -> Option<Self> {
        match name {
            "exp1" => Some(Self::exp1(seed)),
            "exp2" => Some(Self::exp2(seed)),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.replicates == 0 {
            return bad("replicates must be at least 1".into());
        }
        if !(self.nu > 0.0 && self.nu < 1.0) {
            return bad(format!("nu must lie in (0,1), got {}", self.nu));
        }
        if self.methods.is_empty() {
            return bad("no methods configured".into());
        }
        let mut seen = BTreeSet::new();
        for m in &self.methods {
            if !seen.insert(m.name()) {
                return bad(format!("method {} listed twice", m.name()));
            }
            match m {
                MethodConfig::Proj { iterations: 0 } => return bad("proj needs at least one iteration".into()),
                MethodConfig::GmaBmax { k_max: 0, .. } | MethodConfig::Gma0 { k_max: 0, .. } => {
                    return bad(format!("{} needs k_max >= 1", m.name()))
                }
                _ => {}
            }
            match m.omega_choice() {
                Some(OmegaChoice::Fixed(w)) if !(w > 0.0 && w.is_finite()) => {
                    return bad(format!("{}: omega_sq must be positive, got {w}", m.name()))
                }
                Some(OmegaChoice::SigmaSq(c)) if !(c > 0.0 && c.is_finite() && self.scenario.sigma > 0.0) => {
                    return bad(format!("{}: omega_sq = {c} sigma^2 must be positive", m.name()))
                }
                _ => {}
            }
        }
        if self.checkpoints.contains(&0) {
            return bad("checkpoints must be positive".into());
        }
        if self.methods.iter().any(|m| m.omega_choice() == Some(OmegaChoice::Cv)) {
            let grid = self.omega_grid();
            if grid.is_empty() || grid.iter().any(|w| !(*w > 0.0 && w.is_finite())) {
                return bad("the omega^2 grid must be nonempty and positive".into());
            }
            if self.cv.folds < 2 || self.cv.folds > self.scenario.n {
                return bad(format!(
                    "cannot use {} folds with n = {}",
                    self.cv.folds, self.scenario.n
                ));
            }
        }
        check_sorted(&self.boundaries)
    }

    pub fn omega_grid(&self) -> Vec<f64> {
        self.cv
            .grid
            .clone()
            .unwrap_or_else(|| default_omega_sq_grid(self.scenario.sigma))
    }

    /// `(method index, k)` for every reported regret series, in output order.
    fn layout(&self) -> Vec<(usize, Option<usize>)> {
        let mut out = Vec::new();
        for (i, m) in self.methods.iter().enumerate() {
            match m.k_max() {
                Some(k_max) => {
                    let mut ks: BTreeSet<usize> = self.checkpoints.iter().copied().filter(|&k| k <= k_max).collect();
                    ks.insert(k_max);
                    out.extend(ks.into_iter().map(|k| (i, Some(k))));
                }
                None => out.push((i, None)),
            }
        }
        out
    }
}

fn check_sorted(boundaries: &[f64]) -> Result<()> {
    if boundaries.iter().any(|b| b.is_nan()) || boundaries.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidParameter("boundaries must be sorted ascending".into()));
    }
    Ok(())
}

/// Regrets of one method at one iteration count across replicates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegretSeries {
    pub method: String,
    /// Iteration count for greedy methods.
    pub k: Option<usize>,
    pub regrets: Vec<f64>,
}

impl RegretSeries {
    pub fn mean(&self) -> f64 {
        self.regrets.iter().sum::<f64>() / self.regrets.len() as f64
    }

    /// Sample standard deviation (`n - 1` denominator); zero for one value.
    pub fn sd(&self) -> f64 {
        let n = self.regrets.len();
        if n < 2 {
            return 0.0;
        }
        let mean = self.mean();
        let ss: f64 = self.regrets.iter().map(|r| (r - mean) * (r - mean)).sum();
        (ss / (n - 1) as f64).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChosenOmega {
    pub method: String,
    /// `ω²` used in each replicate.
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicationResult {
    pub replicates: usize,
    pub series: Vec<RegretSeries>,
    pub omega_sq: Vec<ChosenOmega>,
}

impl ReplicationResult {
    pub fn series(&self, method: &str, k: Option<usize>) -> Option<&RegretSeries> {
        self.series.iter().find(|s| s.method == method && s.k == k)
    }

    /// The last series of a method (its final iterate for greedy methods).
    pub fn final_series(&self, method: &str) -> Option<&RegretSeries> {
        self.series.iter().rev().find(|s| s.method == method)
    }
}

struct ReplicateOutcome {
    regrets: Vec<f64>,
    omegas: Vec<Option<f64>>,
}

/// Runs every replicate on a pool of `workers` threads and gathers the
/// results in replicate order.
pub fn run_replications(config: &ExperimentConfig, workers: usize) -> Result<ReplicationResult> {
    config.validate()?;
    if workers == 0 {
        return Err(Error::InvalidParameter("workers must be at least 1".into()));
    }
    let layout = config.layout();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    let outcomes: Vec<ReplicateOutcome> = pool.install(|| {
        (0..config.replicates)
            .into_par_iter()
            .map(|r| run_replicate(config, &layout, r as u64))
            .collect::<Result<Vec<_>>>()
    })?;

    let series = layout
        .iter()
        .enumerate()
        .map(|(slot, &(i, k))| RegretSeries {
            method: config.methods[i].name().to_string(),
            k,
            regrets: outcomes.iter().map(|o| o.regrets[slot]).collect(),
        })
        .collect();
    let omega_sq = config
        .methods
        .iter()
        .enumerate()
        .filter(|(_, m)| m.omega_choice().is_some())
        .map(|(i, m)| ChosenOmega {
            method: m.name().to_string(),
            values: outcomes.iter().map(|o| o.omegas[i].unwrap_or(f64::NAN)).collect(),
        })
        .collect();
    Ok(ReplicationResult {
        replicates: config.replicates,
        series,
        omega_sq,
    })
}

fn run_replicate(config: &ExperimentConfig, layout: &[(usize, Option<usize>)], r: u64) -> Result<ReplicateOutcome> {
    let (dict, obs) = generate_scenario(&config.scenario, r)?;
    let truth = obs.truth().expect("generated scenarios carry the truth");
    let needs_gram = config.methods.iter().any(|m| {
        matches!(
            m,
            MethodConfig::GmaBmax { .. } | MethodConfig::Gma0 { .. } | MethodConfig::Proj { .. }
        )
    });
    let gram = needs_gram.then(|| dict.gram());
    let ctx = Replicate {
        config,
        dict: &dict,
        obs: &obs,
        truth,
        gram: gram.as_ref(),
        replicate: r,
    };

    let mut regrets = vec![f64::NAN; layout.len()];
    let mut omegas = vec![None; config.methods.len()];
    for (i, method) in config.methods.iter().enumerate() {
        let slots: Vec<(usize, Option<usize>)> = layout
            .iter()
            .enumerate()
            .filter(|(_, (mi, _))| *mi == i)
            .map(|(slot, (_, k))| (slot, *k))
            .collect();
        let omega = match method.omega_choice() {
            Some(choice) => Some(ctx.resolve_omega(method, choice)?),
            None => None,
        };
        omegas[i] = omega;
        for (slot, value) in ctx.run(method, omega, &slots)? {
            regrets[slot] = value;
        }
    }
    Ok(ReplicateOutcome { regrets, omegas })
}

struct Replicate<'a> {
    config: &'a ExperimentConfig,
    dict: &'a Dictionary,
    obs: &'a Observation,
    truth: &'a [f64],
    gram: Option<&'a Gram>,
    replicate: u64,
}

impl Replicate<'_> {
    fn params(&self, omega_sq: f64, entropy: Entropy) -> Result<AggregationParams> {
        AggregationParams::flat(self.dict.m(), self.config.nu, omega_sq, entropy)
    }

    fn resolve_omega(&self, method: &MethodConfig, choice: OmegaChoice) -> Result<f64> {
        let sigma = self.config.scenario.sigma;
        match choice {
            OmegaChoice::Fixed(w) => Ok(w),
            OmegaChoice::SigmaSq(c) => Ok(c * sigma * sigma),
            OmegaChoice::Cv => {
                let grid = self.config.omega_grid();
                let base = self.params(grid[0], Entropy::Kl)?;
                // every method sees the same folds within a replicate
                let mut rng = stream_rng(self.config.scenario.seed, self.replicate, Stream::FoldShuffle);
                let cv = cross_validate_omega_with(
                    self.dict,
                    self.obs,
                    &base,
                    &grid,
                    self.config.cv.folds,
                    method.cv_method(),
                    &mut rng,
                )?;
                Ok(cv.omega_sq)
            }
        }
    }

    fn regret(&self, estimate: &[f64]) -> Result<f64> {
        regret(estimate, self.truth, self.dict)
    }

    /// `(slot, regret)` pairs for the method's series.
    fn run(
        &self,
        method: &MethodConfig,
        omega: Option<f64>,
        slots: &[(usize, Option<usize>)],
    ) -> Result<Vec<(usize, f64)>> {
        let single = |value: f64| Ok(vec![(slots[0].0, value)]);
        match method {
            MethodConfig::OracleModel => {
                let k = oracle_index(self.dict, self.truth)?;
                single(self.regret(self.dict.candidate(k))?)
            }
            MethodConfig::Star => single(self.regret(&solve_star(self.dict, self.obs)?.estimate)?),
            MethodConfig::Ewma { .. } => {
                let params = self.params(omega.expect("resolved"), Entropy::Kl)?;
                let fit = solve_ewma(&Problem::new(self.dict, self.obs, &params)?)?;
                single(self.regret(&fit.estimate)?)
            }
            MethodConfig::BmaxExact { .. } => {
                let params = self.params(omega.expect("resolved"), Entropy::Kl)?;
                let problem = Problem::new(self.dict, self.obs, &params)?;
                let sol = solve_bmax_exact(&problem, &ExactSolveOptions::default())?.require_converged()?;
                single(self.regret(&sol.psi)?)
            }
            MethodConfig::Proj { iterations } => {
                let params = AggregationParams::projection(self.dict.m());
                let problem = Problem::new(self.dict, self.obs, &params)?;
                let mut run = GreedyQ::new(&problem, self.gram.expect("gram"))?;
                for _ in 0..*iterations {
                    run.step()?;
                }
                single(self.regret(run.estimate())?)
            }
            MethodConfig::GmaBmax { k_max, .. } => {
                let params = self.params(omega.expect("resolved"), Entropy::Kl)?;
                let problem = Problem::new(self.dict, self.obs, &params)?;
                let mut run = GreedyBmax::new(&problem, self.gram.expect("gram"))?;
                self.checkpointed(
                    *k_max,
                    slots,
                    |run: &mut GreedyBmax| run.step().map(|_| ()),
                    &mut run,
                    |r| r.estimate().to_vec(),
                )
            }
            MethodConfig::Gma0 { k_max, .. } => {
                let params = self.params(omega.expect("resolved"), Entropy::Linear)?;
                let problem = Problem::new(self.dict, self.obs, &params)?;
                let mut run = GreedyQ::new(&problem, self.gram.expect("gram"))?;
                self.checkpointed(
                    *k_max,
                    slots,
                    |run: &mut GreedyQ| run.step().map(|_| ()),
                    &mut run,
                    |r| r.estimate().to_vec(),
                )
            }
        }
    }

    fn checkpointed<S>(
        &self,
        k_max: usize,
        slots: &[(usize, Option<usize>)],
        step: impl Fn(&mut S) -> Result<()>,
        state: &mut S,
        estimate: impl Fn(&S) -> Vec<f64>,
    ) -> Result<Vec<(usize, f64)>> {
        let mut out = Vec::with_capacity(slots.len());
        let mut next = slots.iter().peekable();
        for k in 1..=k_max {
            step(state)?;
            while let Some(&&(slot, Some(at))) = next.peek() {
                if at != k {
                    break;
                }
                out.push((slot, self.regret(&estimate(state))?));
                next.next();
            }
        }
        Ok(out)
    }
}

/// Number of values `≤` each boundary.
pub fn cumulative_frequency(values: &[f64], boundaries: &[f64]) -> Result<Vec<usize>> {
    check_sorted(boundaries)?;
    Ok(boundaries
        .iter()
        .map(|b| values.iter().filter(|v| **v <= *b).count())
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrequencyRow {
    pub method: String,
    pub k: Option<usize>,
    pub counts: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrequencyTable {
    pub boundaries: Vec<f64>,
    pub rows: Vec<FrequencyRow>,
}

/// Cumulative frequencies of every method's final regrets.
pub fn frequency_table(result: &ReplicationResult, boundaries: &[f64]) -> Result<FrequencyTable> {
    let mut rows = Vec::new();
    let mut seen = BTreeSet::new();
    for s in &result.series {
        if seen.insert(s.method.clone()) {
            let last = result.final_series(&s.method).expect("present");
            rows.push(FrequencyRow {
                method: last.method.clone(),
                k: last.k,
                counts: cumulative_frequency(&last.regrets, boundaries)?,
            });
        }
    }
    Ok(FrequencyTable {
        boundaries: boundaries.to_vec(),
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesSummary {
    pub method: String,
    pub k: Option<usize>,
    pub mean: f64,
    pub sd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OmegaSummary {
    pub method: String,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

/// Everything written to `summary.json` by an experiment run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentSummary {
    pub config: ExperimentConfig,
    pub replicates: usize,
    pub regret: Vec<SeriesSummary>,
    pub omega_sq: Vec<OmegaSummary>,
    pub cumulative_frequency: FrequencyTable,
}

pub fn summarize(config: &ExperimentConfig, result: &ReplicationResult) -> Result<ExperimentSummary> {
    Ok(ExperimentSummary {
        config: config.clone(),
        replicates: result.replicates,
        regret: result
            .series
            .iter()
            .map(|s| SeriesSummary {
                method: s.method.clone(),
                k: s.k,
                mean: s.mean(),
                sd: s.sd(),
            })
            .collect(),
        omega_sq: result
            .omega_sq
            .iter()
            .map(|o| OmegaSummary {
                method: o.method.clone(),
                mean: o.values.iter().sum::<f64>() / o.values.len() as f64,
                min: o.values.iter().copied().fold(f64::INFINITY, f64::min),
                max: o.values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            })
            .collect(),
        cumulative_frequency: frequency_table(result, &config.boundaries)?,
    })
}

/// One row per replicate, method and iteration count: `replicate,method,k,regret`.
pub fn write_replicates_csv<W: Write>(writer: W, result: &ReplicationResult) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["replicate", "method", "k", "regret"])?;
    for r in 0..result.replicates {
        for s in &result.series {
            let k = s.k.map(|k| k.to_string()).unwrap_or_default();
            w.write_record([r.to_string(), s.method.clone(), k, fmt_f64(s.regrets[r])])?;
        }
    }
    w.flush()?;
    Ok(())
}
