//! Synthetic regression scenarios.
//!
//! With `Θ, ζ_j, Δ, ξ` independent standard normal vectors in `R^n`, the
//! dictionary is `f_j = Θ + s ζ_j` for `j ≤ M1` and `f_j = ζ_j` otherwise,
//! the truth is `η = f_1 + cΔ` or `η = Θ + cΔ`, and `Y = η + σ ξ`.

use serde::{Deserialize, Serialize};

use super::rng::{standard_normals, stream_rng, Stream};
use crate::dictionary::{Dictionary, Observation};
use crate::error::{Error, Result};
use crate::linalg::norm;

/// Spread of the clustered candidates around `Θ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ScaleRepr", into = "ScaleRepr")]
pub enum Scale {
    Fixed(f64),
    /// `s_j = σ/||ζ_j||₂`, so every clustered candidate sits at distance `σ`
    /// from `Θ`.
    SigmaOverZetaNorm,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ScaleRepr {
    Value(f64),
    Named(String),
}

const SIGMA_OVER_ZETA_NORM: &str = "sigma_over_zeta_norm";

impl TryFrom<ScaleRepr> for Scale {
    type Error = String;

    fn try_from(repr: ScaleRepr) -> Result<Self, String> {
        match repr {
            ScaleRepr::Value(s) => Ok(Scale::Fixed(s)),
            ScaleRepr::Named(name) if name == SIGMA_OVER_ZETA_NORM => Ok(Scale::SigmaOverZetaNorm),
            ScaleRepr::Named(name) => Err(format!(
                "unknown scale {name:?}; expected a number or {SIGMA_OVER_ZETA_NORM:?}"
            )),
        }
    }
}

impl From<Scale> for ScaleRepr {
    fn from(s: Scale) -> Self {
        match s {
            Scale::Fixed(v) => ScaleRepr::Value(v),
            Scale::SigmaOverZetaNorm => ScaleRepr::Named(SIGMA_OVER_ZETA_NORM.into()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TruthKind {
    /// `η = Θ + cΔ`
    ThetaPlusDelta,
    /// `η = f_1 + cΔ`
    F1PlusDelta,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub n: usize,
    pub m: usize,
    pub m1: usize,
    pub s: Scale,
    pub sigma: f64,
    /// Coefficient `c` on the misspecification direction `Δ`.
    pub misspec_scale: f64,
    pub truth_kind: TruthKind,
    pub seed: u64,
}

impl ScenarioSpec {
    /// 500 candidates in `R^50`, 50 of them clustered around `Θ`, with the
    /// truth near the first candidate.
    pub fn exp1(seed: u64) -> Self {
        Self {
            n: 50,
            m: 500,
            m1: 50,
            s: Scale::Fixed(1.0),
            sigma: 2.0,
            misspec_scale: 0.5,
            truth_kind: TruthKind::F1PlusDelta,
            seed,
        }
    }

    /// Every candidate at distance `σ` from `Θ`, with the truth near `Θ`.
    pub fn exp2(seed: u64) -> Self {
        Self {
            m1: 500,
            s: Scale::SigmaOverZetaNorm,
            truth_kind: TruthKind::ThetaPlusDelta,
            ..Self::exp1(seed)
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
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.n == 0 || self.m == 0 {
            return bad("scenario needs n >= 1 and m >= 1".into());
        }
        if self.m1 > self.m {
            return bad(format!("m1 = {} exceeds m = {}", self.m1, self.m));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return bad(format!("sigma must be finite and nonnegative, got {}", self.sigma));
        }
        if !(self.misspec_scale >= 0.0 && self.misspec_scale.is_finite()) {
            return bad(format!(
                "misspec_scale must be finite and nonnegative, got {}",
                self.misspec_scale
            ));
        }
        if let Scale::Fixed(s) = self.s {
            if !(s >= 0.0 && s.is_finite()) {
                return bad(format!("s must be finite and nonnegative, got {s}"));
            }
        }
        Ok(())
    }
}

/// Draws replicate `replicate` of the scenario. The observation carries the
/// truth `η`.
pub fn generate_scenario(spec: &ScenarioSpec, replicate: u64) -> Result<(Dictionary, Observation)> {
    spec.validate()?;
    let n = spec.n;
    let theta = standard_normals(&mut stream_rng(spec.seed, replicate, Stream::Theta), n);
    let mut zeta_rng = stream_rng(spec.seed, replicate, Stream::Zeta);
    let mut data = Vec::with_capacity(n * spec.m);
    for j in 0..spec.m {
        let zeta = standard_normals(&mut zeta_rng, n);
        if j < spec.m1 {
            let s = match spec.s {
                Scale::Fixed(s) => s,
                Scale::SigmaOverZetaNorm => spec.sigma / norm(&zeta),
            };
            data.extend(theta.iter().zip(&zeta).map(|(t, z)| t + s * z));
        } else {
            data.extend(zeta);
        }
    }
    let dict = Dictionary::from_candidate_major(n, spec.m, data)?;

    let delta = standard_normals(&mut stream_rng(spec.seed, replicate, Stream::Delta), n);
    let anchor = match spec.truth_kind {
        TruthKind::ThetaPlusDelta => &theta[..],
        TruthKind::F1PlusDelta => dict.candidate(0),
    };
    let truth: Vec<f64> = anchor
        .iter()
        .zip(&delta)
        .map(|(a, d)| a + spec.misspec_scale * d)
        .collect();
    let xi = standard_normals(&mut stream_rng(spec.seed, replicate, Stream::Noise), n);
    let y = truth.iter().zip(&xi).map(|(t, x)| t + spec.sigma * x).collect();
    let obs = Observation::new(y, Some(truth))?;
    Ok((dict, obs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::sq_dist;

    fn small(seed: u64) -> ScenarioSpec {
        ScenarioSpec {
            n: 6,
            m: 5,
            m1: 3,
            ..ScenarioSpec::exp1(seed)
        }
    }

    #[test]
    fn zero_spread_collapses_the_cluster() {
        let spec = ScenarioSpec {
            m1: 5,
            s: Scale::Fixed(0.0),
            ..small(1)
        };
        let (d, _) = generate_scenario(&spec, 0).unwrap();
        for j in 1..5 {
            assert_eq!(d.candidate(j), d.candidate(0));
        }
    }

    #[test]
    fn noiseless_observation_is_the_truth() {
        let spec = ScenarioSpec { sigma: 0.0, ..small(2) };
        let (_, o) = generate_scenario(&spec, 0).unwrap();
        assert_eq!(o.y(), o.truth().unwrap());
    }

    #[test]
    fn reproducible_per_replicate() {
        let spec = small(3);
        let (a, ya) = generate_scenario(&spec, 4).unwrap();
        let (b, yb) = generate_scenario(&spec, 4).unwrap();
        assert_eq!(a, b);
        assert_eq!(ya, yb);
        let (c, _) = generate_scenario(&spec, 5).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn sigma_over_zeta_norm_places_cluster_on_a_sphere() {
        let spec = ScenarioSpec {
            m1: 5,
            s: Scale::SigmaOverZetaNorm,
            truth_kind: TruthKind::ThetaPlusDelta,
            misspec_scale: 0.0,
            sigma: 0.0,
            ..small(4)
        };
        // with σ = 0 every candidate equals Θ, which is also the truth
        let (d, o) = generate_scenario(&spec, 0).unwrap();
        for f in d.candidates() {
            assert_eq!(f, o.truth().unwrap());
        }
        let spec = ScenarioSpec { sigma: 2.0, ..spec };
        let (d, o) = generate_scenario(&spec, 0).unwrap();
        // truth is Θ here, so every candidate is at distance exactly σ
        for f in d.candidates() {
            assert!((sq_dist(f, o.truth().unwrap()).sqrt() - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn spec_json_round_trip_and_validation() {
        for spec in [ScenarioSpec::exp1(9), ScenarioSpec::exp2(9)] {
            let text = serde_json::to_string(&spec).unwrap();
            assert_eq!(serde_json::from_str::<ScenarioSpec>(&text).unwrap(), spec);
        }
        assert!(serde_json::to_string(&ScenarioSpec::exp2(0))
            .unwrap()
            .contains("\"sigma_over_zeta_norm\""));
        let bad = ScenarioSpec {
            m1: 501,
            ..ScenarioSpec::exp1(0)
        };
        assert!(bad.validate().is_err());
        assert!(serde_json::from_str::<Scale>("\"nope\"").is_err());
    }
}
