//! Points of the probability simplex and the entropies defined on it.

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};

/// Deviation from a unit sum that is silently renormalized away.
pub const SUM_TOLERANCE: f64 = 1e-9;

/// Weights below this are treated as exact zeros in `t log t`.
const ZERO_WEIGHT: f64 = 1e-300;

/// A point of the flat simplex: nonnegative entries summing to one.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct SimplexWeights(Vec<f64>);

impl SimplexWeights {
    /// Validates `w` and rescales it to an exact unit sum.
    ///
    /// Entries must be finite and nonnegative, and the sum must already be
    /// within [`SUM_TOLERANCE`] of one.
    pub fn new(mut w: Vec<f64>) -> Result<Self> {
        if w.is_empty() {
            return Err(Error::InvalidSimplex("no entries".into()));
        }
        if let Some((j, &x)) = w.iter().enumerate().find(|(_, x)| !x.is_finite() || **x < 0.0) {
            return Err(Error::InvalidSimplex(format!("entry {j} is {x}")));
        }
        let sum: f64 = w.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidSimplex(format!("entries sum to {sum}")));
        }
        if sum != 1.0 {
            for x in &mut w {
                *x /= sum;
            }
        }
        Ok(Self(w))
    }

    /// Normalizes arbitrary nonnegative masses with a positive total.
    pub fn normalize(mut w: Vec<f64>) -> Result<Self> {
        let sum: f64 = w.iter().sum();
        if !(sum > 0.0 && sum.is_finite()) {
            return Err(Error::InvalidSimplex(format!("total mass {sum}")));
        }
        for x in &mut w {
            *x /= sum;
        }
        Self::new(w)
    }

    /// Softmax of log-masses.
    pub fn from_log_weights(logits: &[f64]) -> Result<Self> {
        if logits.iter().any(|x| x.is_nan()) {
            return Err(Error::NonFinite("log weights"));
        }
        Self::new(crate::lse::softmax(logits))
    }

    pub fn uniform(m: usize) -> Self {
        assert!(m > 0, "simplex dimension must be positive");
        Self(vec![1.0 / m as f64; m])
    }

    /// The vertex `e_j` of the simplex in `R^m`.
    pub fn vertex(m: usize, j: usize) -> Self {
        assert!(j < m, "vertex index {j} out of range for dimension {m}");
        let mut w = vec![0.0; m];
        w[j] = 1.0;
        Self(w)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    /// True when every entry equals `1/m` up to rounding.
    pub fn is_uniform(&self) -> bool {
        let target = 1.0 / self.0.len() as f64;
        self.0.iter().all(|&x| (x - target).abs() <= 1e-15)
    }

    /// Half the `l1` distance to `other`.
    pub fn total_variation(&self, other: &Self) -> Result<f64> {
        check_len("total variation", self.len(), other.len())?;
        Ok(0.5 * self.0.iter().zip(&other.0).map(|(a, b)| (a - b).abs()).sum::<f64>())
    }
}

impl<'de> Deserialize<'de> for SimplexWeights {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let w = Vec::<f64>::deserialize(d)?;
        Self::new(w).map_err(serde::de::Error::custom)
    }
}

/// Choice of `ρ` in the entropy `Σ λ_j log(ρ(λ_j)/π_j)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Entropy {
    /// `ρ(t) = t`: the Kullback-Leibler divergence.
    Kl,
    /// `ρ(t) = 1`: the linear entropy `Σ λ_j log(1/π_j)`.
    Linear,
}

impl std::str::FromStr for Entropy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "kl" => Ok(Entropy::Kl),
            "linear" => Ok(Entropy::Linear),
            other => Err(Error::InvalidParameter(format!("unknown entropy '{other}'"))),
        }
    }
}

fn check_prior(lambda: &SimplexWeights, prior: &SimplexWeights) -> Result<()> {
    check_len("prior", lambda.len(), prior.len())?;
    if let Some(j) = prior.as_slice().iter().position(|&p| p <= 0.0) {
        return Err(Error::InvalidParameter(format!("prior entry {j} is zero")));
    }
    Ok(())
}

/// `K(λ, π) = Σ λ_j log(λ_j / π_j)` with `0 log 0 = 0`.
pub fn kl_divergence(lambda: &SimplexWeights, prior: &SimplexWeights) -> Result<f64> {
    check_prior(lambda, prior)?;
    Ok(lambda
        .as_slice()
        .iter()
        .zip(prior.as_slice())
        .filter(|(&l, _)| l >= ZERO_WEIGHT)
        .map(|(&l, &p)| l * (l / p).ln())
        .sum())
}

pub fn rho_entropy(lambda: &SimplexWeights, prior: &SimplexWeights, entropy: Entropy) -> Result<f64> {
    match entropy {
        Entropy::Kl => kl_divergence(lambda, prior),
        Entropy::Linear => {
            check_prior(lambda, prior)?;
            Ok(lambda
                .as_slice()
                .iter()
                .zip(prior.as_slice())
                .map(|(&l, &p)| -l * p.ln())
                .sum())
        }
    }
}
