use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simplex::{Entropy, SimplexWeights};

/// Tuning of the aggregation objectives: `ν`, the inflated noise variance
/// `ω²`, the prior `π`, and the entropy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregationParams {
    nu: f64,
    omega_sq: f64,
    prior: SimplexWeights,
    entropy: Entropy,
}

impl AggregationParams {
    pub fn new(nu: f64, omega_sq: f64, prior: SimplexWeights, entropy: Entropy) -> Result<Self> {
        if !(nu > 0.0 && nu < 1.0) {
            return Err(Error::InvalidParameter(format!("nu must lie in (0,1), got {nu}")));
        }
        Self::with_any_nu(nu, omega_sq, prior, entropy)
    }

    pub fn flat(m: usize, nu: f64, omega_sq: f64, entropy: Entropy) -> Result<Self> {
        Self::new(nu, omega_sq, SimplexWeights::uniform(m), entropy)
    }

    /// `ν = 0`, linear entropy and a flat prior: the setting under which the
    /// linear-entropy objective reduces to least squares over the hull.
    pub fn projection(m: usize) -> Self {
        Self {
            nu: 0.0,
            omega_sq: 1.0,
            prior: SimplexWeights::uniform(m),
            entropy: Entropy::Linear,
        }
    }

    fn with_any_nu(nu: f64, omega_sq: f64, prior: SimplexWeights, entropy: Entropy) -> Result<Self> {
        if !(omega_sq > 0.0 && omega_sq.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "omega^2 must be positive, got {omega_sq}"
            )));
        }
        if let Some(j) = prior.as_slice().iter().position(|&p| p <= 0.0) {
            return Err(Error::InvalidParameter(format!("prior entry {j} has zero mass")));
        }
        Ok(Self {
            nu,
            omega_sq,
            prior,
            entropy,
        })
    }

    pub fn with_omega_sq(&self, omega_sq: f64) -> Result<Self> {
        Self::with_any_nu(self.nu, omega_sq, self.prior.clone(), self.entropy)
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn omega_sq(&self) -> f64 {
        self.omega_sq
    }

    pub fn prior(&self) -> &SimplexWeights {
        &self.prior
    }

    pub fn entropy(&self) -> Entropy {
        self.entropy
    }
}

#[derive(Deserialize)]
struct RawParams {
    nu: f64,
    omega_sq: f64,
    prior: SimplexWeights,
    entropy: Entropy,
}

impl<'de> Deserialize<'de> for AggregationParams {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawParams::deserialize(d)?;
        Self::new(raw.nu, raw.omega_sq, raw.prior, raw.entropy).map_err(serde::de::Error::custom)
    }
}
