//! Random instances shared by the integration tests.

#![allow(dead_code)]

use bmax_core::{AggregationParams, Dictionary, Entropy, Observation, SimplexWeights};
use rand::Rng;

pub struct Instance {
    pub dict: Dictionary,
    pub obs: Observation,
    pub params: AggregationParams,
}

pub fn uniform_vec<R: Rng>(rng: &mut R, len: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..len).map(|_| rng.random_range(lo..hi)).collect()
}

/// Strictly positive weights summing to one.
pub fn random_simplex<R: Rng>(rng: &mut R, m: usize) -> SimplexWeights {
    SimplexWeights::normalize(uniform_vec(rng, m, 0.05, 1.0)).unwrap()
}

/// Candidates and observations in `[-2, 2]^n`, `ν ∈ [0.1, 0.9]`,
/// `ω² ∈ [0.5, 10]` and a random positive prior unless `flat`.
pub fn random_instance<R: Rng>(rng: &mut R, n: usize, m: usize, entropy: Entropy, flat: bool) -> Instance {
    let candidates = (0..m).map(|_| uniform_vec(rng, n, -2.0, 2.0)).collect();
    let dict = Dictionary::from_candidates(candidates).unwrap();
    let truth = uniform_vec(rng, n, -1.5, 1.5);
    let y = truth.iter().map(|t| t + rng.random_range(-0.5..0.5)).collect();
    let obs = Observation::new(y, Some(truth)).unwrap();
    let prior = if flat {
        SimplexWeights::uniform(m)
    } else {
        random_simplex(rng, m)
    };
    let nu = rng.random_range(0.1..0.9);
    let omega_sq = rng.random_range(0.5..10.0);
    let params = AggregationParams::new(nu, omega_sq, prior, entropy).unwrap();
    Instance { dict, obs, params }
}

/// The fixed two-dimensional, three-candidate instance used by the grid oracles.
pub fn small_fixed(nu: f64, omega_sq: f64, entropy: Entropy) -> Instance {
    let dict = Dictionary::from_candidates(vec![vec![1.0, 0.2], vec![-0.6, 1.1], vec![0.3, -1.2]]).unwrap();
    let obs = Observation::new(vec![0.4, 0.1], None).unwrap();
    let params = AggregationParams::flat(3, nu, omega_sq, entropy).unwrap();
    Instance { dict, obs, params }
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
