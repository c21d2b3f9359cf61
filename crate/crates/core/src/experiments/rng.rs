//! Reproducible random streams.
//!
//! Every draw comes from a ChaCha20 generator whose key is derived from
//! `(seed, replicate)` and whose stream id names the quantity being drawn.
//! Replicates are therefore independent of evaluation order and of the
//! number of worker threads.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Theta = 1,
    Zeta = 2,
    Delta = 3,
    Noise = 4,
    FoldShuffle = 5,
}

pub fn stream_rng(seed: u64, replicate: u64, stream: Stream) -> ChaCha20Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&replicate.to_le_bytes());
    let mut rng = ChaCha20Rng::from_seed(key);
    rng.set_stream(stream as u64);
    rng
}

/// `len` independent standard normal draws.
pub fn standard_normals<R: rand::Rng + ?Sized>(rng: &mut R, len: usize) -> Vec<f64> {
    (0..len).map(|_| StandardNormal.sample(rng)).collect()
}
