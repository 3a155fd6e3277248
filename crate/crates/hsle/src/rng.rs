//! Reproducible random streams.
//!
//! Every replica is identified by a master seed and a stream index. The pair
//! selects an independent ChaCha8 stream; draws within a replica are sequential.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngSeed {
    pub seed: u64,
    pub stream: u64,
}

impl RngSeed {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(self.seed);
        r.set_stream(self.stream);
        r
    }

    /// Seed for the k-th replica of an ensemble sharing this master seed.
    pub fn replica(&self, k: u64) -> Self {
        Self { seed: self.seed, stream: self.stream.wrapping_mul(1 << 32).wrapping_add(k) }
    }

    /// A stream unrelated to any replica of this seed, for auxiliary draws.
    pub fn derive(&self, tag: u64) -> Self {
        let mixed = self.seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
        Self { seed: mixed.rotate_left(17), stream: self.stream }
    }
}

pub fn normal<R: rand::Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}
