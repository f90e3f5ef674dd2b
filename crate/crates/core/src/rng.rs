//! Reproducible, splittable random streams.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// A `(seed, stream_id)` pair naming an independent ChaCha8 keystream.
///
/// The seed and stream id together form the cipher key; [`RandomStream::rng_for_batch`]
/// selects one of the 2^64 nonce streams under that key, so batches never
/// share counter space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RandomStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RandomStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    pub fn from_seed(seed: u64) -> Self {
        Self::new(seed, 0)
    }

    /// A sibling stream under the same seed.
    pub fn with_stream(&self, stream_id: u64) -> Self {
        Self::new(self.seed, stream_id)
    }

    pub fn rng(&self) -> ChaCha8Rng {
        self.rng_for_batch(0)
    }

    pub fn rng_for_batch(&self, batch: u64) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.seed.to_le_bytes());
        key[8..16].copy_from_slice(&self.stream_id.to_le_bytes());
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(batch);
        rng
    }
}
