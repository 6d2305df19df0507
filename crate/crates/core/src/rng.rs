//! Keyed Gaussian streams.
//!
//! Every array of couplings is drawn from its own ChaCha8 stream whose key is the
//! tuple `(master seed, family, replica, role)` and whose stream id is the
//! interaction order. Any replica can therefore be regenerated on its own, in any
//! order and on any thread, and comes out bit-identical.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

/// Seed record of one disorder realization.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedKey {
    pub master: u64,
    /// Separates independent experiments that share a master seed.
    pub family: u64,
    pub replica: u64,
    /// Distinguishes the shared copy from the independent copies of a coupled system.
    pub role: u64,
}

impl SeedKey {
    pub fn new(master: u64, family: u64, replica: u64, role: u64) -> Self {
        Self {
            master,
            family,
            replica,
            role,
        }
    }

    pub fn with_role(self, role: u64) -> Self {
        Self { role, ..self }
    }

    /// Stream for the given label (the interaction order for couplings).
    pub fn stream(&self, label: u64) -> ChaCha8Rng {
        let mut bytes = [0u8; 32];
        for (chunk, word) in
            bytes
                .chunks_exact_mut(8)
                .zip([self.master, self.family, self.replica, self.role])
        {
            chunk.copy_from_slice(&word.to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(bytes);
        rng.set_stream(label);
        rng
    }

    pub fn normals(&self, label: u64, len: usize) -> Vec<f64> {
        let mut rng = self.stream(label);
        (0..len).map(|_| StandardNormal.sample(&mut rng)).collect()
    }
}
