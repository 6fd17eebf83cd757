//! Splittable, seed-deterministic random streams.
//!
//! A [`RandomStream`] is a 64-bit key. Child streams are derived by mixing
//! tags into the key, and concrete generators are obtained per
//! `(purpose, indices)` pair, so that any task can be replayed in isolation
//! and parallel execution never depends on scheduling order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator type handed out by [`RandomStream::rng`].
pub type StreamRng = ChaCha8Rng;

/// Purpose tag separating the substreams of one realization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum Purpose {
    Deployment = 1,
    EmbbChannel = 2,
    History = 3,
    Synthesis = 4,
    TargetDraw = 5,
    OutageMc = 6,
    Realization = 7,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RandomStream {
    key: u64,
}

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn absorb(key: u64, tag: u64) -> u64 {
    splitmix(key ^ splitmix(tag.wrapping_add(GOLDEN)))
}

impl RandomStream {
    pub fn new(seed: u64) -> Self {
        Self { key: splitmix(seed) }
    }

    /// Stable 64-bit identifier of this stream (reported as a per-task seed).
    pub fn key(&self) -> u64 {
        self.key
    }

    /// Child stream for a realization index.
    pub fn realization(&self, index: u64) -> Self {
        self.derive(Purpose::Realization, &[index])
    }

    pub fn derive(&self, purpose: Purpose, indices: &[u64]) -> Self {
        let mut key = absorb(self.key, purpose as u64);
        for &i in indices {
            key = absorb(key, i);
        }
        Self { key }
    }

    /// Generator for the substream `(purpose, indices)`.
    pub fn rng(&self, purpose: Purpose, indices: &[u64]) -> StreamRng {
        StreamRng::seed_from_u64(self.derive(purpose, indices).key)
    }
}
