//! Reproducible random streams.
//!
//! Every simulation draws from a ChaCha8 generator (counter based) whose seed
//! is derived from a path of integer keys, for instance
//! `(study seed, replication, bootstrap sample, attempt)`. Streams with
//! different paths are statistically independent and do not depend on the
//! order in which they are created, so parallel schedules reproduce serial
//! results bit for bit.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Seed of one stream in a tree of streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamSeed(u64);

impl StreamSeed {
    pub fn new(seed: u64) -> Self {
        StreamSeed(splitmix64(seed ^ 0x5eed_5eed_5eed_5eed))
    }

    pub fn child(self, key: u64) -> Self {
        StreamSeed(splitmix64(self.0 ^ splitmix64(key.wrapping_add(0x9e37_79b9_7f4a_7c15))))
    }

    pub fn raw(self) -> u64 {
        self.0
    }

    pub fn rng(self) -> SimRng {
        ChaCha8Rng::seed_from_u64(self.0)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
