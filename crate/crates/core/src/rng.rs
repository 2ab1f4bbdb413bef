//! Seedable, splittable random streams.
//!
//! A stream is identified by `(seed, index)` and backed by ChaCha8 with the
//! index used as the cipher's stream id, so sibling substreams never overlap.
//! Parallel code hands substream `i` to chunk `i`; results then depend only
//! on the chunk layout, never on scheduling.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    index: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self::with_index(seed, 0)
    }

    pub fn with_index(seed: u64, index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        Self { seed, index, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn index(&self) -> u64 {
        self.index
    }

    /// Child stream `i`. Derived from this stream's identity only, not from
    /// how many numbers it has produced.
    pub fn substream(&self, i: u64) -> Self {
        let key = splitmix64(self.seed ^ splitmix64(self.index.wrapping_add(0x9e37_79b9_7f4a_7c15)));
        Self::with_index(key, i)
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}
