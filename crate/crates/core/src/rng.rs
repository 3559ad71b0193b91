//! Seeded random streams.
//!
//! Every consumer of randomness (a link in a trial, a request's swap attempts,
//! an outer benchmark iteration) gets its own [`RngStream`], addressed by a
//! master seed and a stream id. Streams are derived hierarchically with
//! [`RngStream::substream`], so results never depend on the order in which
//! parallel workers pick up their work.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngStream {
    seed: u64,
    stream: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Child stream number `index` of this stream.
    pub fn substream(&self, index: u64) -> Self {
        Self { seed: self.seed, stream: mix(self.stream ^ mix(index.wrapping_add(0x632b_e59b_d9b4_e019))) }
    }

    /// A fresh generator positioned at the start of this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

// splitmix64 finalizer
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
