//! Counter-based random streams.
//!
//! A stream is ChaCha8 keyed by the seed, with the 64-bit ChaCha stream
//! selector set to `stream_id`. The block counter is the stream's position, so
//! a stream can be rebuilt at any point with [`RngStream::at`]. ChaCha output
//! and the PCG seed expansion are specified bit for bit, which makes draws
//! identical on every platform.

#[allow(unused_imports)]
use num_traits::Float;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Reproducible random stream addressed by `(seed, stream_id)`.
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    core: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut core = ChaCha8Rng::seed_from_u64(seed);
        core.set_stream(stream_id);
        RngStream { seed, stream_id, core }
    }

    /// Rebuilds a stream positioned `counter` 32-bit words into its sequence.
    pub fn at(seed: u64, stream_id: u64, counter: u64) -> Self {
        let mut s = Self::new(seed, stream_id);
        s.core.set_word_pos(counter as u128);
        s
    }

    /// Stream of replica `index` within experiment `family`.
    ///
    /// Families occupy the top 24 bits, so up to 2^40 replicas per family
    /// never collide.
    pub fn replica(seed: u64, family: u32, index: u64) -> Self {
        debug_assert!(index < (1 << 40));
        Self::new(seed, ((family as u64) << 40) | index)
    }

    /// Independent child stream, a pure function of `(self.stream_id, tag)`.
    ///
    /// The child does not depend on how far `self` has advanced.
    pub fn derive(&self, tag: u64) -> Self {
        let id = splitmix(self.stream_id.rotate_left(23) ^ splitmix(tag ^ GOLDEN));
        Self::new(self.seed, id)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Number of 32-bit words consumed so far.
    pub fn counter(&self) -> u64 {
        self.core.get_word_pos() as u64
    }

    /// Uniform draw on the open interval (0, 1).
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        // 52 random mantissa bits, offset by half an ulp so 0 is excluded
        let bits = self.core.next_u64() >> 12;
        (bits as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
    }
}

impl RngCore for RngStream {
    #[inline]
    fn next_u32(&mut self) -> u32 {
        self.core.next_u32()
    }

    #[inline]
    fn next_u64(&mut self) -> u64 {
        self.core.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.core.fill_bytes(dst)
    }
}
